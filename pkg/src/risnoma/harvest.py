"""Energy-harvesting models and the Gamma fit of the harvested power.

The rectifier follows a logistic response with steepness ``a``, turn-on
level ``b`` and saturation ``p_th``, shifted so that zero input gives zero
output.  With ``d = a * rho * p_in`` and ``E = exp(a b)`` it simplifies to::

    P_H = p_th * (1 - exp(-d)) / (1 + E exp(-d))

which is what :func:`harvested_power` evaluates (exact zero at ``p_in = 0``,
no overflow for large inputs).

For the Gamma fit the logistic is linearized in ``zeta``, the product of the
steepness and a typical input level, and its first two moments are taken
against the Gamma law of the squared coherent cascade.  The fit is only
trusted while ``zeta`` is small; :func:`validity_zeta` reports that.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import GammaParams, SystemParams, x1_approximations

__all__ = [
    "EhParams",
    "RegionIIWarning",
    "DegenerateFitError",
    "DEFAULT_ZETA_THRESHOLD",
    "harvested_power",
    "ph_gamma_approx",
    "mean_harvested_power",
    "validity_zeta",
]

DEFAULT_ZETA_THRESHOLD = 0.03
_MODELS = ("nonlinear", "linear")


class RegionIIWarning(UserWarning):
    """The small-zeta linearization behind the Gamma fit is not trustworthy here."""


class DegenerateFitError(ArithmeticError):
    """The linearized moments have a nonpositive base; no Gamma fit exists."""


@dataclass(frozen=True)
class EhParams:
    model: str = "nonlinear"
    a: float = 150.0
    b: float = 0.014
    p_th: float = 0.024
    eta: float = 0.8

    def __post_init__(self) -> None:
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}, got {self.model!r}")
        for name in ("a", "b", "p_th"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")


def harvested_power(eh: EhParams, rho, p_in):
    """Harvested power for input RF power ``p_in`` and split ``rho`` (vectorized)."""
    p_in = np.asarray(p_in, dtype=float)
    if eh.model == "linear":
        out = eh.eta * rho * p_in
    else:
        d = eh.a * rho * p_in
        e_d = np.exp(-d)
        out = eh.p_th * (-np.expm1(-d)) / (1.0 + math.exp(eh.a * eh.b) * e_d)
    return float(out) if out.ndim == 0 else out


def _zeta(p: SystemParams, eh: EhParams, theta1: float) -> float:
    return eh.a * p.pt_w * p.rho * p.beta_ss * p.beta_s1 * theta1


def validity_zeta(p: SystemParams, eh: EhParams,
                  threshold: float = DEFAULT_ZETA_THRESHOLD) -> tuple[float, bool]:
    """``(zeta, in_region_I)``; region I means ``zeta <= threshold``."""
    _, x1sq = x1_approximations(p)
    z = _zeta(p, eh, x1sq.scale)
    return z, z <= threshold


def _log_ratio_growth(k1: float, q: float) -> float:
    # -k1*log1p(-2q) + 2*k1*log1p(-q) = k1 * sum_{n>=2} (2^n - 2) q^n / n
    if q > 0.05:
        return -k1 * math.log1p(-2.0 * q) + 2.0 * k1 * math.log1p(-q)
    total, qn, n = 0.0, q, 1
    while True:
        n += 1
        qn *= q
        term = (2.0 ** n - 2.0) * qn / n
        total += term
        if term <= 1e-17 * total:
            return k1 * total


def _lin_moments(p: SystemParams, eh: EhParams, *, threshold: float, need_second: bool):
    """Common part of the nonlinear fit: returns (k1, theta1, s0, q)."""
    _, x1sq = x1_approximations(p)
    k1, theta1 = x1sq.shape, x1sq.scale
    zeta = _zeta(p, eh, theta1)
    if zeta > threshold:
        warnings.warn(f"zeta = {zeta:.4g} exceeds {threshold:g}; harvested-power fit is outside region I",
                      RegionIIWarning, stacklevel=3)
    s0 = 1.0 / (1.0 + math.exp(eh.a * eh.b))
    q = (1.0 - s0) * zeta
    if 1.0 - q <= 0.0 or (need_second and 1.0 - 2.0 * q <= 0.0):
        raise DegenerateFitError(f"linearized harvest moments degenerate at zeta = {zeta:.4g}")
    return k1, theta1, s0, q


def ph_gamma_approx(p: SystemParams, eh: EhParams,
                    threshold: float = DEFAULT_ZETA_THRESHOLD) -> GammaParams:
    """Gamma law of the harvested power at D1 (requires ``rho > 0``).

    Emits :class:`RegionIIWarning` beyond the validity threshold and raises
    :class:`DegenerateFitError` when the linearized moments do not exist.
    """
    if p.rho <= 0.0:
        raise ValueError("harvested power is identically zero for rho = 0; no Gamma law")
    if eh.model == "linear":
        _, x1sq = x1_approximations(p)
        return GammaParams(x1sq.shape, eh.eta * p.rho * p.pt_w * p.beta_ss * p.beta_s1 * x1sq.scale)

    k1, _, s0, q = _lin_moments(p, eh, threshold=threshold, need_second=True)
    b = -2.0 * k1 * math.log1p(-q)
    # E[Y] - s0 and Var[Y], written to keep full precision as zeta -> 0
    excess = s0 * math.expm1(-k1 * math.log1p(-q))
    var = s0 * s0 * math.exp(b) * math.expm1(_log_ratio_growth(k1, q))
    if not (excess > 0.0 and var > 0.0):
        raise DegenerateFitError("harvest fit underflowed (zeta too small for double precision)")
    k_ph = excess * (excess / var)
    theta_ph = var / excess
    if not (k_ph > 0.0 and math.isfinite(theta_ph)):
        raise DegenerateFitError("harvest fit underflowed (zeta too small for double precision)")
    return GammaParams(k_ph, eh.p_th / (1.0 - s0) * theta_ph)


def mean_harvested_power(p: SystemParams, eh: EhParams,
                         threshold: float = DEFAULT_ZETA_THRESHOLD) -> float:
    """Closed-form mean harvested power; 0 for ``rho = 0``."""
    if p.rho == 0.0:
        return 0.0
    if eh.model == "linear":
        return ph_gamma_approx(p, eh).mean
    k1, _, _, q = _lin_moments(p, eh, threshold=threshold, need_second=False)
    return eh.p_th * math.exp(-eh.a * eh.b) * math.expm1(-k1 * math.log1p(-q))
