"""Scenario parameters, cascaded-channel statistics and fading samplers.

Two cascaded links leave the source through an N-element surface whose
phases are matched to the near user D1:

* ``x1 = sum_n |h_ss,n| |h_s1,n|`` is the coherent amplitude seen by D1;
* ``h2_sq = |sum_n exp(j phi_n) h_ss,n h_s2,n|^2`` is the incoherent power
  seen by the far user D2 under those same phases.

Samplers return *normalized* gains: path losses, transmit power and the
residual self-interference level are applied by the link model.  That keeps
one set of draws reusable across every scenario sharing the same fading
shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .special import DomainError
from .units import dbm_to_watts

__all__ = [
    "SystemParams",
    "FadingShape",
    "GammaParams",
    "ChannelDraw",
    "ChannelBatch",
    "nakagami_mean",
    "gamma_moment",
    "x1_approximations",
    "x2_approximations",
    "sample_channel_batch",
    "sample_channel_draw",
]

_ALPHA_TOL = 1e-12


@dataclass(frozen=True)
class FadingShape:
    """The subset of a scenario that determines the normalized channel law."""

    n_elements: int
    m_ss: float
    m_s1: float
    m_s2: float
    omega_ss: float
    omega_s1: float
    omega_s2: float


@dataclass(frozen=True)
class SystemParams:
    """One operating point of the two-user downlink.

    Powers are in dBm at this boundary and exposed in watts through
    :attr:`pt_w` and :attr:`noise_power`.  Path losses, spreads and the
    residual self-interference power ``omega`` are linear.  ``noise_power_w``
    overrides the density-times-bandwidth noise power when given.
    """

    pt_dbm: float = 10.0
    noise_density_dbm_hz: float = -96.0
    bandwidth_hz: float = 1e6
    n_elements: int = 30
    alpha1: float = 0.1
    alpha2: float = 0.9
    r1_target: float = 1.5
    r2_target: float = 0.5
    omega: float = 0.0
    rho: float = 0.0
    m_ss: float = 3.5
    m_s1: float = 2.0
    m_s2: float = 1.0
    omega_ss: float = 1.0
    omega_s1: float = 1.0
    omega_s2: float = 1.0
    beta_ss: float = 1e-3
    beta_s1: float = 1e-3
    beta_s2: float = 1e-4
    beta_12: float = 10.0 ** -1.5
    noise_power_w: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("pt_dbm", "noise_density_dbm_hz", "bandwidth_hz", "alpha1", "alpha2",
                     "r1_target", "r2_target", "omega", "rho"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if isinstance(self.n_elements, bool) or int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError(f"n_elements must be a positive integer, got {self.n_elements!r}")
        object.__setattr__(self, "n_elements", int(self.n_elements))
        if not (0.0 < self.alpha1 < 1.0 and 0.0 < self.alpha2 < 1.0):
            raise ValueError("alpha1 and alpha2 must lie in (0, 1)")
        if abs(self.alpha1 + self.alpha2 - 1.0) > _ALPHA_TOL:
            raise ValueError(f"alpha1 + alpha2 must equal 1, got {self.alpha1 + self.alpha2!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")
        if self.omega < 0.0:
            raise ValueError("omega (residual SI power) must be nonnegative")
        if self.bandwidth_hz <= 0.0:
            raise ValueError("bandwidth_hz must be positive")
        if self.r1_target < 0.0 or self.r2_target < 0.0:
            raise ValueError("target rates must be nonnegative")
        for name in ("m_ss", "m_s1", "m_s2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.5):
                raise ValueError(f"{name} must be >= 0.5, got {v!r}")
        for name in ("omega_ss", "omega_s1", "omega_s2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        for name in ("beta_ss", "beta_s1", "beta_s2", "beta_12"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")
        if self.noise_power_w is not None and not (math.isfinite(self.noise_power_w) and self.noise_power_w > 0):
            raise ValueError("noise_power_w must be positive when given")
        if not self.noise_power > 0.0:
            raise ValueError("derived noise power must be positive")

    @property
    def pt_w(self) -> float:
        return dbm_to_watts(self.pt_dbm)

    @property
    def noise_power(self) -> float:
        """Total receiver noise power in watts."""
        if self.noise_power_w is not None:
            return self.noise_power_w
        return dbm_to_watts(self.noise_density_dbm_hz) * self.bandwidth_hz

    @property
    def fading(self) -> FadingShape:
        return FadingShape(self.n_elements, self.m_ss, self.m_s1, self.m_s2,
                           self.omega_ss, self.omega_s1, self.omega_s2)


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ValueError(f"Gamma shape must be positive, got {self.shape!r}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"Gamma scale must be positive, got {self.scale!r}")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale * self.scale

    def cdf(self, x):
        """Vectorized CDF (numpy arrays or scalars)."""
        from .special import reg_inc_gamma

        arr = np.asarray(x, dtype=float)
        out = np.array([reg_inc_gamma(self.shape, max(v, 0.0) / self.scale)[0] for v in arr.ravel()])
        out = out.reshape(arr.shape)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ChannelDraw:
    """A single joint fading realization (normalized, before path loss)."""

    x1: float
    h2_sq: float
    h12_sq: float
    hsi_sq: float

    def __post_init__(self) -> None:
        for name in ("x1", "h2_sq", "h12_sq", "hsi_sq"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")


@dataclass
class ChannelBatch:
    """Vectorized draws.  ``hsi_unit`` has unit mean; ``hsi_sq = si_power * hsi_unit``."""

    x1: np.ndarray
    h2_sq: Optional[np.ndarray]
    h12_sq: np.ndarray
    hsi_unit: np.ndarray
    si_power: float = 1.0
    _hsi: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.x1.shape[0])

    @property
    def hsi_sq(self) -> np.ndarray:
        if self._hsi is None:
            self._hsi = self.si_power * self.hsi_unit
        return self._hsi

    def with_si_power(self, omega: float) -> "ChannelBatch":
        return ChannelBatch(self.x1, self.h2_sq, self.h12_sq, self.hsi_unit, float(omega))

    def head(self, n: int) -> "ChannelBatch":
        h2 = None if self.h2_sq is None else self.h2_sq[:n]
        return ChannelBatch(self.x1[:n], h2, self.h12_sq[:n], self.hsi_unit[:n], self.si_power)


def nakagami_mean(m: float, omega: float) -> float:
    """Mean amplitude of a Nakagami-m variable with spread ``omega``."""
    if not (math.isfinite(m) and m >= 0.5):
        raise DomainError(f"Nakagami shape must be >= 0.5, got {m!r}")
    if not (math.isfinite(omega) and omega > 0.0):
        raise DomainError(f"Nakagami spread must be positive, got {omega!r}")
    return math.exp(math.lgamma(m + 0.5) - math.lgamma(m)) * math.sqrt(omega / m)


def gamma_moment(g: GammaParams, m: int) -> float:
    """Raw moment ``E[X**m]`` of ``Gamma(k, theta)``, as ``theta**m * k (k+1) ... (k+m-1)``."""
    if int(m) != m or m < 1:
        raise ValueError(f"moment order must be a positive integer, got {m!r}")
    out = 1.0
    for i in range(int(m)):
        out *= (g.shape + i) * g.scale
    return out


def x1_approximations(p: SystemParams) -> tuple[GammaParams, GammaParams]:
    """Gamma fits for the coherent amplitude and for its square.

    The square's parameters are the moment match on the second and fourth
    raw moments of the amplitude fit.  Written out, with ``k, th`` the
    amplitude fit, that match reduces to ``k1 = k(k+1)/(4k+6)`` and
    ``th1 = th**2 (4k+6)``; the reduced form avoids the cancellation in
    ``m4 - m2**2`` at large N.
    """
    mu_ss = nakagami_mean(p.m_ss, p.omega_ss)
    mu_s1 = nakagami_mean(p.m_s1, p.omega_s1)
    # the fit is written for unit spreads, as in the reference parameter set
    u = (mu_ss * mu_s1) ** 2
    if u >= 1.0:
        raise DomainError(f"degenerate cascade: (mu_ss mu_s1)^2 = {u!r} >= 1")
    k = p.n_elements * u / (1.0 - u)
    theta = (1.0 - u) / math.sqrt(u)
    k1 = k * (k + 1.0) / (4.0 * k + 6.0)
    theta1 = theta * theta * (4.0 * k + 6.0)
    return GammaParams(k, theta), GammaParams(k1, theta1)


def x2_approximations(n_elements: int) -> tuple[float, float]:
    """Rayleigh scale of the incoherent amplitude and mean of its (exponential) square."""
    if int(n_elements) != n_elements or n_elements < 1:
        raise ValueError("n_elements must be a positive integer")
    return math.sqrt(n_elements / 2.0), float(n_elements)


def _nakagami(rng: np.random.Generator, m: float, omega: float, size) -> np.ndarray:
    return np.sqrt(rng.gamma(m, omega / m, size))


def sample_channel_batch(
    fading: FadingShape,
    n: int,
    rng_x1: np.random.Generator,
    rng_x2: Optional[np.random.Generator] = None,
    rng_aux: Optional[np.random.Generator] = None,
    *,
    need_x2: bool = True,
) -> ChannelBatch:
    """Draw ``n`` joint realizations.

    The three generators feed disjoint parts of the realization (D1 cascade,
    D2 magnitudes and phases, D2D and SI gains), so a caller that skips the
    D2 cascade leaves the other two unchanged.  A single generator may be
    passed for all three.
    """
    rng_x2 = rng_x1 if rng_x2 is None else rng_x2
    rng_aux = rng_x1 if rng_aux is None else rng_aux
    size = (n, fading.n_elements)

    hss = _nakagami(rng_x1, fading.m_ss, fading.omega_ss, size)
    hs1 = _nakagami(rng_x1, fading.m_s1, fading.omega_s1, size)
    x1 = np.einsum("ij,ij->i", hss, hs1)

    h2_sq = None
    if need_x2:
        hs2 = _nakagami(rng_x2, fading.m_s2, fading.omega_s2, size)
        ang_s1 = rng_x2.uniform(0.0, 2.0 * np.pi, size)
        ang_s2 = rng_x2.uniform(0.0, 2.0 * np.pi, size)
        # phases cancel those of h_ss and h_s1, leaving angle(h_s2) - angle(h_s1)
        resid = ang_s2 - ang_s1
        amp = hss * hs2
        re = np.einsum("ij,ij->i", amp, np.cos(resid))
        im = np.einsum("ij,ij->i", amp, np.sin(resid))
        h2_sq = re * re + im * im

    h12_sq = rng_aux.standard_exponential(n)
    hsi_unit = rng_aux.standard_exponential(n)
    return ChannelBatch(x1, h2_sq, h12_sq, hsi_unit)


def sample_channel_draw(p: SystemParams, stream: np.random.Generator) -> ChannelDraw:
    """One realization for ``p``; the SI gain is scaled to mean ``p.omega``."""
    b = sample_channel_batch(p.fading, 1, stream).with_si_power(p.omega)
    return ChannelDraw(float(b.x1[0]), float(b.h2_sq[0]), float(b.h12_sq[0]), float(b.hsi_sq[0]))
