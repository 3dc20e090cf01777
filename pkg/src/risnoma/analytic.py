"""Closed-form outage probabilities and ergodic-rate bounds.

Notation shared by the functions below (all in SI units):

* ``s = theta1 * beta_ss * beta_s1`` scales the Gamma(k1, theta1) law of the
  squared coherent cascade into the received D1 channel power per watt;
* ``k_ph, theta_ph`` are the harvested-power Gamma parameters, so that the
  residual self-interference ``|h_SI|^2 P_H`` is treated as exponential with
  mean ``omega * k_ph * theta_ph``.

D1 outage, conditioned on that interference level ``z``, is
``P(k1, xi (sigma2 + z) / s)``.  Averaging over ``z`` gives::

    P(k1, c/s) + exp(c/nu) (nu / (s + nu))**k1 Q(k1, c/s + c/nu)

with ``c = xi sigma2`` and ``nu = xi omega k_ph theta_ph``.  The second term is
evaluated as a single exponential of a log-sum because ``exp(c/nu)`` alone
overflows for weak self-interference.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .channel import SystemParams, x1_approximations
from .harvest import DEFAULT_ZETA_THRESHOLD, EhParams, mean_harvested_power, ph_gamma_approx, validity_zeta
from .link import thresholds
from .special import exp_e1_scaled, exp_upper_inc_gamma_neg1_scaled, log_reg_upper_inc_gamma, reg_inc_gamma

__all__ = [
    "Branch",
    "AnalyticReport",
    "op_d1",
    "op_d2",
    "d2_direct_coop_term",
    "er_d1_upper",
    "er_d2_upper",
    "er_d2_asymptotic",
]

_LN2 = math.log(2.0)


class Branch(enum.Enum):
    DEGENERATE_ONE = "degenerate_one"   # alpha2 <= alpha1*gamma_th2
    NO_ID_POWER = "no_id_power"         # rho = 1, nothing left to decode with
    SI_DOMINATED = "si_dominated"       # self-interference condition forces outage
    RHO0_BRANCH = "rho0_branch"         # no harvesting or no self-interference
    GENERAL_XI1 = "general_xi1"
    GENERAL_XI2 = "general_xi2"
    BOUND = "bound"
    ASYMPTOTIC = "asymptotic"


@dataclass(frozen=True)
class AnalyticReport:
    value: float
    branch: Branch
    validity: bool
    zeta: float = 0.0

    @property
    def region(self) -> str:
        return "I" if self.validity else "II"


def _validity(p: SystemParams, eh: EhParams, threshold: float) -> tuple[float, bool]:
    return validity_zeta(p, eh, threshold)


def _interference_averaged_cdf(k1: float, s: float, xi: float, sigma2: float, si_mean: float) -> float:
    c = xi * sigma2
    p_low, _ = reg_inc_gamma(k1, c / s)
    if si_mean == 0.0:
        return p_low
    nu = xi * si_mean
    log_tail = c / nu + k1 * math.log(nu / (s + nu)) + log_reg_upper_inc_gamma(k1, c / s + c / nu)
    return p_low + math.exp(log_tail)


def _si_mean(p: SystemParams, eh: EhParams, threshold: float) -> float:
    """Mean of the residual self-interference power ``omega * E[P_H]`` (0 when absent)."""
    if p.rho == 0.0 or p.omega == 0.0:
        return 0.0
    return p.omega * ph_gamma_approx(p, eh, threshold).mean


def op_d1(p: SystemParams, eh: EhParams, *, zeta_threshold: float = DEFAULT_ZETA_THRESHOLD) -> AnalyticReport:
    """Outage probability of the near user D1."""
    zeta, ok = _validity(p, eh, zeta_threshold)
    th = thresholds(p)
    if p.alpha2 <= p.alpha1 * th.gamma_th2:
        return AnalyticReport(1.0, Branch.DEGENERATE_ONE, ok, zeta)
    if math.isinf(th.xi1):
        return AnalyticReport(1.0, Branch.NO_ID_POWER, ok, zeta)
    _, x1sq = x1_approximations(p)
    s = x1sq.scale * p.beta_ss * p.beta_s1
    si_mean = _si_mean(p, eh, zeta_threshold)
    if si_mean > 0.0 and x1sq.mean * p.beta_ss * p.beta_s1 / th.xi1 < si_mean:
        return AnalyticReport(1.0, Branch.SI_DOMINATED, ok, zeta)
    xi = max(th.xi1, th.xi2)
    value = _interference_averaged_cdf(x1sq.shape, s, xi, p.noise_power, si_mean)
    if si_mean == 0.0:
        branch = Branch.RHO0_BRANCH
    else:
        branch = Branch.GENERAL_XI1 if th.xi1 >= th.xi2 else Branch.GENERAL_XI2
    return AnalyticReport(value, branch, ok, zeta)


def d2_direct_coop_term(a_coef: float, b_coef: float, gamma2: float) -> float:
    """Probability that both D2 branches fail after D1 decoded x2.

    ``a_coef`` is the normalized direct-link threshold ``sigma2/(Pt b_ss b_s2 N D)``
    and ``b_coef = sigma2/(beta_12 E[P_H])``; both links are exponential.  The
    closed form linearizes the direct-link SINR around ``alpha2 >> alpha1 gamma``.
    """
    t = gamma2 * abs(a_coef - b_coef)
    h = -math.expm1(-t) / t if t > 0.0 else 1.0
    return -math.expm1(-gamma2 * b_coef) - b_coef * gamma2 * math.exp(-gamma2 * min(a_coef, b_coef)) * h


def op_d2(p: SystemParams, eh: EhParams, *, zeta_threshold: float = DEFAULT_ZETA_THRESHOLD) -> AnalyticReport:
    """Outage probability of the far user D2 (direct link plus D1 relaying)."""
    zeta, ok = _validity(p, eh, zeta_threshold)
    th = thresholds(p)
    g2 = th.gamma_th2
    margin = p.alpha2 - p.alpha1 * g2
    if margin <= 0.0:
        return AnalyticReport(1.0, Branch.DEGENERATE_ONE, ok, zeta)
    sigma2 = p.noise_power
    a_coef = sigma2 / (p.pt_w * p.beta_ss * p.beta_s2 * p.n_elements * margin)
    direct_ok = math.exp(-g2 * a_coef)
    if p.rho == 0.0:
        return AnalyticReport(-math.expm1(-g2 * a_coef), Branch.RHO0_BRANCH, ok, zeta)

    mean_ph = ph_gamma_approx(p, eh, zeta_threshold).mean
    b_coef = sigma2 / (p.beta_12 * mean_ph)
    both_fail = d2_direct_coop_term(a_coef, b_coef, g2)
    if math.isinf(th.xi2):
        chi = 1.0
    else:
        _, x1sq = x1_approximations(p)
        s = x1sq.scale * p.beta_ss * p.beta_s1
        chi = _interference_averaged_cdf(x1sq.shape, s, th.xi2, sigma2, p.omega * mean_ph)
    value = both_fail + chi * (1.0 - both_fail - direct_ok)
    return AnalyticReport(value, Branch.GENERAL_XI2, ok, zeta)


def er_d1_upper(p: SystemParams, eh: EhParams, *, zeta_threshold: float = DEFAULT_ZETA_THRESHOLD) -> AnalyticReport:
    """Jensen upper bound on D1's ergodic rate in bits/s/Hz."""
    zeta, ok = _validity(p, eh, zeta_threshold)
    _, x1sq = x1_approximations(p)
    sigma2 = p.noise_power
    si_mean = _si_mean(p, eh, zeta_threshold)
    if si_mean == 0.0:
        inv_interference = 1.0 / sigma2
    else:
        # E[1/(Z + sigma2)] for Z exponential with mean si_mean
        inv_interference = exp_e1_scaled(sigma2 / si_mean) / si_mean
    snr = p.beta_ss * p.beta_s1 * x1sq.mean * (1.0 - p.rho) * p.pt_w * p.alpha1 * inv_interference
    return AnalyticReport(math.log2(1.0 + snr), Branch.BOUND, ok, zeta)


def er_d2_upper(p: SystemParams, eh: EhParams, *, zeta_threshold: float = DEFAULT_ZETA_THRESHOLD) -> AnalyticReport:
    """Upper bound on D2's ergodic rate with MRC of the direct and relayed links."""
    zeta, ok = _validity(p, eh, zeta_threshold)
    sigma2 = p.noise_power
    s = sigma2 / (p.n_elements * p.beta_ss * p.beta_s2 * p.pt_w * p.alpha1)
    direct = (p.alpha2 / p.alpha1) * s * exp_upper_inc_gamma_neg1_scaled(s)
    coop = 0.0 if p.rho == 0.0 else mean_harvested_power(p, eh, zeta_threshold) * p.beta_12 / sigma2
    return AnalyticReport(math.log2(1.0 + direct + coop), Branch.BOUND, ok, zeta)


def er_d2_asymptotic(p: SystemParams, eh: EhParams) -> float:
    """D2's ergodic-rate bound as the transmit power grows without limit.

    With harvesting the relayed link saturates at ``p_th``; under the linear
    benchmark it keeps growing, so the limit is infinite.
    """
    ratio = p.alpha2 / p.alpha1
    base = math.log2(1.0 + ratio)
    if p.rho == 0.0:
        return base
    if eh.model == "linear":
        return math.inf
    x = p.noise_power * (1.0 + ratio) / (eh.p_th * p.beta_12)
    return base + exp_e1_scaled(x) / _LN2
