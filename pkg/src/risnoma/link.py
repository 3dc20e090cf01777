"""Per-realization SINR chain and decoding thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import SystemParams

__all__ = ["Thresholds", "SinrBundle", "thresholds", "compute_sinrs"]


@dataclass(frozen=True)
class Thresholds:
    """SINR targets and the normalized thresholds the outage formulas use.

    ``xi1`` / ``xi2`` are ``math.inf`` when no information power is left
    (``rho = 1``) or, for ``xi2``, when the far user's message can never be
    decoded at D1 (``alpha2 <= alpha1 * gamma_th2``).
    """

    gamma_th: float
    gamma_th2: float
    xi1: float
    xi2: float

    @property
    def x2_infeasible(self) -> bool:
        return math.isinf(self.xi2)


def thresholds(p: SystemParams) -> Thresholds:
    g1 = 2.0 ** p.r1_target - 1.0
    g2 = 2.0 ** p.r2_target - 1.0
    id_power = p.pt_w * (1.0 - p.rho)
    xi1 = g1 / (id_power * p.alpha1) if id_power > 0.0 else math.inf
    margin = p.alpha2 - p.alpha1 * g2
    xi2 = g2 / (id_power * margin) if (id_power > 0.0 and margin > 0.0) else math.inf
    return Thresholds(g1, g2, xi1, xi2)


@dataclass
class SinrBundle:
    """SINRs of one realization or of a batch (scalars or equal-length arrays).

    The D2 fields are ``None`` when the draw carries no D2 cascade.
    """

    d1_x2: np.ndarray
    d1_x1: np.ndarray
    d2_direct: Optional[np.ndarray]
    d2_coop: np.ndarray
    d2_mrc: Optional[np.ndarray]


def compute_sinrs(p: SystemParams, d, ph) -> SinrBundle:
    """SINRs for draw(s) ``d`` (attributes ``x1``, ``h2_sq``, ``h12_sq``, ``hsi_sq``) and harvested power ``ph``."""
    sigma2 = p.noise_power
    pt = p.pt_w
    x1 = np.asarray(d.x1, dtype=float)
    h1 = p.beta_ss * p.beta_s1 * x1 * x1
    ph = np.asarray(ph, dtype=float)
    interference = np.asarray(d.hsi_sq, dtype=float) * ph + sigma2
    sig1 = h1 * (1.0 - p.rho) * pt
    d1_x2 = sig1 * p.alpha2 / (sig1 * p.alpha1 + interference)
    d1_x1 = sig1 * p.alpha1 / interference
    d2_coop = ph * (p.beta_12 * np.asarray(d.h12_sq, dtype=float)) / sigma2

    d2_direct = d2_mrc = None
    if d.h2_sq is not None:
        h2 = p.beta_ss * p.beta_s2 * np.asarray(d.h2_sq, dtype=float)
        sig2 = h2 * pt
        d2_direct = sig2 * p.alpha2 / (sig2 * p.alpha1 + sigma2)
        d2_mrc = d2_direct + d2_coop
    return SinrBundle(d1_x2, d1_x1, d2_direct, d2_coop, d2_mrc)
