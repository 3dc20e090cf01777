"""Outage, ergodic-rate and harvested-power engine for a surface-assisted
cooperative full-duplex SWIPT-NOMA downlink, with closed forms and a
Monte-Carlo reference."""

from .analytic import AnalyticReport, Branch, er_d1_upper, er_d2_asymptotic, er_d2_upper, op_d1, op_d2
from .channel import ChannelDraw, GammaParams, SystemParams
from .harvest import EhParams, harvested_power, mean_harvested_power, ph_gamma_approx, validity_zeta
from .montecarlo import MetricEstimate, estimate_harvest_stats, estimate_outage, estimate_rate

__all__ = [
    "AnalyticReport", "Branch", "ChannelDraw", "EhParams", "GammaParams", "MetricEstimate", "SystemParams",
    "er_d1_upper", "er_d2_asymptotic", "er_d2_upper", "estimate_harvest_stats", "estimate_outage",
    "estimate_rate", "harvested_power", "mean_harvested_power", "op_d1", "op_d2", "ph_gamma_approx",
    "validity_zeta",
]
