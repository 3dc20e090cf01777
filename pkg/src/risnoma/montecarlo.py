"""Direct Monte-Carlo simulation of the physical link model.

Random-stream contract
----------------------
Trials are grouped into fixed blocks of :data:`BLOCK_SIZE`.  Each block owns
three Philox streams keyed by ``(seed, block, group)`` through
``SeedSequence.spawn_key``: group 0 draws the D1 cascade, group 1 the D2
magnitudes and phases, group 2 the D2D and SI gains.  A block is always
drawn in full and truncated afterwards, so trial ``i`` has the same value
regardless of ``n``, of the worker count, and of whether the D2 cascade was
requested.

Per-block statistics (counts and central moments up to order four) are
merged strictly in block order, which keeps results bit-identical across any
degree of parallelism.

The draws are normalized (unit path loss, unit transmit power, unit-mean SI
gain), so every scenario that shares a :class:`~risnoma.channel.FadingShape`
is evaluated on the same realizations.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel import ChannelBatch, ChannelDraw, FadingShape, SystemParams, sample_channel_batch
from .harvest import EhParams, harvested_power
from .link import compute_sinrs, thresholds

__all__ = [
    "BLOCK_SIZE",
    "DEFAULT_TRIALS",
    "LowSampleWarning",
    "MetricEstimate",
    "Moments",
    "ScenarioResult",
    "block_streams",
    "simulate",
    "estimate_outage",
    "estimate_rate",
    "estimate_harvest_stats",
    "trial_draw",
]

BLOCK_SIZE = 4096
DEFAULT_TRIALS = 1_000_000
_GROUPS = 3


class LowSampleWarning(UserWarning):
    """Too few trials for a meaningful spread estimate."""


@dataclass(frozen=True)
class MetricEstimate:
    mean: float
    stderr: float
    n_trials: int


@dataclass(frozen=True)
class Moments:
    """Count, mean and central sums M2..M4 of a sample; merges exactly (Pebay)."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def of(cls, x: np.ndarray) -> "Moments":
        n = int(x.size)
        if n == 0:
            return cls()
        mu = float(x.mean())
        d = x - mu
        d2 = d * d
        return cls(n, mu, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()))

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        dn = delta / n
        mean = self.mean + dn * nb
        m2 = self.m2 + other.m2 + delta * dn * na * nb
        m3 = (self.m3 + other.m3 + delta * dn * dn * na * nb * (na - nb)
              + 3.0 * dn * (na * other.m2 - nb * self.m2))
        m4 = (self.m4 + other.m4 + delta * dn * dn * dn * na * nb * (na * na - na * nb + nb * nb)
              + 6.0 * dn * dn * (na * na * other.m2 + nb * nb * self.m2)
              + 4.0 * dn * (na * other.m3 - nb * self.m3))
        return Moments(n, mean, m2, m3, m4)

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    def mean_estimate(self) -> MetricEstimate:
        if self.n < 2:
            warnings.warn("a single trial gives no spread estimate; stderr set to 0", LowSampleWarning, stacklevel=3)
            return MetricEstimate(self.mean, 0.0, self.n)
        return MetricEstimate(self.mean, math.sqrt(self.variance / self.n), self.n)

    def variance_estimate(self) -> MetricEstimate:
        n = self.n
        if n < 4:
            warnings.warn("fewer than 4 trials; variance stderr set to 0", LowSampleWarning, stacklevel=3)
            return MetricEstimate(self.variance, 0.0, n)
        mu4 = self.m4 / n
        s2 = self.m2 / n
        var_of_var = max(mu4 - s2 * s2 * (n - 3) / (n - 1), 0.0) / n
        return MetricEstimate(self.variance, math.sqrt(var_of_var), n)


@dataclass(frozen=True)
class ScenarioResult:
    """Merged statistics of one scenario over all simulated trials."""

    n: int
    out_d1: int
    out_d2: Optional[int]
    rate_d1: Moments
    rate_d2: Optional[Moments]
    ph: Moments

    def _bernoulli(self, count: int) -> MetricEstimate:
        m = count / self.n
        return MetricEstimate(m, math.sqrt(m * (1.0 - m) / self.n), self.n)

    def outage(self, device: str) -> MetricEstimate:
        if device == "D1":
            return self._bernoulli(self.out_d1)
        if self.out_d2 is None:
            raise ValueError("D2 statistics were not simulated")
        return self._bernoulli(self.out_d2)

    def rate(self, device: str) -> MetricEstimate:
        if device == "D1":
            return self.rate_d1.mean_estimate()
        if self.rate_d2 is None:
            raise ValueError("D2 statistics were not simulated")
        return self.rate_d2.mean_estimate()

    def merge(self, other: "ScenarioResult") -> "ScenarioResult":
        def opt(a, b, f):
            return None if a is None or b is None else f(a, b)

        return ScenarioResult(
            self.n + other.n,
            self.out_d1 + other.out_d1,
            opt(self.out_d2, other.out_d2, int.__add__),
            self.rate_d1.merge(other.rate_d1),
            opt(self.rate_d2, other.rate_d2, Moments.merge),
            self.ph.merge(other.ph),
        )


def block_streams(seed: int, block: int) -> list[np.random.Generator]:
    """The three independent Philox generators owned by ``block``."""
    return [
        np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(block, g))))
        for g in range(_GROUPS)
    ]


def _draw_block(fading: FadingShape, seed: int, block: int, need_x2: bool) -> ChannelBatch:
    rngs = block_streams(seed, block)
    return sample_channel_batch(fading, BLOCK_SIZE, *rngs, need_x2=need_x2)


def _check_device(device: str) -> None:
    if device not in ("D1", "D2"):
        raise ValueError(f"device must be 'D1' or 'D2', got {device!r}")


def _evaluate(p: SystemParams, eh: EhParams, batch: ChannelBatch) -> ScenarioResult:
    d = batch.with_si_power(p.omega)
    th = thresholds(p)
    p_in = p.pt_w * p.beta_ss * p.beta_s1 * d.x1 * d.x1
    ph = harvested_power(eh, p.rho, p_in) if p.rho > 0.0 else np.zeros_like(p_in)
    s = compute_sinrs(p, d, ph)
    x2_ok = s.d1_x2 >= th.gamma_th2
    out1 = ~(x2_ok & (s.d1_x1 >= th.gamma_th))
    out2 = r2 = None
    if s.d2_mrc is not None:
        ev = np.where(x2_ok, s.d2_mrc < th.gamma_th2, s.d2_direct < th.gamma_th2)
        out2 = int(np.count_nonzero(ev))
        r2 = Moments.of(np.log2(1.0 + s.d2_mrc))
    return ScenarioResult(len(d), int(np.count_nonzero(out1)), out2,
                          Moments.of(np.log2(1.0 + s.d1_x1)), r2, Moments.of(ph))


def _run_blocks(args) -> list[list[ScenarioResult]]:
    fading, scenarios, seed, n, blocks, need_x2 = args
    out = []
    for blk in blocks:
        batch = _draw_block(fading, seed, blk, need_x2)
        take = min(BLOCK_SIZE, n - blk * BLOCK_SIZE)
        if take < BLOCK_SIZE:
            batch = batch.head(take)
        out.append([_evaluate(p, eh, batch) for p, eh in scenarios])
    return out


def _chunks(n_blocks: int, parts: int) -> list[range]:
    parts = max(1, min(parts, n_blocks))
    bounds = np.linspace(0, n_blocks, parts + 1).round().astype(int)
    return [range(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def simulate(
    scenarios: Sequence[tuple[SystemParams, EhParams]],
    n: int = DEFAULT_TRIALS,
    seed: int = 0,
    *,
    workers: Optional[int] = None,
    need_d2: bool = True,
) -> list[ScenarioResult]:
    """Simulate ``n`` trials of every scenario on common random numbers.

    Scenarios are grouped by fading shape; within a group each trial's
    channel realization is shared.  ``workers > 1`` evaluates block ranges
    in separate processes without changing any result.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"number of trials must be a positive integer, got {n!r}")
    n = int(n)
    scenarios = list(scenarios)
    n_blocks = -(-n // BLOCK_SIZE)
    groups: dict[FadingShape, list[int]] = {}
    for i, (p, _) in enumerate(scenarios):
        groups.setdefault(p.fading, []).append(i)

    results: list[Optional[ScenarioResult]] = [None] * len(scenarios)
    pool = ProcessPoolExecutor(max_workers=workers) if workers and workers > 1 else None
    try:
        for fading, idx in groups.items():
            members = [scenarios[i] for i in idx]
            tasks = [(fading, members, seed, n, list(r), need_d2)
                     for r in _chunks(n_blocks, (workers or 1) * 4 if pool else 1)]
            parts: Iterable = pool.map(_run_blocks, tasks) if pool else map(_run_blocks, tasks)
            merged: list[Optional[ScenarioResult]] = [None] * len(members)
            for part in parts:
                for per_block in part:
                    for j, r in enumerate(per_block):
                        merged[j] = r if merged[j] is None else merged[j].merge(r)
            for j, i in enumerate(idx):
                results[i] = merged[j]
    finally:
        if pool is not None:
            pool.shutdown()
    return results  # type: ignore[return-value]


def estimate_outage(p: SystemParams, eh: EhParams, device: str, n: int = DEFAULT_TRIALS,
                    seed: int = 0, *, workers: Optional[int] = None) -> MetricEstimate:
    _check_device(device)
    (r,) = simulate([(p, eh)], n, seed, workers=workers, need_d2=device == "D2")
    return r.outage(device)


def estimate_rate(p: SystemParams, eh: EhParams, device: str, n: int = DEFAULT_TRIALS,
                  seed: int = 0, *, workers: Optional[int] = None) -> MetricEstimate:
    """Ergodic rate in bits/s/Hz; stderr is the sample deviation over sqrt(n)."""
    _check_device(device)
    (r,) = simulate([(p, eh)], n, seed, workers=workers, need_d2=device == "D2")
    return r.rate(device)


def estimate_harvest_stats(p: SystemParams, eh: EhParams, n: int = DEFAULT_TRIALS,
                           seed: int = 0, *, workers: Optional[int] = None) -> tuple[MetricEstimate, MetricEstimate]:
    (r,) = simulate([(p, eh)], n, seed, workers=workers, need_d2=False)
    return r.ph.mean_estimate(), r.ph.variance_estimate()


def trial_draw(p: SystemParams, seed: int, index: int) -> ChannelDraw:
    """Reconstruct the realization of trial ``index`` in isolation."""
    if index < 0:
        raise ValueError("trial index must be nonnegative")
    blk, off = divmod(int(index), BLOCK_SIZE)
    b = _draw_block(p.fading, seed, blk, True).with_si_power(p.omega)
    return ChannelDraw(float(b.x1[off]), float(b.h2_sq[off]), float(b.h12_sq[off]), float(b.hsi_sq[off]))
