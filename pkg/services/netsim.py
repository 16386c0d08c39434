"""
Monte Carlo Poisson-network simulator, the independent oracle for every
analytic quantity.

Trials are generated in fixed-size chunks, each chunk with its own
substream SeedSequence([seed, chunk]); results do not depend on the
thread count. Stations are drawn in a disk; the power of those beyond it
enters every trial through its mean.
"""
import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from config import SIM_CHUNK_TRIALS, THREADS
from errors import DomainError
from models import Estimate, IcCondition, IcscQuery, NetworkScenario, SimConfig
from services.icsc import DELTA_KINDS, icsc_predicates
from services.moments import stinr_from_sinr

logger = logging.getLogger(__name__)


@dataclass
class SimBatch:
    top: np.ndarray             # (trials, top_k) STINR, descending, 0 where absent
    top_tier: np.ndarray        # (trials, top_k) tier index, -1 where absent
    total_power: np.ndarray     # (trials,) I = ΣY⁻¹, plus the far-field mean when enabled
    station_count: np.ndarray   # (trials,)
    coverage_count: np.ndarray  # (trials,) stations above their own tier threshold
    gamma: float
    W: float

    @property
    def trials(self) -> int:
        return len(self.top)

    @property
    def top_k(self) -> int:
        return self.top.shape[1]

    def require(self, k: int):
        if k > self.top_k:
            raise DomainError(f"need the {k} strongest values, batch keeps {self.top_k}")


def far_field_power(s: NetworkScenario, radius: float) -> float:
    """Mean power received from stations beyond the disk.

    Σⱼ 2πλⱼPⱼE[Sⱼ]·K^{-β}R^{2-β}/(β-2); its fluctuation around the mean
    shrinks like R^{1-β}.
    """
    beta, K = s.path_loss.beta, s.path_loss.K
    mean_ps = sum(t.lam * t.power * t.fading.moment(1.0) for t in s.tiers)
    return 2 * math.pi * mean_ps * K ** -beta * radius ** (2 - beta) / (beta - 2)


def _simulate_chunk(s: NetworkScenario, cfg: SimConfig, chunk: int, trials: int) -> tuple:
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, chunk]))
    R, beta, K = cfg.region_radius, s.path_loss.beta, s.path_loss.K

    owners, y_inv, tier_of = [], [], []
    for j, tier in enumerate(s.tiers):
        counts = rng.poisson(tier.lam * math.pi * R * R, size=trials)
        total = int(counts.sum())
        r = R * np.sqrt(1.0 - rng.random(total))  # uniform in the disk, r > 0
        fading = tier.fading.sample(rng, total)
        owners.append(np.repeat(np.arange(trials), counts))
        y_inv.append(tier.power * fading / (K * r) ** beta)
        tier_of.append(np.full(total, j))
    owner = np.concatenate(owners)
    y_inv = np.concatenate(y_inv)
    tier_of = np.concatenate(tier_of)

    power = np.bincount(owner, weights=y_inv, minlength=trials)
    if cfg.far_field:
        power += far_field_power(s, R)
    stations = np.bincount(owner, minlength=trials)
    stinr = y_inv / (s.W + s.gamma * power[owner])
    with np.errstate(divide="ignore"):
        sinr = y_inv / (s.W + s.gamma * (power[owner] - y_inv))
    taus = np.array([t.tau for t in s.tiers])
    above = (sinr > taus[tier_of]).astype(float)
    covered = np.bincount(owner, weights=above, minlength=trials).astype(int)

    # per-trial ranking by descending STINR
    order = np.lexsort((-stinr, owner))
    starts = np.concatenate([[0], np.cumsum(stations)[:-1]])
    rank = np.arange(len(order)) - np.repeat(starts, stations)
    keep = rank < cfg.top_k
    top = np.zeros((trials, cfg.top_k))
    top_tier = np.full((trials, cfg.top_k), -1)
    rows, cols = owner[order][keep], rank[keep]
    top[rows, cols] = stinr[order][keep]
    top_tier[rows, cols] = tier_of[order][keep]
    return top, top_tier, power, stations, covered


def simulate(s: NetworkScenario, cfg: Optional[SimConfig] = None, threads: int = THREADS) -> SimBatch:
    cfg = cfg or SimConfig()
    started = time.monotonic()
    sizes = [min(SIM_CHUNK_TRIALS, cfg.trials - c) for c in range(0, cfg.trials, SIM_CHUNK_TRIALS)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(lambda a: _simulate_chunk(s, cfg, *a), enumerate(sizes)))
    top, top_tier, power, stations, covered = (np.concatenate(x) for x in zip(*parts))
    logger.info(f"Simulated {cfg.trials} trials in {time.monotonic() - started:.1f}s")
    return SimBatch(top, top_tier, power, stations, covered, s.gamma, s.W)


# ─────────────────────────────────────────────
# Estimators
# ─────────────────────────────────────────────

def _fraction(hits: np.ndarray) -> Estimate:
    p = float(np.mean(hits))
    return Estimate(p, math.sqrt(p * (1 - p) / len(hits)))


def _mean(values: np.ndarray) -> Estimate:
    values = np.asarray(values, dtype=float)
    err = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return Estimate(float(values.mean()), err)


def empirical_coverage(b: SimBatch, k: int, tau: float, gamma: Optional[float] = None) -> Estimate:
    """Fraction of trials whose k-th strongest STINR exceeds τ/(1+γτ)."""
    b.require(k)
    tau_p = stinr_from_sinr(tau, b.gamma if gamma is None else gamma)
    return _fraction(b.top[:, k - 1] > tau_p)


def coverage_numbers(b: SimBatch, taus: Optional[Sequence[float]] = None) -> np.ndarray:
    """Per-trial coverage number; with `taus` it is recounted from the retained values."""
    if taus is None:
        return b.coverage_count
    gamma = b.gamma
    thresholds = np.asarray([stinr_from_sinr(t, gamma) for t in taus])
    present = b.top_tier >= 0
    limit = np.where(present, thresholds[np.clip(b.top_tier, 0, None)], np.inf)
    counts = (b.top > limit).sum(axis=1)
    if (counts == b.top_k).any():
        logger.warning(f"top_k={b.top_k} may truncate coverage numbers")
    return counts


def empirical_tier_coverage(b: SimBatch, k: int, taus: Optional[Sequence[float]] = None) -> Estimate:
    """Fraction of trials with at least k stations above their tier thresholds."""
    return _fraction(coverage_numbers(b, taus) >= k)


def empirical_count_pmf(b: SimBatch, k: int, taus: Optional[Sequence[float]] = None) -> Estimate:
    return _fraction(coverage_numbers(b, taus) == k)


def empirical_moment(
    b: SimBatch, n: int, thresholds: Sequence[float], gamma: Optional[float] = None
) -> Estimate:
    """Mean number of ordered distinct n-tuples of stations above (t'₁..t'ₙ)."""
    b.require(n)
    if len(thresholds) != n:
        raise DomainError(f"expected {n} thresholds, got {len(thresholds)}")
    gamma = b.gamma if gamma is None else gamma
    if math.fsum([1.0] + [-gamma * t for t in thresholds]) <= 0:
        return Estimate(0.0, flag="simplex")
    ts = sorted(thresholds, reverse=True)
    counts = np.ones(b.trials)
    for j, t in enumerate(ts):
        above = (b.top > t).sum(axis=1)
        if j == n - 1 and (above == b.top_k).any():
            logger.warning(f"top_k={b.top_k} may truncate counts above {t:.3g}")
        counts *= np.clip(above - j, 0, None)
    return _mean(counts)


def empirical_icsc(b: SimBatch, q: IcscQuery, gamma: Optional[float] = None) -> Estimate:
    b.require(q.k)
    gamma = b.gamma if gamma is None else gamma
    z = b.top[:, :q.k]
    event, gate = icsc_predicates(q, gamma)
    if q.ic_condition == IcCondition.NONE:
        return _fraction(event(z))
    fallback = z[:, q.primary - 1] > stinr_from_sinr(q.tau, gamma)
    return _fraction(fallback | (gate(z) & event(z)))


def empirical_delta(
    b: SimBatch, kind: str, k: int, tau: float, epsilon: float, gamma: Optional[float] = None
) -> Estimate:
    """Fraction of trials in the Δ_IC / Δ_SC event: all k strongest in (ε', τ'], gain > τ'."""
    if kind not in DELTA_KINDS:
        raise DomainError(f"kind must be one of {DELTA_KINDS}, got {kind}")
    b.require(k)
    gamma = b.gamma if gamma is None else gamma
    tau_p, eps_p = stinr_from_sinr(tau, gamma), stinr_from_sinr(epsilon, gamma)
    z = b.top[:, :k]
    inside = (z[:, 0] <= tau_p) & (z[:, -1] > eps_p)
    if kind == "ic":
        gain = z[:, 0] + gamma * tau_p * z[:, 1:].sum(axis=1)
    else:
        gain = z.sum(axis=1)
    return _fraction(inside & (gain > tau_p))


def write_batch_csv(b: SimBatch, stream: TextIO):
    writer = csv.writer(stream)
    writer.writerow(["trial_id"] + [f"z{i + 1}" for i in range(b.top_k)] + ["station_count"])
    for trial, (row, count) in enumerate(zip(b.top, b.station_count)):
        writer.writerow([trial] + [repr(float(v)) for v in row] + [int(count)])
