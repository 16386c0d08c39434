"""
Coverage service: symmetric sums Sₙ and everything built from them.

- equivalent_network: multi-tier → single tier with a threshold distribution
- symmetric_sum / k_coverage: inclusion-exclusion over finitely many Sₙ
- coverage_count_distribution: pmf, mean and pgf of the coverage number
- pgf_expansion: finite expansion of the STINR pgf functional
- interference_factor_laplace / coverage_laplace: both sides of the Laplace identity
"""
import dataclasses
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.special import comb, gamma as gamma_fn, gammainc

from config import SIMPLEX_TOL
from errors import DomainError
from models import (
    ChannelParams, EquivalentNetwork, Estimate, NetworkScenario, QmcConfig, QuadConfig, TierSpec,
)
from services.kernels import integral_I, integral_J
from services.moments import factorial_moment_sinr, integrate_density
from services.qmc import combine

logger = logging.getLogger(__name__)

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def equivalent_network(s: NetworkScenario) -> EquivalentNetwork:
    beta = s.path_loss.beta
    parts = [t.lam * t.moment(beta) for t in s.tiers]
    lam_star = sum(parts)
    return EquivalentNetwork(
        lambda_star=lam_star,
        a=math.pi * lam_star / s.path_loss.K ** 2,
        taus=tuple(t.tau for t in s.tiers),
        probs=tuple(x / lam_star for x in parts),
    )


def single_tier_approximation(s: NetworkScenario) -> NetworkScenario:
    """One tier with intensity λ* and the averaged threshold E[T*]."""
    eq = equivalent_network(s)
    tau_mean = sum(p * t for p, t in zip(eq.probs, eq.taus))
    tier = TierSpec(lam=eq.lambda_star, tau=tau_mean, ps_moment=1.0)
    return NetworkScenario((tier,), s.path_loss, s.W, s.gamma)


def max_coverage_number(s: NetworkScenario) -> int:
    """⌈1/(γ·t_min)⌉: no more stations can cover the user simultaneously."""
    t_min = min(t.tau for t in s.tiers)
    return max(1, math.ceil(1.0 / (s.gamma * t_min) - 1e-12))


# ─────────────────────────────────────────────
# Symmetric sums
# ─────────────────────────────────────────────

def single_tier_sum(
    n: int, tau: float, p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """Sₙ = τₙ^{-2n/β} Iₙ J_n(τₙ,…,τₙ), τₙ = γτ/(1-(n-1)γτ)."""
    slack = 1.0 - (n - 1) * p.gamma * tau
    if slack <= SIMPLEX_TOL:
        return Estimate(0.0, flag="simplex")
    tau_n = p.gamma * tau / slack
    scale = tau_n ** (-n * p.path_loss.alpha) * integral_I(n, p.beta, p.noise_argument, quad)
    return integral_J(p.beta, [tau_n] * n, qmc).scaled(scale)


def symmetric_sum(
    n: int, s: NetworkScenario,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """Sₙ, the expected number of n-subsets of covering stations."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if s.is_single_tier:
        return single_tier_sum(n, s.tiers[0].tau, s.channel, qmc, quad)

    eq = equivalent_network(s)
    p = s.channel
    terms = []
    # multisets of tier indices with multinomial weights
    for combo in itertools.combinations_with_replacement(range(len(eq.taus)), n):
        counts = Counter(combo)
        weight = math.factorial(n) / math.prod(math.factorial(c) for c in counts.values())
        weight *= math.prod(eq.probs[j] for j in combo)
        moment = factorial_moment_sinr(n, [eq.taus[j] for j in combo], p, qmc, quad)
        terms.append((weight / math.factorial(n), moment))
    return combine(terms)


def symmetric_sums(
    s: NetworkScenario, qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
    start: int = 1,
) -> dict:
    """{n: Sₙ} for start ≤ n ≤ n_max."""
    return {n: symmetric_sum(n, s, qmc, quad) for n in range(start, max_coverage_number(s) + 1)}


def _clamp(est: Estimate, what: str) -> Estimate:
    value = float(min(max(est.value, 0.0), 1.0))
    if value == est.value:
        return est
    excess = abs(est.value - value)
    flag = est.flag
    if excess > 3 * est.std_error:
        logger.warning(f"{what}: clamped {est.value:.3g} to {value} (σ={est.std_error:.2g})")
        flag = "clamped"
    return Estimate(value, est.std_error, flag)


def bonferroni_partials(
    k: int, s: NetworkScenario, qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> list:
    """Partial sums of the inclusion-exclusion series for P^{(k)}."""
    sums = symmetric_sums(s, qmc, quad, start=k)
    partials, acc = [], []
    for n, sn in sums.items():
        acc.append(((-1) ** (n - k) * comb(n - 1, k - 1, exact=True), sn))
        partials.append(combine(acc))
    return partials


def k_coverage(
    k: int, s: NetworkScenario, qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """P^{(k)} = Σ_{n=k}^{n_max} (-1)^{n-k} C(n-1,k-1) Sₙ."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if k > max_coverage_number(s):
        return Estimate(0.0)
    partials = bonferroni_partials(k, s, qmc, quad)
    return _clamp(partials[-1], f"P^({k})")


def single_tier_coverage(
    k: int, tau: float, p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """P^{(k)}(τ) for a single tier given only its channel."""
    n_max = max(1, math.ceil(1.0 / (p.gamma * tau) - 1e-12))
    if k > n_max:
        return Estimate(0.0)
    terms = [
        ((-1) ** (n - k) * comb(n - 1, k - 1, exact=True), single_tier_sum(n, tau, p, qmc, quad))
        for n in range(k, n_max + 1)
    ]
    return _clamp(combine(terms), f"P^({k})")


# ─────────────────────────────────────────────
# Coverage number
# ─────────────────────────────────────────────

@dataclass
class CoverageCount:
    """Distribution of the coverage number N."""
    pmf: dict
    mean: Estimate
    sums: dict  # {n: Sₙ}, S₀ = 1

    def pgf(self, z: float) -> float:
        """E[z^N] = Σ (z-1)^n Sₙ."""
        return math.fsum((z - 1.0) ** n * sn.value for n, sn in self.sums.items())


def coverage_count_distribution(
    s: NetworkScenario, qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> CoverageCount:
    sums = {0: Estimate(1.0)}
    sums.update(symmetric_sums(s, qmc, quad))
    n_max = max(sums)
    pmf = {}
    for k in range(1, n_max + 1):
        terms = [((-1) ** (n - k) * comb(n, k, exact=True), sums[n]) for n in range(k, n_max + 1)]
        pmf[k] = combine(terms)
    rest = combine([(-1.0, e) for e in pmf.values()])
    pmf[0] = Estimate(1.0 + rest.value, rest.std_error)
    return CoverageCount(pmf=dict(sorted(pmf.items())), mean=sums[1], sums=sums)


def pgf_expansion(
    h: Callable[[np.ndarray], np.ndarray], tau_prime: float, s: NetworkScenario,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """E[∏ h(Z')] over STINR values above τ', by its finite expansion."""
    if not s.is_single_tier:
        raise DomainError("pgf expansion is defined for single-tier scenarios")
    p = s.channel
    if not 0 < tau_prime < 1.0 / p.gamma:
        raise DomainError(f"tau_prime must lie in (0, 1/γ), got {tau_prime}")
    # largest n strictly below 1/(γτ')
    n_max = math.ceil(1.0 / (p.gamma * tau_prime) - 1e-12) - 1

    def weight(t: np.ndarray) -> np.ndarray:
        hv = np.broadcast_to(np.asarray(h(t), dtype=float), t.shape)
        return np.prod(hv - 1.0, axis=1)

    terms = [(1.0, Estimate(1.0))]
    for n in range(1, n_max + 1):
        est = integrate_density(n, [tau_prime] * n, p, qmc, weight=weight, quad=quad)
        terms.append((1.0 / math.factorial(n), est))
    return combine(terms)


# ─────────────────────────────────────────────
# Interference factor
# ─────────────────────────────────────────────

def interference_factor_laplace(xi: float, beta: float) -> float:
    """1/φ_β(ξ), φ_β(ξ) = e^{-ξ} + ξ^{2/β}·γ(1-2/β, ξ)."""
    if not xi > 0:
        raise DomainError(f"xi must be positive, got {xi}")
    if not beta > 2:
        raise DomainError(f"path-loss exponent must exceed 2, got {beta}")
    a = 1.0 - 2.0 / beta
    lower_gamma = gammainc(a, xi) * gamma_fn(a)
    return 1.0 / (math.exp(-xi) + xi ** (2.0 / beta) * lower_gamma)


def coverage_laplace(
    xi: float, s: NetworkScenario, qmc: Optional[QmcConfig] = None,
    quad: Optional[QuadConfig] = None, tail_tol: float = 1e-4,
) -> Estimate:
    """ξ∫₀^∞ P^{(1)}(1/s) e^{-ξs} ds for a single-tier scenario.

    Up to s = γ only one station can cover, so the closed form is integrated
    adaptively. Beyond that, unit panels end where ⌈s/γ⌉ jumps.
    """
    if not s.is_single_tier:
        raise DomainError("coverage Laplace transform needs a single-tier scenario")
    if not xi > 0:
        raise DomainError(f"xi must be positive, got {xi}")
    g = s.gamma
    tier = s.tiers[0]

    def coverage_at(sv: float) -> Estimate:
        scenario = dataclasses.replace(s, tiers=(dataclasses.replace(tier, tau=1.0 / sv),))
        return k_coverage(1, scenario, qmc, quad)

    head, _ = integrate.quad(
        lambda sv: coverage_at(sv).value * math.exp(-xi * sv) if sv > 0 else 0.0, 0.0, g,
    )
    terms = [(xi, Estimate(head))]

    panels = math.ceil(math.log(1.0 / tail_tol) / (xi * g))
    for m in range(1, panels):
        lo, hi = g * m, g * (m + 1)
        for node, w in zip(GL_NODES, GL_WEIGHTS):
            sv = lo + (hi - lo) * (node + 1) / 2
            terms.append((xi * w * (hi - lo) / 2 * math.exp(-xi * sv), coverage_at(sv)))

    s_max = g * panels
    p_end = coverage_at(s_max).value
    # tail ξ∫_{s_max}^∞ P e^{-ξs}ds, P between p_end and 1
    tail = math.exp(-xi * s_max)
    terms.append((1.0, Estimate(tail * (1 + p_end) / 2, tail * (1 - p_end) / 2)))
    return combine(terms)
