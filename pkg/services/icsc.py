"""
Order statistics of the STINR process and coverage under interference
cancellation (IC) and signal combination (SC).

Every quantity here integrates the joint density of the k strongest STINR
values over a region of the ordered cone. The density is an alternating
sum of partial densities; a positive lower bound on z_k keeps it finite.
Residual events allow z_k → 0 and get their own coordinates
(residual_terms).
"""
import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from config import EXPANSION_MAX_DIM
from errors import BudgetError, DomainError
from models import ChannelParams, Estimate, IcCondition, IcscQuery, QmcConfig, QuadConfig
from services.coverage import single_tier_coverage
from services.kernels import noise_ratio
from services.moments import density_values, partial_density, stinr_from_sinr
from services.qmc import combine, qmc_integrate

logger = logging.getLogger(__name__)

DELTA_KINDS = ("ic", "sc")


def expansion_limit(z_floor: float, k: int, gamma: float) -> int:
    """Largest i strictly below 1/(γ·z_floor) - k; -1 when no term survives."""
    return math.ceil(1.0 / (gamma * z_floor) - k - 1e-12) - 1


def _check_budget(k: int, i_max: int):
    if k + i_max > EXPANSION_MAX_DIM:
        raise BudgetError(
            f"expansion needs {i_max + 1} terms and {k + i_max} dimensions "
            f"(limit {EXPANSION_MAX_DIM}); raise the decoding threshold"
        )


def _clamp(est: Estimate) -> Estimate:
    return Estimate(float(min(max(est.value, 0.0), 1.0)), est.std_error, est.flag)


# ─────────────────────────────────────────────
# Joint density of the k strongest values
# ─────────────────────────────────────────────

def order_stat_density(
    k: int, zs: Sequence[float], p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """f'_{(k)}(z) = Σᵢ (-1)^i/i!·μ'_k^{(k+i)}(z)."""
    zs = [float(z) for z in zs]
    if len(zs) != k:
        raise DomainError(f"expected {k} values, got {zs}")
    if zs[-1] <= 0 or any(a <= b for a, b in zip(zs, zs[1:])):
        return Estimate(0.0)
    i_max = expansion_limit(zs[-1], k, p.gamma)
    if i_max < 0:
        return Estimate(0.0)
    _check_budget(k, i_max)
    terms = [
        ((-1) ** i / math.factorial(i), partial_density(k, i, zs, p, qmc, quad))
        for i in range(i_max + 1)
    ]
    return combine(terms)


def region_terms(
    k: int, event: Callable[[np.ndarray], np.ndarray], p: ChannelParams,
    lo: float, hi: float, i_max: int,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> list:
    """Signed terms (-1)^i/i!·∫ 1(event)·μ'_k^{(k+i)} over lo < z_k < … < z₁ < hi.

    Each term is one (k+i)-dimensional QMC integral: the first k coordinates
    are sorted into z, the remaining i fill ζ ∈ (z_k, 1/γ - Σz).
    """
    if hi <= lo or i_max < 0:
        return []
    _check_budget(k, i_max)
    width = hi - lo
    # sorted uniforms have density k! on the ordered cone
    box = width ** k / math.factorial(k)
    inv_gamma = 1.0 / p.gamma

    terms = []
    for i in range(i_max + 1):
        def integrand(u: np.ndarray, i: int = i) -> np.ndarray:
            z = lo + width * np.sort(u[:, :k], axis=1)[:, ::-1]
            z_k = z[:, -1]
            room = inv_gamma - z.sum(axis=1) - z_k
            keep = event(z) & (room > 0) if i else event(z)
            out = np.zeros(len(u))
            if not keep.any():
                return out
            if i == 0:
                out[keep] = density_values(z[keep], p, quad) * box
                return out
            zeta = z_k[keep, None] + room[keep, None] * u[keep, k:]
            t = np.hstack([z[keep], zeta])
            out[keep] = density_values(t, p, quad) * room[keep] ** i * box
            return out

        est = qmc_integrate(integrand, k + i, qmc).scaled((-1) ** i / math.factorial(i))
        logger.debug(f"region term k={k} i={i}: {est.value:.3e} ± {est.std_error:.1e}")
        terms.append(est)
    return terms


def residual_terms(
    k: int, region: Callable[[np.ndarray], np.ndarray], p: ChannelParams,
    coeff: float, tau_p: float, floor: float, i_max: int,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> list:
    """Signed terms for a region inside {z_k + coeff·(z₁+…+z_{k-1}) > τ'}, k ≥ 2.

    Coordinates are m = z_k, the sum S of the k-1 larger values and their
    split on the simplex. S covers only its event range
    (max((τ'-m)/coeff, (k-1)m), 1/γ - (i+1)m), of width O(m) as m → 0, and
    m = floor + span·w^p with p·α(k-1) ≥ 1 keeps the integrand bounded
    when the floor is zero.
    """
    if k < 2 or not coeff > 0:
        raise DomainError(f"residual expansion needs k >= 2 and coeff > 0, got k={k}, coeff={coeff}")
    if i_max < 0:
        return []
    _check_budget(k, i_max)
    inv_gamma = 1.0 / p.gamma
    power = max(1.0, 1.0 / (p.path_loss.alpha * (k - 1)))
    # unordered larger values → ordered, and the simplex split's volume
    norm = 1.0 / (math.factorial(k - 1) * math.factorial(k - 2))

    terms = []
    for i in range(i_max + 1):
        span = inv_gamma / (k + i) - floor
        if span <= 0:
            break

        def integrand(u: np.ndarray, i: int = i, span: float = span) -> np.ndarray:
            rows = len(u)
            w = u[:, 0]
            m = floor + span * w ** power
            dm = span * power * w ** (power - 1)
            s_lo = np.maximum((tau_p - m) / coeff, (k - 1) * m)
            s_width = np.clip(inv_gamma - (i + 1) * m - s_lo, 0.0, None)
            s = s_lo + s_width * u[:, 1]
            if k > 2:
                cuts = np.sort(u[:, 2:k], axis=1)
                split = np.diff(np.hstack([np.zeros((rows, 1)), cuts, np.ones((rows, 1))]), axis=1)
            else:
                split = np.ones((rows, 1))
            y = s[:, None] * split
            z = np.hstack([-np.sort(-y, axis=1), m[:, None]])
            room = inv_gamma - s - 2 * m
            keep = (m > 0) & (s_width > 0) & (y.min(axis=1) > m) & region(z)
            if i:
                keep &= room > 0
            out = np.zeros(rows)
            if not keep.any():
                return out
            weight = (dm * s_width * s ** (k - 2))[keep] * norm
            if i == 0:
                out[keep] = density_values(z[keep], p, quad) * weight
                return out
            zeta = m[keep, None] + room[keep, None] * u[keep, k:]
            t = np.hstack([z[keep], zeta])
            out[keep] = density_values(t, p, quad) * room[keep] ** i * weight
            return out

        est = qmc_integrate(integrand, k + i, qmc).scaled((-1) ** i / math.factorial(i))
        logger.debug(f"residual term k={k} i={i}: {est.value:.3e} ± {est.std_error:.1e}")
        terms.append(est)
    return terms


def ordered_region_probability(
    k: int, event: Callable[[np.ndarray], np.ndarray], p: ChannelParams,
    lo: float, hi: Optional[float] = None,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """P{lo < Z'_(k) < … < Z'_(1) < hi, event} for a vectorized event on (N, k) arrays."""
    if not lo > 0:
        raise DomainError(f"lower cutoff must be positive, got {lo}")
    hi = 1.0 / p.gamma if hi is None else hi
    terms = region_terms(k, event, p, lo, hi, expansion_limit(lo, k, p.gamma), qmc, quad)
    return combine((1.0, t) for t in terms)


# ─────────────────────────────────────────────
# Residual interference and Δ gains
# ─────────────────────────────────────────────

def residual_coverage(
    k: int, tau: float, p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """Coverage by the k-th strongest signal after cancelling the k-1 stronger ones."""
    if k < 1 or not tau > 0:
        raise DomainError(f"need k >= 1 and tau > 0, got k={k}, tau={tau}")
    g = p.gamma
    if g * tau >= 1:
        alpha = p.path_loss.alpha
        value = noise_ratio(k, p.beta, p.noise_argument, quad) / (
            (g * tau) ** (k * alpha) * math.gamma(1 + k * alpha) * math.gamma(1 - alpha) ** k
        )
        return Estimate(value)
    return icsc_coverage(IcscQuery(k, {k}, tau, tau, IcCondition.NONE), p, qmc, quad)


def _delta_event(kind: str, tau_p: float, gamma: float):
    if kind == "ic":
        return lambda z: z[:, 0] + gamma * tau_p * z[:, 1:].sum(axis=1) > tau_p
    return lambda z: z.sum(axis=1) > tau_p


def delta_terms(
    kind: str, k: int, tau: float, epsilon: float, p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None, extra: int = 0,
) -> list:
    """Signed expansion terms of Δ_IC ("ic") or Δ_SC ("sc"), plus `extra` past the bound."""
    if kind not in DELTA_KINDS:
        raise DomainError(f"kind must be one of {DELTA_KINDS}, got {kind}")
    if not 0 < epsilon:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    g = p.gamma
    tau_p, eps_p = stinr_from_sinr(tau, g), stinr_from_sinr(epsilon, g)
    if tau_p <= eps_p:
        return []
    i_max = expansion_limit(eps_p, k, g) + extra
    return region_terms(k, _delta_event(kind, tau_p, g), p, eps_p, tau_p, i_max, qmc, quad)


def delta_ic(k, tau, epsilon, p, qmc=None, quad=None) -> Estimate:
    return _clamp(combine((1.0, t) for t in delta_terms("ic", k, tau, epsilon, p, qmc, quad)))


def delta_sc(k, tau, epsilon, p, qmc=None, quad=None) -> Estimate:
    return _clamp(combine((1.0, t) for t in delta_terms("sc", k, tau, epsilon, p, qmc, quad)))


# ─────────────────────────────────────────────
# General ICSC coverage
# ─────────────────────────────────────────────

def icsc_predicates(q: IcscQuery, gamma: float):
    """Vectorized (event, gate) on (N, k) arrays of ordered STINR values.

    event: Σ_U z + 1(IC)·γ̄τ'·Σ_{∉U} z > τ'.
    gate:  every assisting signal decodable at ε' (always true for `none`).
    """
    tau_p = stinr_from_sinr(q.tau, gamma)
    eps_p = stinr_from_sinr(q.epsilon, gamma)
    coeff = (gamma if q.gamma_bar is None else q.gamma_bar) * tau_p
    combined = sorted(u - 1 for u in q.combine_set)
    cancelled = [j for j in range(q.k) if j + 1 not in q.combine_set]
    helpers = [u for u in combined if u != q.primary - 1]

    def ic_feasible(z: np.ndarray) -> np.ndarray:
        ok = np.ones(len(z), dtype=bool)
        if q.ic_condition == IcCondition.IIC:
            for j in cancelled:
                ok &= z[:, j] > eps_p
        elif q.ic_condition == IcCondition.SIC:
            decoded = np.zeros(len(z))
            for j in cancelled:
                ok &= z[:, j] + gamma * eps_p * decoded > eps_p
                decoded = decoded + z[:, j]
        return ok

    def gate(z: np.ndarray) -> np.ndarray:
        ok = ic_feasible(z)
        if q.ic_condition != IcCondition.NONE:
            for u in helpers:
                ok &= z[:, u] > eps_p
        return ok

    def event(z: np.ndarray) -> np.ndarray:
        gain = z[:, combined].sum(axis=1)
        if cancelled:
            gain = gain + coeff * ic_feasible(z) * z[:, cancelled].sum(axis=1)
        return gain > tau_p

    return event, gate


def _residual_limit(q: IcscQuery, tau_p: float, gamma: float) -> tuple:
    """(z_floor, i_max) for U = {k}, from the event alone."""
    gamma_bar = gamma if q.gamma_bar is None else q.gamma_bar
    if q.k == 1 or gamma_bar == 0:
        return tau_p, expansion_limit(tau_p, q.k, gamma)
    floor = tau_p * max(0.0, 1.0 - gamma_bar / gamma)
    i_max = math.ceil(1.0 / (gamma_bar * tau_p) - 1 - 1e-12) - 1
    if floor > 0:
        i_max = min(i_max, expansion_limit(floor, q.k, gamma))
    return floor, i_max


def _residual_region_terms(q: IcscQuery, region, p: ChannelParams, tau_p: float, qmc, quad) -> list:
    g = p.gamma
    gamma_bar = g if q.gamma_bar is None else q.gamma_bar
    floor, i_max = _residual_limit(q, tau_p, g)
    if q.k == 1 or gamma_bar == 0:
        return region_terms(q.k, region, p, floor, 1.0 / g, i_max, qmc, quad)
    return residual_terms(q.k, region, p, gamma_bar * tau_p, tau_p, floor, i_max, qmc, quad)


def icsc_coverage(
    q: IcscQuery, p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """P^{(U,k)}(τ), optionally conditioned on SIC/IIC feasibility.

    Under SIC/IIC the user falls back to plain coverage by the primary
    signal Z'_(u₀), u₀ = min U, whenever the gate fails.
    """
    g = p.gamma
    tau_p = stinr_from_sinr(q.tau, g)
    eps_p = stinr_from_sinr(q.epsilon, g)
    event, gate = icsc_predicates(q, g)
    residual = q.combine_set == {q.k}
    u0 = q.primary

    if q.ic_condition == IcCondition.NONE:
        if not residual:
            raise BudgetError(
                f"combining {sorted(q.combine_set)} of {q.k} without a decoding condition "
                "has no finite expansion; request SIC or IIC"
            )
        terms = _residual_region_terms(q, event, p, tau_p, qmc, quad)
        return _clamp(combine((1.0, t) for t in terms))

    fallback = single_tier_coverage(u0, q.tau, p, qmc, quad)
    if u0 == 1:
        if q.ic_condition == IcCondition.SIC and q.k not in q.combine_set:
            floor = eps_p / max(q.k - 1, 1)
        else:
            floor = eps_p
        region = lambda z: gate(z) & event(z)
        terms = region_terms(q.k, region, p, floor, tau_p, expansion_limit(floor, q.k, g), qmc, quad)
    elif residual:
        region = lambda z: gate(z) & event(z) & (z[:, -1] <= tau_p)
        terms = _residual_region_terms(q, region, p, tau_p, qmc, quad)
    else:
        raise BudgetError(
            f"primary signal {u0} below the strongest has no finite expansion unless U = {{k}}"
        )
    return _clamp(combine([(1.0, fallback)] + [(1.0, t) for t in terms]))
