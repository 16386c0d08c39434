"""
Factorial moment measures and densities of the STINR / SINR processes.

Measures go through the I and J kernels; densities are explicit, and the
partial densities used for order statistics integrate the explicit density
over the trailing coordinates.
"""
import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from config import SIMPLEX_TOL
from errors import DomainError, SimplexViolation, SingularityError
from models import ChannelParams, Estimate, MomentQuery, QmcConfig, QuadConfig
from services.kernels import integral_I, integral_J, noise_ratio
from services.qmc import qmc_integrate

logger = logging.getLogger(__name__)


# ─────────────────────────────────────────────
# Scalar maps
# ─────────────────────────────────────────────

def propagation_constant(lam: float, K: float, beta: float, moment: float) -> float:
    """a = λπE[(PS)^{2/β}]/K²."""
    if not beta > 2:
        raise DomainError(f"path-loss exponent must exceed 2, got {beta}")
    if not (lam > 0 and K > 0 and 0 < moment < math.inf):
        raise DomainError(f"propagation constant needs positive inputs: λ={lam}, K={K}, moment={moment}")
    return lam * math.pi * moment / K ** 2


def stinr_from_sinr(z: float, gamma: float = 1.0) -> float:
    if not z >= 0:
        raise DomainError(f"SINR must be >= 0, got {z}")
    if math.isinf(z):
        return 1.0 / gamma
    return z / (1.0 + gamma * z)


def sinr_from_stinr(z_prime: float, gamma: float = 1.0) -> float:
    if not 0 <= z_prime < 1.0 / gamma:
        raise DomainError(f"STINR must lie in [0, 1/γ), got {z_prime}")
    return z_prime / (1.0 - gamma * z_prime)


def simplex_slack(thresholds: Sequence[float], gamma: float) -> float:
    """1 - γΣt', compensated."""
    return math.fsum([1.0] + [-gamma * t for t in thresholds])


def inside_simplex(thresholds: Sequence[float], gamma: float) -> bool:
    return simplex_slack(thresholds, gamma) > SIMPLEX_TOL


def t_hat(thresholds: Sequence[float], gamma: float) -> tuple:
    slack = simplex_slack(thresholds, gamma)
    if slack <= SIMPLEX_TOL:
        raise SimplexViolation(f"γΣt' >= 1 for thresholds {list(thresholds)}")
    return tuple(gamma * t / slack for t in thresholds)


# ─────────────────────────────────────────────
# Measures
# ─────────────────────────────────────────────

def factorial_moment_stinr(
    q: MomentQuery, p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """M'^{(n)}(t') = n!·∏x̂ᵢ^{-2/β}·I_n((W/γ)a^{-β/2})·J_n(x̂)."""
    if not inside_simplex(q.thresholds, p.gamma):
        return Estimate(0.0, flag="simplex")
    x = t_hat(q.thresholds, p.gamma)
    alpha = p.path_loss.alpha
    scale = math.factorial(q.n) * math.prod(xi ** -alpha for xi in x)
    scale *= integral_I(q.n, p.beta, p.noise_argument, quad)
    return integral_J(p.beta, x, qmc).scaled(scale)


def factorial_moment_sinr(
    n: int, ts: Sequence[float], p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    if any(not t > 0 for t in ts):
        raise DomainError(f"SINR thresholds must be positive: {list(ts)}")
    thresholds = [stinr_from_sinr(t, p.gamma) for t in ts]
    return factorial_moment_stinr(MomentQuery(n, thresholds), p, qmc, quad)


# ─────────────────────────────────────────────
# Densities
# ─────────────────────────────────────────────

def _log_density_constant(n: int, alpha: float) -> float:
    """log c_{n,α,0} = log(α^{n-1}Γ(n) / (Γ(nα)Γ(1-α)^n))."""
    return (n - 1) * math.log(alpha) + gammaln(n) - gammaln(n * alpha) - n * gammaln(1 - alpha)


def density_values(t, p: ChannelParams, quad: Optional[QuadConfig] = None) -> np.ndarray:
    """Vectorized μ'^{(n)} at the rows of an (N, n) array; zero outside the simplex."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    rows, n = t.shape
    alpha = p.path_loss.alpha
    g = p.gamma
    slack = 1.0 - g * t.sum(axis=1)
    out = np.zeros(rows)
    ok = slack > SIMPLEX_TOL
    if ok.any():
        with np.errstate(divide="ignore"):
            log_val = (
                _log_density_constant(n, alpha)
                + n * math.log(g)
                - (alpha + 1) * np.log(g * t[ok]).sum(axis=1)
                + (n * alpha - 1) * np.log(slack[ok])
            )
        out[ok] = np.exp(log_val) * noise_ratio(n, p.beta, p.noise_argument, quad)
    return out


def moment_density(
    n: int, thresholds: Sequence[float], p: ChannelParams, quad: Optional[QuadConfig] = None
) -> float:
    if len(thresholds) != n:
        raise DomainError(f"expected {n} thresholds, got {len(thresholds)}")
    if any(not t > 0 for t in thresholds):
        raise SingularityError(f"density is singular at zero thresholds: {list(thresholds)}")
    if not inside_simplex(thresholds, p.gamma):
        return 0.0
    return float(density_values([list(thresholds)], p, quad)[0])


def integrate_density(
    n: int, lower: Sequence[float], p: ChannelParams,
    qmc: Optional[QmcConfig] = None,
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    quad: Optional[QuadConfig] = None,
) -> Estimate:
    """∫ over ∏(lowerᵢ, 1/γ) of weight(t)·μ'^{(n)}(t) dt.

    The sampling box is trimmed to the simplex: coordinate i never exceeds
    1/γ - Σ_{j≠i} lowerⱼ. Without a weight this is M'^{(n)}(lower).
    """
    lower = np.asarray(lower, dtype=float)
    if len(lower) != n or (lower <= 0).any():
        raise DomainError(f"need {n} positive lower limits, got {lower.tolist()}")
    if not inside_simplex(lower, p.gamma):
        return Estimate(0.0, flag="simplex")
    upper = 1.0 / p.gamma - (lower.sum() - lower)
    width = upper - lower
    volume = float(np.prod(width))

    def integrand(u: np.ndarray) -> np.ndarray:
        t = lower + width * u
        values = density_values(t, p, quad) * volume
        if weight is not None:
            values = values * np.asarray(weight(t), dtype=float)
        return values

    return qmc_integrate(integrand, n, qmc)


def partial_density(
    k: int, i: int, zs: Sequence[float], p: ChannelParams,
    qmc: Optional[QmcConfig] = None, quad: Optional[QuadConfig] = None,
) -> Estimate:
    """μ'_k^{(k+i)}(z): μ'^{(k+i)}(z, ζ) integrated over ζ ∈ (z_k, 1/γ)^i."""
    zs = [float(z) for z in zs]
    if len(zs) != k or k < 1 or i < 0:
        raise DomainError(f"partial density needs k={k} values and i >= 0, got {zs}, i={i}")
    if zs[-1] <= 0 or any(a <= b for a, b in zip(zs, zs[1:])):
        raise DomainError(f"partial density needs z₁ > … > z_k > 0, got {zs}")
    # zero unless z₁+…+z_{k-1}+(i+1)z_k < 1/γ
    if not inside_simplex(zs[:-1] + [(i + 1) * zs[-1]], p.gamma):
        return Estimate(0.0)
    if i == 0:
        return Estimate(moment_density(k, zs, p, quad))

    z_k = zs[-1]
    width = 1.0 / p.gamma - math.fsum(zs) - z_k
    head = np.asarray(zs)
    volume = width ** i

    def integrand(u: np.ndarray) -> np.ndarray:
        zeta = z_k + width * u
        t = np.hstack([np.broadcast_to(head, (len(u), k)), zeta])
        return density_values(t, p, quad) * volume

    return qmc_integrate(integrand, i, qmc)
