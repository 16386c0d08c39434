"""
Special integrals behind the factorial moment measures.

- c_prime(β) = Γ(1-2/β)Γ(1+2/β)
- integral_I: noise kernel I_{n,β}(x), 1-D quadrature
- integral_J: simplex kernel J_{n,β}(x₁..xₙ), QMC over [0,1)^{n-1}
- integral_J2_closed / integral_J_beta_mc: independent forms of J for cross-checks
"""
import functools
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.special import beta as beta_fn, gamma as gamma_fn, hyp2f1

from errors import DomainError, EvaluationError
from models import Estimate, QmcConfig, QuadConfig
from services.qmc import qmc_integrate, quad_halfline

logger = logging.getLogger(__name__)


def _check_beta(beta: float):
    if not beta > 2:
        raise DomainError(f"path-loss exponent must exceed 2, got {beta}")


def c_prime(beta: float) -> float:
    _check_beta(beta)
    return 2 * math.pi / (beta * math.sin(2 * math.pi / beta))


def integral_I_at_zero(n: int, beta: float) -> float:
    """I_{n,β}(0) = 2^{n-1} / (β^{n-1} C'(β)^n)."""
    return 2.0 ** (n - 1) / (beta ** (n - 1) * c_prime(beta) ** n)


@functools.lru_cache(maxsize=4096)
def noise_ratio(n: int, beta: float, x: float, quad: Optional[QuadConfig] = None) -> float:
    """Ī_{n,β}(x) = I_{n,β}(x) / I_{n,β}(0); equals 1 at x = 0."""
    _check_beta(beta)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if x < 0:
        raise DomainError(f"noise argument must be >= 0, got {x}")
    if x == 0:
        return 1.0
    c = x * gamma_fn(1 - 2 / beta) ** (-beta / 2)
    # ∫ u^{2n-1} e^{-u²} du = Γ(n)/2
    norm = math.gamma(n) / 2

    def integrand(u: float) -> float:
        if u > 50.0:
            return 0.0
        return u ** (2 * n - 1) * math.exp(-u * u - c * u ** beta) / norm

    return quad_halfline(integrand, quad)


def integral_I(n: int, beta: float, x: float, quad: Optional[QuadConfig] = None) -> float:
    return integral_I_at_zero(n, beta) * noise_ratio(n, beta, float(x), quad)


def eta_from_v(v) -> np.ndarray:
    """Map v ∈ [0,1]^{n-1} to η on the unit simplex.

    η₁ = v₁⋯v_{n-1}, ηᵢ = (1-v_{i-1})·vᵢ⋯v_{n-1}, ηₙ = 1-v_{n-1}.
    Accepts one vector or an (N, n-1) array.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    v = np.atleast_2d(v)
    rows, m = v.shape
    # suffix[:, i] = v_i ⋯ v_{m-1}, suffix[:, m] = 1
    suffix = np.ones((rows, m + 1))
    if m:
        suffix[:, :m] = np.cumprod(v[:, ::-1], axis=1)[:, ::-1]
    eta = np.empty((rows, m + 1))
    eta[:, 0] = suffix[:, 0]
    eta[:, 1:] = (1.0 - v) * suffix[:, 1:]
    return eta[0] if single else eta


def _j_weight(v: np.ndarray, alpha: float) -> np.ndarray:
    i = np.arange(1, v.shape[1] + 1)
    return np.prod(v ** (i * (alpha + 1) - 1) * (1 - v) ** alpha, axis=1)


def integral_J(beta: float, xs: Sequence[float], qmc: Optional[QmcConfig] = None) -> Estimate:
    """J_{n,β}(x) = ((1+Σx)/n) ∫ ∏vᵢ^{i(2/β+1)-1}(1-vᵢ)^{2/β} / ∏(xᵢ+ηᵢ) dv."""
    _check_beta(beta)
    x = np.asarray(xs, dtype=float)
    n = len(x)
    if n < 1 or (x < 0).any():
        raise DomainError(f"J needs n >= 1 non-negative arguments, got {list(xs)}")
    if n == 1:
        return Estimate(1.0)
    if (x == 0).any():
        logger.debug(f"J_{n} with zero argument {x.tolist()}: expect a large std_error")
    alpha = 2.0 / beta
    prefactor = (1.0 + x.sum()) / n

    def integrand(v: np.ndarray) -> np.ndarray:
        eta = eta_from_v(v)
        return _j_weight(v, alpha) / np.prod(x + eta, axis=1)

    return qmc_integrate(integrand, n - 1, qmc).scaled(prefactor)


def _j2_half(x: float, alpha: float) -> float:
    """∫₀¹ v^α(1-v)^α/(x+v) dv via ₂F₁."""
    value = beta_fn(alpha + 1, alpha + 1) * hyp2f1(1, alpha + 1, 2 * (alpha + 1), -1.0 / x) / x
    if not math.isfinite(value):
        raise EvaluationError(f"hypergeometric evaluation failed at x={x}")
    return float(value)


def integral_J2_closed(beta: float, x1: float, x2: float) -> float:
    _check_beta(beta)
    if not (x1 > 0 and x2 > 0):
        raise DomainError(f"closed-form J₂ needs positive arguments, got ({x1}, {x2})")
    alpha = 2.0 / beta
    return 0.5 * (_j2_half(x1, alpha) + _j2_half(x2, alpha))


def integral_J_beta_mc(
    beta: float, xs: Sequence[float], sample_count: int = 100_000, seed: int = 0
) -> Estimate:
    """J_{n,β} through independent beta variables.

    vᵢ ~ Beta(i(2/β+1), 2/β+1) turns the weight of integral_J into a density,
    so J = (1/n)·E[(1+Σx)/∏(xᵢ+ηᵢ)]·∏B(1+2/β, i(2/β+1)).
    """
    _check_beta(beta)
    x = np.asarray(xs, dtype=float)
    n = len(x)
    if n < 1 or (x < 0).any():
        raise DomainError(f"J needs n >= 1 non-negative arguments, got {list(xs)}")
    if n == 1:
        return Estimate(1.0)
    alpha = 2.0 / beta
    rng = np.random.default_rng(seed)
    i = np.arange(1, n)
    v = rng.beta(i * (alpha + 1), alpha + 1, size=(sample_count, n - 1))
    h = (1.0 + x.sum()) / np.prod(x + eta_from_v(v), axis=1)
    norm = float(np.prod(beta_fn(1 + alpha, i * (alpha + 1)))) / n
    return Estimate(
        float(h.mean()) * norm,
        float(h.std(ddof=1) / math.sqrt(sample_count)) * norm,
    )
