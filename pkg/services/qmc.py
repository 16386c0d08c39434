"""
Quasi-Monte Carlo and half-line quadrature engine.

- sobol_points: Sobol point sets (scrambled when a seed is given)
- qmc_integrate: mean over the point set with a batch standard error
- quad_halfline: ∫₀^∞ g via u = s/(1-s) and adaptive Gauss-Kronrod
- combine: linear combination of estimates
"""
import logging
import math
import warnings
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate
from scipy.stats import qmc as scipy_qmc

from config import MAX_SOBOL_DIM
from errors import ConvergenceError, IntegrationError, UnsupportedDimension
from models import Estimate, QmcConfig, QuadConfig

logger = logging.getLogger(__name__)


def sobol_points(dim: int, config: Optional[QmcConfig] = None) -> np.ndarray:
    """Return `config.point_count` Sobol points in [0,1)^dim, shape (N, dim).

    scramble_seed 0 gives the raw sequence (starting at the origin); any other
    seed gives an Owen-scrambled, digitally shifted copy keyed by that seed.
    """
    config = config or QmcConfig()
    if dim < 1:
        raise UnsupportedDimension(f"dimension must be >= 1, got {dim}")
    if dim > MAX_SOBOL_DIM:
        raise UnsupportedDimension(
            f"Sobol dimension {dim} exceeds supported maximum {MAX_SOBOL_DIM}"
        )
    scramble = config.scramble_seed != 0
    sampler = scipy_qmc.Sobol(
        d=dim, scramble=scramble, seed=config.scramble_seed if scramble else None
    )
    with warnings.catch_warnings():
        # balance warning for non power-of-two counts
        warnings.simplefilter("ignore", UserWarning)
        return sampler.random(config.point_count)


def qmc_integrate(
    f: Callable[[np.ndarray], np.ndarray], dim: int, config: Optional[QmcConfig] = None
) -> Estimate:
    """Integrate a vectorized f over [0,1)^dim.

    f receives an (N, dim) array and returns N values.
    """
    config = config or QmcConfig()
    points = sobol_points(dim, config)
    values = np.asarray(f(points), dtype=float)
    if values.shape != (len(points),):
        values = np.broadcast_to(values, (len(points),))

    bad = ~np.isfinite(values)
    if bad.any():
        point = points[np.argmax(bad)]
        raise IntegrationError(
            f"non-finite integrand at {point.tolist()}", point=point.tolist()
        )

    batch_means = values.reshape(config.batch_count, -1).mean(axis=1)
    value = float(values.mean())
    std_error = float(batch_means.std(ddof=1) / math.sqrt(config.batch_count))
    return Estimate(value, std_error)


def quad_halfline(g: Callable[[float], float], config: Optional[QuadConfig] = None) -> float:
    """∫₀^∞ g(u) du after the change u = s/(1-s)."""
    config = config or QuadConfig()

    def mapped(s: float) -> float:
        if s >= 1.0:
            return 0.0
        one_minus = 1.0 - s
        return g(s / one_minus) / one_minus ** 2

    result = integrate.quad(
        mapped, 0.0, 1.0,
        epsabs=config.abs_tol, epsrel=config.rel_tol,
        limit=config.max_refinements, full_output=1,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3:
        raise ConvergenceError(
            f"half-line quadrature did not converge (abserr={abserr:.3g}): {result[3]}",
            estimate=value,
        )
    return float(value)


def combine(terms: Iterable[tuple]) -> Estimate:
    """Σ cᵢ·Eᵢ for (cᵢ, Eᵢ) pairs, errors added in quadrature."""
    value, var = 0.0, 0.0
    for coeff, est in terms:
        value += coeff * est.value
        var += (coeff * est.std_error) ** 2
    return Estimate(value, math.sqrt(var))
