"""
Shared enums and domain records.

Every record is immutable and validates itself on construction; services
receive already-checked inputs.
"""
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import gamma as gamma_fn

from config import (
    QMC_POINTS, QMC_SEED, QMC_BATCHES,
    QUAD_ABS_TOL, QUAD_REL_TOL, QUAD_MAX_REFINEMENTS,
    SIM_RADIUS, SIM_TRIALS, SIM_SEED, SIM_TOP_K, SIM_FAR_FIELD,
)
from errors import DomainError


# --- Enums ---

class FadingKind(str, enum.Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"
    LOGNORMAL = "lognormal"


class IcCondition(str, enum.Enum):
    NONE = "none"
    SIC = "sic"
    IIC = "iic"


class Quantity(str, enum.Enum):
    K_COVERAGE = "k_coverage"
    DELTA_IC = "delta_ic"
    DELTA_SC = "delta_sc"
    RESIDUAL = "residual"
    PMF = "pmf"


# --- Integration settings ---

@dataclass(frozen=True)
class QmcConfig:
    point_count: int = QMC_POINTS
    scramble_seed: int = QMC_SEED  # 0 = unscrambled
    batch_count: int = QMC_BATCHES

    def __post_init__(self):
        if self.point_count < 16:
            raise DomainError(f"point_count must be >= 16, got {self.point_count}")
        if self.batch_count < 2 or self.point_count % self.batch_count:
            raise DomainError(
                f"batch_count {self.batch_count} must be >= 2 and divide {self.point_count}"
            )
        if self.scramble_seed < 0:
            raise DomainError("scramble_seed must be unsigned")


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = QUAD_ABS_TOL
    rel_tol: float = QUAD_REL_TOL
    max_refinements: int = QUAD_MAX_REFINEMENTS

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v}")
        if self.max_refinements < 1:
            raise DomainError("max_refinements must be positive")


@dataclass(frozen=True)
class Estimate:
    """A numerical result with its standard error; `flag` marks special rows."""
    value: float
    std_error: float = 0.0
    flag: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "std_error", float(self.std_error))
        if not math.isfinite(self.value):
            raise DomainError(f"estimate value must be finite, got {self.value}")
        if not (self.std_error >= 0):
            raise DomainError(f"std_error must be >= 0, got {self.std_error}")

    def scaled(self, c: float) -> "Estimate":
        return Estimate(c * self.value, abs(c) * self.std_error, self.flag)

    def __add__(self, other: "Estimate") -> "Estimate":
        return Estimate(
            self.value + other.value,
            math.hypot(self.std_error, other.std_error),
            self.flag or other.flag,
        )


# --- Network model ---

@dataclass(frozen=True)
class PathLossParams:
    beta: float
    K: float = 1.0

    def __post_init__(self):
        if not self.beta > 2:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.beta}")
        if not self.K > 0:
            raise DomainError(f"path-loss constant must be positive, got {self.K}")

    @property
    def alpha(self) -> float:
        return 2.0 / self.beta


@dataclass(frozen=True)
class ChannelParams:
    path_loss: PathLossParams
    W: float = 0.0
    gamma: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        if not self.W >= 0:
            raise DomainError(f"noise power must be >= 0, got {self.W}")
        if not 0 < self.gamma <= 1:
            raise DomainError(f"interference factor must lie in (0,1], got {self.gamma}")
        if not self.a > 0:
            raise DomainError(f"propagation constant must be positive, got {self.a}")

    @property
    def beta(self) -> float:
        return self.path_loss.beta

    @property
    def noise_argument(self) -> float:
        """(W/γ)·a^{-β/2}, the argument of the noise kernel."""
        return (self.W / self.gamma) * self.a ** (-self.beta / 2)


@dataclass(frozen=True)
class MomentQuery:
    n: int
    thresholds: tuple

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if self.n < 1 or len(self.thresholds) != self.n:
            raise DomainError(f"need n >= 1 thresholds, got n={self.n}, {self.thresholds}")
        if any(not t > 0 for t in self.thresholds):
            raise DomainError(f"STINR thresholds must be positive: {self.thresholds}")


@dataclass(frozen=True)
class FadingSpec:
    kind: FadingKind = FadingKind.CONSTANT
    mean: float = 1.0
    sigma_db: float = 0.0  # lognormal only

    def __post_init__(self):
        object.__setattr__(self, "kind", FadingKind(self.kind))
        if not self.mean > 0:
            raise DomainError(f"fading mean must be positive, got {self.mean}")
        if self.sigma_db < 0:
            raise DomainError(f"sigma_db must be >= 0, got {self.sigma_db}")

    @property
    def log_params(self) -> tuple:
        """(μ, σ) of the underlying normal, normalized so that E[S] = mean."""
        sigma = self.sigma_db * math.log(10) / 10
        return math.log(self.mean) - sigma ** 2 / 2, sigma

    def moment(self, order: float) -> float:
        """E[S^order] in closed form."""
        if self.kind == FadingKind.CONSTANT:
            return self.mean ** order
        if self.kind == FadingKind.EXPONENTIAL:
            return self.mean ** order * float(gamma_fn(1 + order))
        mu, sigma = self.log_params
        return math.exp(order * mu + (order * sigma) ** 2 / 2)

    def sample(self, rng, size):
        if self.kind == FadingKind.CONSTANT:
            return np.full(size, self.mean)
        if self.kind == FadingKind.EXPONENTIAL:
            return rng.exponential(self.mean, size)
        mu, sigma = self.log_params
        return rng.lognormal(mu, sigma, size)


@dataclass(frozen=True)
class TierSpec:
    lam: float
    tau: float
    power: float = 1.0
    fading: FadingSpec = field(default_factory=FadingSpec)
    ps_moment: Optional[float] = None  # E[(PS)^{2/β}] override

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"tier intensity must be positive, got {self.lam}")
        if not self.tau > 0:
            raise DomainError(f"tier threshold must be positive, got {self.tau}")
        if not self.power > 0:
            raise DomainError(f"tier power must be positive, got {self.power}")
        if self.ps_moment is not None and not (0 < self.ps_moment < math.inf):
            raise DomainError(f"ps_moment must be positive and finite, got {self.ps_moment}")

    def moment(self, beta: float) -> float:
        if self.ps_moment is not None:
            return self.ps_moment
        alpha = 2.0 / beta
        return self.power ** alpha * self.fading.moment(alpha)


@dataclass(frozen=True)
class NetworkScenario:
    tiers: tuple
    path_loss: PathLossParams
    W: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        if not self.tiers:
            raise DomainError("a scenario needs at least one tier")
        taus = [t.tau for t in self.tiers]
        if len(set(taus)) != len(taus):
            raise DomainError(f"tier thresholds must be pairwise distinct: {taus}")
        self.channel  # validates W and gamma

    @property
    def channel(self) -> ChannelParams:
        lam_star = sum(t.lam * t.moment(self.path_loss.beta) for t in self.tiers)
        a = math.pi * lam_star / self.path_loss.K ** 2
        return ChannelParams(self.path_loss, self.W, self.gamma, a)

    @property
    def is_single_tier(self) -> bool:
        return len(self.tiers) == 1

    def with_threshold(self, tier: int, tau: float) -> "NetworkScenario":
        """Copy with one tier's threshold replaced.

        A value equal to another tier's threshold is scaled by (1 + 1e-9)
        until it is distinct.
        """
        if not 0 <= tier < len(self.tiers):
            raise DomainError(f"tier index {tier} out of range (scenario has {len(self.tiers)})")
        others = [t.tau for j, t in enumerate(self.tiers) if j != tier]
        while tau in others:
            tau *= 1.0 + 1e-9
        tiers = list(self.tiers)
        tiers[tier] = replace(tiers[tier], tau=tau)
        return replace(self, tiers=tuple(tiers))


@dataclass(frozen=True)
class EquivalentNetwork:
    lambda_star: float
    a: float
    taus: tuple
    probs: tuple


@dataclass(frozen=True)
class IcscQuery:
    k: int
    combine_set: frozenset
    tau: float
    epsilon: float
    ic_condition: IcCondition = IcCondition.NONE
    gamma_bar: Optional[float] = None  # imperfect cancellation, defaults to γ

    def __post_init__(self):
        object.__setattr__(self, "combine_set", frozenset(int(u) for u in self.combine_set))
        object.__setattr__(self, "ic_condition", IcCondition(self.ic_condition))
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if not self.combine_set or not self.combine_set <= set(range(1, self.k + 1)):
            raise DomainError(f"combine_set must be a non-empty subset of 1..{self.k}")
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if not 0 < self.epsilon <= self.tau:
            raise DomainError(f"epsilon must lie in (0, tau], got {self.epsilon}")
        if self.gamma_bar is not None and not self.gamma_bar >= 0:
            raise DomainError(f"gamma_bar must be >= 0, got {self.gamma_bar}")

    @property
    def primary(self) -> int:
        return min(self.combine_set)


@dataclass(frozen=True)
class SimConfig:
    region_radius: float = SIM_RADIUS
    trials: int = SIM_TRIALS
    seed: int = SIM_SEED
    top_k: int = SIM_TOP_K
    far_field: bool = SIM_FAR_FIELD  # add the mean power of stations beyond the disk

    def __post_init__(self):
        if not self.region_radius > 0:
            raise DomainError(f"region_radius must be positive, got {self.region_radius}")
        if self.trials < 1 or self.top_k < 1 or self.seed < 0:
            raise DomainError("trials and top_k must be positive, seed unsigned")


@dataclass(frozen=True)
class SweepSpec:
    """One curve: a quantity evaluated on a dB grid with fixed parameters."""
    name: str
    quantity: Quantity
    tau_grid_db: tuple
    beta: float
    W: float = 0.0
    gamma: float = 1.0
    k: int = 1
    eps_prime: Optional[float] = None
    tiers: Optional[tuple] = None  # multi-tier: thresholds of all but the swept tier are fixed
    swept_tier: int = 0

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        grid = tuple(float(t) for t in self.tau_grid_db)
        object.__setattr__(self, "tau_grid_db", grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError(f"sweep grid must be non-empty and strictly increasing: {self.name}")
        if self.quantity in (Quantity.DELTA_IC, Quantity.DELTA_SC):
            if self.eps_prime is None or not 0 < self.eps_prime < 1 / self.gamma:
                raise DomainError(f"{self.name}: delta sweeps need eps_prime in (0, 1/γ)")
        if self.k < 1:
            raise DomainError(f"{self.name}: k must be >= 1")
        if self.tiers is not None:
            object.__setattr__(self, "tiers", tuple(self.tiers))
            if not 0 <= self.swept_tier < len(self.tiers):
                raise DomainError(f"{self.name}: swept_tier out of range")
