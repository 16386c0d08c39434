"""
Tests for symmetric sums and coverage.

- dB conversion and the coverage-number bound
- closed-form single-tier coverage (γτ >= 1)
- multi-tier equivalence
- coverage number pmf and pgf
- pgf expansion of the STINR process
- Laplace identity of the interference factor
- agreement with the simulator
"""
import math

import pytest

from errors import DomainError
from models import (
    FadingKind, FadingSpec, NetworkScenario, PathLossParams, QmcConfig, SimConfig, TierSpec,
)
from services.coverage import (
    bonferroni_partials, coverage_count_distribution, coverage_laplace, db_to_linear,
    equivalent_network, interference_factor_laplace, k_coverage, linear_to_db,
    max_coverage_number, pgf_expansion, single_tier_approximation, single_tier_coverage,
    symmetric_sum,
)
from services.kernels import c_prime
from services.netsim import empirical_coverage, empirical_tier_coverage, simulate


def single(beta: float, tau: float, W: float = 0.0, gamma: float = 1.0) -> NetworkScenario:
    return NetworkScenario((TierSpec(lam=1.0, tau=tau),), PathLossParams(beta), W, gamma)


# ─────────────────────────────────────────────
# Helpers
# ─────────────────────────────────────────────

def test_db_conversion():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert linear_to_db(db_to_linear(-9.5424)) == pytest.approx(-9.5424)


def test_max_coverage_number():
    assert max_coverage_number(single(3.0, 1.0)) == 1
    assert max_coverage_number(single(3.0, 0.5)) == 2
    assert max_coverage_number(single(3.0, 0.1)) == 10
    assert max_coverage_number(single(3.0, 0.3)) == 4


# ─────────────────────────────────────────────
# Closed forms
# ─────────────────────────────────────────────

@pytest.mark.parametrize("beta", [3.0, 4.0, 5.0])
@pytest.mark.parametrize("tau", [1.0, 2.0, 5.0])
def test_closed_form_coverage(beta, tau):
    expected = tau ** (-2 / beta) / c_prime(beta)
    got = k_coverage(1, single(beta, tau))
    assert got.value == pytest.approx(expected, abs=1e-6)
    assert got.std_error == 0.0


def test_beta_four_at_zero_db():
    assert k_coverage(1, single(4.0, 1.0)).value == pytest.approx(2 / math.pi, abs=1e-4)


def test_higher_orders_vanish_above_one():
    assert k_coverage(2, single(3.0, 1.5)).value == 0.0


def test_k_must_be_positive():
    with pytest.raises(DomainError):
        k_coverage(0, single(3.0, 1.0))


def test_coverage_values_are_plain_floats(qmc):
    for k, tau in ((1, 2.0), (2, 0.4)):
        est = k_coverage(k, single(3.0, tau), qmc)
        assert type(est.value) is float and type(est.std_error) is float
        assert "np.float64" not in repr(est)


@pytest.mark.parametrize("k", [1, 2])
def test_coverage_without_noise_is_scale_free(k, qmc):
    sparse = NetworkScenario((TierSpec(lam=0.25, tau=0.4),), PathLossParams(3.5))
    dense = NetworkScenario((TierSpec(lam=8.0, tau=0.4),), PathLossParams(3.5))
    assert k_coverage(k, sparse, qmc).value == pytest.approx(k_coverage(k, dense, qmc).value, rel=1e-12)


# ─────────────────────────────────────────────
# Inclusion-exclusion
# ─────────────────────────────────────────────

def test_coverage_decreases_in_k(qmc):
    s = single(3.0, db_to_linear(-5.0))
    values = [k_coverage(k, s, qmc).value for k in (1, 2, 3)]
    assert values[0] > values[1] > values[2] > 0, values


def test_last_partial_sum_is_the_coverage(qmc):
    s = single(3.0, 0.4)
    partials = bonferroni_partials(1, s, qmc)
    assert len(partials) == max_coverage_number(s)
    assert k_coverage(1, s, qmc).value == pytest.approx(min(max(partials[-1].value, 0), 1))


def test_single_tier_coverage_matches_scenario(qmc):
    s = single(4.0, 0.3)
    a = k_coverage(2, s, qmc).value
    b = single_tier_coverage(2, 0.3, s.channel, qmc).value
    assert a == pytest.approx(b)


# ─────────────────────────────────────────────
# Multi-tier
# ─────────────────────────────────────────────

def two_tier(tau1: float, tau2: float) -> NetworkScenario:
    tiers = (TierSpec(lam=0.5, tau=tau1, power=100.0), TierSpec(lam=1.0, tau=tau2))
    return NetworkScenario(tiers, PathLossParams(3.0))


def test_equivalent_network_probabilities():
    eq = equivalent_network(two_tier(2.0, 3.0))
    assert sum(eq.probs) == pytest.approx(1.0)
    # λ·P^{2/β}: 0.5·100^{2/3} vs 1
    ratio = 0.5 * 100 ** (2 / 3)
    assert eq.probs[0] == pytest.approx(ratio / (1 + ratio))


def test_two_tier_first_sum_closed_form():
    s = two_tier(2.0, 3.0)
    eq = equivalent_network(s)
    expected = sum(p * t ** (-2 / 3) for p, t in zip(eq.probs, eq.taus)) / c_prime(3.0)
    assert symmetric_sum(1, s).value == pytest.approx(expected)
    assert k_coverage(1, s).value == pytest.approx(expected)


def test_threshold_swap_keeps_tiers_apart():
    s = two_tier(2.0, 3.0).with_threshold(0, 3.0)
    assert s.tiers[0].tau != s.tiers[1].tau
    assert s.tiers[0].tau == pytest.approx(3.0, rel=1e-8)
    assert k_coverage(1, s).value > 0
    with pytest.raises(DomainError):
        s.with_threshold(2, 1.0)


def test_two_tier_collapses_to_single_tier(qmc):
    tau = 0.4
    s = two_tier(tau, tau * (1 + 1e-9))
    approx = single_tier_approximation(s)
    assert approx.is_single_tier
    assert approx.tiers[0].tau == pytest.approx(tau)
    for k in (1, 2):
        assert k_coverage(k, s, qmc).value == pytest.approx(
            k_coverage(k, approx, qmc).value, abs=1e-6
        )


# ─────────────────────────────────────────────
# Coverage number
# ─────────────────────────────────────────────

def test_pmf_sums_to_one_and_matches_pgf(qmc):
    dist = coverage_count_distribution(single(3.0, 0.3), qmc)
    assert math.fsum(e.value for e in dist.pmf.values()) == pytest.approx(1.0)
    assert dist.pgf(1.0) == pytest.approx(1.0)
    assert dist.pgf(0.0) == pytest.approx(dist.pmf[0].value, abs=1e-9)
    mean = math.fsum(k * e.value for k, e in dist.pmf.items())
    assert mean == pytest.approx(dist.mean.value)


def test_pmf_values_are_probabilities(qmc):
    dist = coverage_count_distribution(single(4.0, db_to_linear(-5.0)), qmc)
    for k, est in dist.pmf.items():
        assert -1e-3 < est.value < 1 + 1e-3, f"P(N={k}) = {est}"


def test_pgf_expansion_trivial_function():
    est = pgf_expansion(lambda t: 1.0, 0.3, single(3.0, 1.0))
    assert est.value == pytest.approx(1.0)


def test_pgf_expansion_matches_coverage_number():
    tau_prime = 0.3
    tau = tau_prime / (1 - tau_prime)
    cfg = QmcConfig(point_count=2**15)
    s = single(3.0, tau)
    expanded = pgf_expansion(lambda t: 0.5, tau_prime, s, cfg)
    direct = coverage_count_distribution(s, cfg).pgf(0.5)
    assert expanded.value == pytest.approx(direct, abs=1e-2)


def test_pgf_expansion_needs_single_tier():
    with pytest.raises(DomainError):
        pgf_expansion(lambda t: 1.0, 0.3, two_tier(1.0, 2.0))


# ─────────────────────────────────────────────
# Interference factor
# ─────────────────────────────────────────────

def test_laplace_side_is_a_probability():
    for xi in (0.1, 1.0, 10.0):
        v = interference_factor_laplace(xi, 4.0)
        assert 0 < v < 1


@pytest.mark.slow
@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
def test_laplace_identity(xi, qmc):
    lhs = coverage_laplace(xi, single(4.0, 1.0), qmc)
    rhs = interference_factor_laplace(xi, 4.0)
    assert lhs.value == pytest.approx(rhs, abs=1e-3), f"{lhs} vs {rhs}"


# ─────────────────────────────────────────────
# Simulator agreement
# ─────────────────────────────────────────────

@pytest.mark.slow
def test_k_coverage_matches_simulation(qmc, sim_cfg):
    tau = db_to_linear(-5.0)
    s = single(3.0, tau)
    batch = simulate(s, sim_cfg)
    for k in (1, 2, 3):
        analytic = k_coverage(k, s, qmc)
        sim = empirical_coverage(batch, k, tau)
        tol = max(0.02, 4 * math.hypot(analytic.std_error, sim.std_error))
        assert abs(analytic.value - sim.value) < tol, f"k={k}: {analytic} vs {sim}"


@pytest.mark.slow
def test_fading_does_not_change_coverage(sim_cfg):
    """Equal λ·E[(PS)^{2/β}] gives the same SINR process."""
    beta, tau = 4.0, 1.0
    rayleigh = FadingSpec(FadingKind.EXPONENTIAL)
    shadow = FadingSpec(FadingKind.LOGNORMAL, sigma_db=8.0)
    lam_shadow = rayleigh.moment(2 / beta) / shadow.moment(2 / beta)
    a = NetworkScenario((TierSpec(1.0, tau, fading=rayleigh),), PathLossParams(beta))
    b = NetworkScenario((TierSpec(lam_shadow, tau, fading=shadow),), PathLossParams(beta))
    pa = empirical_coverage(simulate(a, sim_cfg), 1, tau)
    pb = empirical_coverage(simulate(b, sim_cfg), 1, tau)
    assert abs(pa.value - pb.value) < max(0.015, 4 * math.hypot(pa.std_error, pb.std_error))


@pytest.mark.slow
@pytest.mark.parametrize("tau2_db", [1.0, -2.0])
@pytest.mark.parametrize("tau1_db", [-5.0, 5.0])
def test_two_tier_matches_simulation(tau1_db, tau2_db, qmc):
    # λ₁ = λ₂/2, P₁ = 100·P₂, β = 3
    s = two_tier(db_to_linear(tau1_db), db_to_linear(tau2_db))
    batch = simulate(s, SimConfig(trials=50_000, seed=5, top_k=12))
    analytic = k_coverage(1, s, qmc)
    sim = empirical_tier_coverage(batch, 1)
    tol = max(0.01, 4 * math.hypot(analytic.std_error, sim.std_error))
    assert abs(analytic.value - sim.value) < tol, f"{analytic} vs {sim}"
