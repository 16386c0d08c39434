"""
Tests for the Monte Carlo network simulator.

- batch shape and ordering
- reproducibility across thread counts
- far-field compensation
- estimators (coverage, counts, moments, ICSC events)
- CSV export
"""
import io
import math

import numpy as np
import pytest

from errors import DomainError
from models import (
    IcCondition, IcscQuery, MomentQuery, NetworkScenario, PathLossParams, SimConfig, TierSpec,
)
from services.coverage import db_to_linear, k_coverage
from services.icsc import icsc_predicates
from services.kernels import c_prime
from services.moments import factorial_moment_stinr, sinr_from_stinr
from services.netsim import (
    coverage_numbers, empirical_count_pmf, empirical_coverage, empirical_delta, empirical_icsc,
    empirical_moment, empirical_tier_coverage, far_field_power, simulate, write_batch_csv,
)

SMALL = SimConfig(trials=3000, seed=11, top_k=5)


def single(beta: float = 4.0, tau: float = 1.0) -> NetworkScenario:
    return NetworkScenario((TierSpec(lam=1.0, tau=tau),), PathLossParams(beta))


@pytest.fixture(scope="module")
def batch():
    return simulate(single(), SMALL)


# ─────────────────────────────────────────────
# Batches
# ─────────────────────────────────────────────

def test_batch_shape(batch):
    assert batch.top.shape == (3000, 5)
    assert batch.trials == 3000 and batch.top_k == 5


def test_values_are_sorted_and_bounded(batch):
    assert (np.diff(batch.top, axis=1) <= 0).all()
    assert (batch.top.sum(axis=1) <= 1.0 + 1e-12).all()
    assert ((batch.top_tier == -1) == (batch.top == 0)).all()


def test_station_counts_are_poisson(batch):
    mean = batch.station_count.mean()
    assert mean == pytest.approx(math.pi * 100, rel=0.01)


def test_same_seed_same_batch_any_threads():
    a = simulate(single(), SMALL, threads=1)
    b = simulate(single(), SMALL, threads=3)
    assert np.array_equal(a.top, b.top)
    assert np.array_equal(a.coverage_count, b.coverage_count)


def test_different_seed_differs():
    a = simulate(single(), SMALL)
    b = simulate(single(), SimConfig(trials=3000, seed=12, top_k=5))
    assert not np.array_equal(a.top, b.top)


def test_far_field_power_value():
    assert far_field_power(single(3.0), 10.0) == pytest.approx(2 * math.pi * 0.1)
    two = NetworkScenario(
        (TierSpec(lam=0.5, tau=1.0, power=100.0), TierSpec(lam=1.0, tau=1.0)), PathLossParams(4.0),
    )
    # Σ λP · 2π·R^{-2}/2
    assert far_field_power(two, 10.0) == pytest.approx(51 * math.pi / 100)


def test_far_field_shifts_every_trial_by_its_mean():
    s = single(3.0)
    near = simulate(s, SimConfig(trials=3000, seed=11, top_k=5, far_field=False))
    full = simulate(s, SimConfig(trials=3000, seed=11, top_k=5, far_field=True))
    assert np.allclose(full.total_power - near.total_power, far_field_power(s, 10.0))
    assert (full.top <= near.top).all()


# ─────────────────────────────────────────────
# Estimators
# ─────────────────────────────────────────────

def test_coverage_estimate_has_binomial_error(batch):
    est = empirical_coverage(batch, 1, 1.0)
    assert est.std_error == pytest.approx(math.sqrt(est.value * (1 - est.value) / 3000))


def test_coverage_needs_enough_values(batch):
    with pytest.raises(DomainError):
        empirical_coverage(batch, 6, 1.0)


def test_recounted_coverage_matches_stored(batch):
    assert np.array_equal(coverage_numbers(batch, [1.0]), batch.coverage_count)
    assert empirical_tier_coverage(batch, 1) == empirical_coverage(batch, 1, 1.0)


def test_count_pmf_sums_to_one(batch):
    taus = [db_to_linear(-3.0)]
    total = sum(empirical_count_pmf(batch, k, taus).value for k in range(0, 4))
    assert total == pytest.approx(1.0)


def test_moment_outside_simplex_flagged(batch):
    est = empirical_moment(batch, 2, [0.6, 0.5])
    assert est.value == 0.0 and est.flag == "simplex"


def test_first_moment_counts_stations(batch):
    est = empirical_moment(batch, 1, [0.2])
    assert est.value == pytest.approx((batch.top > 0.2).sum() / batch.trials)


def test_delta_events_are_nested(batch):
    ic = empirical_delta(batch, "ic", 2, 1.0, 0.1)
    sc = empirical_delta(batch, "sc", 2, 1.0, 0.1)
    assert ic.value <= sc.value


def test_delta_kind_validated(batch):
    with pytest.raises(DomainError):
        empirical_delta(batch, "both", 2, 1.0, 0.1)


def test_icsc_primary_only_is_coverage(batch):
    est = empirical_icsc(batch, IcscQuery(1, {1}, 1.0, 1.0))
    assert est == empirical_coverage(batch, 1, 1.0)


def test_moment_is_zero_off_the_simplex(batch):
    rng = np.random.default_rng(99)
    outside = 0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        thresholds = [float(x) for x in rng.dirichlet(np.ones(n)) * rng.uniform(0.9, 1.3)]
        if math.fsum(thresholds) < 1:
            continue
        outside += 1
        assert empirical_moment(batch, n, thresholds).value == 0.0, thresholds
    assert outside > 500


def test_independent_cancellation_implies_successive(batch):
    eps = sinr_from_stinr(0.1)
    iic = IcscQuery(3, {3}, 0.5, eps, IcCondition.IIC)
    sic = IcscQuery(3, {3}, 0.5, eps, IcCondition.SIC)
    z = batch.top[:, :3]
    event_iic, gate_iic = icsc_predicates(iic, 1.0)
    event_sic, gate_sic = icsc_predicates(sic, 1.0)
    assert not (gate_iic(z) & ~gate_sic(z)).any()
    assert not (event_iic(z) & ~event_sic(z)).any()
    assert empirical_icsc(batch, iic).value <= empirical_icsc(batch, sic).value


# ─────────────────────────────────────────────
# Export
# ─────────────────────────────────────────────

def test_batch_csv(batch):
    buf = io.StringIO()
    write_batch_csv(batch, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "trial_id,z1,z2,z3,z4,z5,station_count"
    assert len(lines) == 3001
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == batch.top[0, 0]


# ─────────────────────────────────────────────
# Agreement with the analytic side
# ─────────────────────────────────────────────

@pytest.mark.slow
def test_coverage_at_zero_db(sim_cfg):
    est = empirical_coverage(simulate(single(4.0), sim_cfg), 1, 1.0)
    expected = k_coverage(1, single(4.0)).value
    assert abs(est.value - expected) < max(0.015, 4 * est.std_error), f"{est} vs {expected}"


@pytest.mark.slow
def test_second_moment_matches_measure(sim_cfg, qmc):
    s = single(4.0)
    thresholds = (0.3, 0.2)
    est = empirical_moment(simulate(s, sim_cfg), 2, thresholds)
    measure = factorial_moment_stinr(MomentQuery(2, thresholds), s.channel, qmc)
    assert abs(est.value - measure.value) < max(0.01, 4 * est.std_error), f"{est} vs {measure}"


@pytest.mark.slow
def test_coverage_at_zero_db_with_slow_decay():
    # β = 3: without the far field the disk edge biases coverage upwards
    est = empirical_coverage(simulate(single(3.0), SimConfig(trials=100_000, seed=3)), 1, 1.0)
    expected = 1 / c_prime(3.0)
    assert expected == pytest.approx(0.4135, abs=1e-4)
    assert abs(est.value - expected) < 0.01, f"{est} vs {expected}"


@pytest.mark.slow
def test_region_radius_barely_matters():
    s = single(3.0)
    small = empirical_coverage(simulate(s, SimConfig(region_radius=10.0, trials=50_000, seed=4)), 1, 1.0)
    large = empirical_coverage(simulate(s, SimConfig(region_radius=20.0, trials=50_000, seed=5)), 1, 1.0)
    assert abs(small.value - large.value) < 4 * math.hypot(small.std_error, large.std_error)


@pytest.mark.slow
def test_two_tier_second_coverage_at_minus_ten_db(big_qmc):
    # λ₁ = λ₂/2, P₁ = 100·P₂, τ₂ = -2 dB
    tiers = (
        TierSpec(lam=0.5, tau=db_to_linear(-10.0), power=100.0),
        TierSpec(lam=1.0, tau=db_to_linear(-2.0)),
    )
    s = NetworkScenario(tiers, PathLossParams(3.0))
    batch = simulate(s, SimConfig(trials=100_000, seed=8, top_k=12))
    analytic = k_coverage(2, s, big_qmc)
    sim = empirical_tier_coverage(batch, 2)
    assert analytic.value == pytest.approx(0.587, abs=0.01)
    tol = max(0.01, 4 * math.hypot(analytic.std_error, sim.std_error))
    assert abs(analytic.value - sim.value) < tol, f"{analytic} vs {sim}"
