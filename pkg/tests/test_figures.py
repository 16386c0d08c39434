"""
Tests for sweeps, truncation studies and figure presets.
"""
import math

import pytest

from errors import DomainError
from models import Quantity, SimConfig, SweepSpec, TierSpec
from services.coverage import db_to_linear
from services.figures import (
    PRESETS, db_grid, run_figure, run_sweep, sweep_scenario, truncation_study,
)
from services.icsc import delta_sc
from services.moments import sinr_from_stinr


# ─────────────────────────────────────────────
# Grids and scenarios
# ─────────────────────────────────────────────

def test_db_grid():
    assert db_grid(-1.0, 1.0, 0.5) == (-1.0, -0.5, 0.0, 0.5, 1.0)
    assert len(db_grid(-10.0, 20.0)) == 61


def test_grid_must_increase():
    with pytest.raises(DomainError):
        SweepSpec("bad", Quantity.K_COVERAGE, (1.0, 0.0), 3.0)


def test_delta_sweep_needs_eps_prime():
    with pytest.raises(DomainError):
        SweepSpec("bad", Quantity.DELTA_SC, (0.0,), 3.0, k=2)


def test_swept_threshold_kept_distinct():
    tiers = (TierSpec(0.5, 1.0, power=100.0), TierSpec(1.0, db_to_linear(3.0)))
    spec = SweepSpec("two", Quantity.K_COVERAGE, (3.0,), 3.0, tiers=tiers)
    s = sweep_scenario(spec, db_to_linear(3.0))
    assert s.tiers[0].tau != s.tiers[1].tau
    assert s.tiers[0].tau == pytest.approx(s.tiers[1].tau)


# ─────────────────────────────────────────────
# Sweeps
# ─────────────────────────────────────────────

def test_single_point_sweep(qmc):
    table = run_sweep(SweepSpec("one", Quantity.K_COVERAGE, (0.0,), 4.0), qmc)
    assert len(table.rows) == 1
    row = table.rows[0]
    assert row["analytic"] == pytest.approx(2 / math.pi, abs=1e-4)
    assert row["simulated"] is None and row["simulated_err"] is None
    assert "approx" not in table.columns


def test_sweep_with_simulation(qmc):
    spec = SweepSpec("sim", Quantity.K_COVERAGE, (0.0, 3.0), 4.0)
    table = run_sweep(spec, qmc, SimConfig(trials=2000, seed=3))
    for row in table.rows:
        assert 0 <= row["simulated"] <= 1
        assert row["simulated_err"] > 0


def test_two_tier_sweep_has_approximation(qmc):
    tiers = (TierSpec(0.5, 1.0, power=100.0), TierSpec(1.0, db_to_linear(1.0)))
    spec = SweepSpec("two", Quantity.K_COVERAGE, (2.0, 5.0), 3.0, tiers=tiers)
    table = run_sweep(spec, qmc)
    assert "approx" in table.columns
    for row in table.rows:
        assert row["approx"] == pytest.approx(row["analytic"], abs=0.1)


def test_failing_point_is_recorded(qmc):
    spec = SweepSpec("budget", Quantity.DELTA_SC, (-5.0, 0.0), 3.0, k=2, eps_prime=0.01)
    table = run_sweep(spec, qmc)
    assert len(table.rows) == 2
    for row in table.rows:
        assert row["analytic"] is None
        assert row["note"].startswith("BudgetError")


# ─────────────────────────────────────────────
# Truncation
# ─────────────────────────────────────────────

def test_truncation_full_equals_delta(qmc):
    spec = SweepSpec("trunc", Quantity.DELTA_SC, (0.0,), 3.0, k=2, eps_prime=0.1)
    table = truncation_study(spec, (1, 2), qmc)
    row = table.rows[0]
    expected = delta_sc(2, 1.0, sinr_from_stinr(0.1), sweep_scenario(spec, 1.0).channel, qmc)
    assert row["full"] == pytest.approx(expected.value, abs=1e-12)
    assert table.columns[:3] == ["tau_db", "terms_1", "terms_2"]
    assert abs(row["surplus"]) <= 3 * row["surplus_err"] + 1e-12


def test_truncation_needs_delta_quantity(qmc):
    spec = SweepSpec("cov", Quantity.K_COVERAGE, (0.0,), 3.0)
    with pytest.raises(DomainError):
        truncation_study(spec, (1,), qmc)


# ─────────────────────────────────────────────
# Presets
# ─────────────────────────────────────────────

def test_presets_cover_all_figures():
    assert list(PRESETS) == [f"fig{i}" for i in range(1, 10)]


def test_fig1_has_three_curves():
    sweeps = PRESETS["fig1"].sweeps
    assert [s.k for s in sweeps] == [1, 2, 3]
    assert all(s.beta == 3.0 and s.quantity == Quantity.K_COVERAGE for s in sweeps)


def test_fig3_two_tier_parameters():
    for s in PRESETS["fig3"].sweeps:
        hi, lo = s.tiers
        assert hi.lam == lo.lam / 2
        assert hi.power == 100 * lo.power


def test_truncation_presets():
    assert PRESETS["fig8"].truncation_terms == (1, 2, 3)
    assert PRESETS["fig9"].truncation_terms == (1, 2, 5)
    assert PRESETS["fig8"].sweeps[0].eps_prime == 0.1
    assert PRESETS["fig9"].sweeps[0].eps_prime == 0.05


def test_unknown_figure():
    with pytest.raises(DomainError):
        run_figure("fig10")
