"""
Parameter sweeps: analytic curves on a dB grid, optionally next to the
simulator, plus the named presets reproducing the published figures.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from config import DB_STEP
from errors import DomainError, SinrError
from models import (
    Estimate, IcscQuery, NetworkScenario, PathLossParams, QmcConfig, QuadConfig, Quantity,
    SimConfig, SweepSpec, TierSpec,
)
from services.coverage import (
    coverage_count_distribution, db_to_linear, k_coverage, max_coverage_number,
    single_tier_approximation,
)
from services.icsc import delta_ic, delta_sc, delta_terms, residual_coverage
from services.moments import sinr_from_stinr
from services.netsim import (
    SimBatch, empirical_count_pmf, empirical_delta, empirical_icsc, empirical_tier_coverage,
    simulate,
)
from services.qmc import combine

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["tau_db", "analytic", "analytic_err", "simulated", "simulated_err"]


@dataclass
class SweepTable:
    name: str
    columns: list
    rows: list = field(default_factory=list)  # dicts keyed by column, None = empty cell


def db_grid(lo: float, hi: float, step: float = DB_STEP) -> tuple:
    count = int(round((hi - lo) / step))
    return tuple(round(lo + i * step, 10) for i in range(count + 1))


# ─────────────────────────────────────────────
# Scenario per grid point
# ─────────────────────────────────────────────

def sweep_scenario(spec: SweepSpec, tau: float) -> NetworkScenario:
    """Scenario at one grid point: λ=1, K=1, PS=1 unless tiers are given."""
    if spec.tiers is None:
        tiers = (TierSpec(lam=1.0, tau=tau, ps_moment=1.0),)
        return NetworkScenario(tiers, PathLossParams(spec.beta), spec.W, spec.gamma)
    base = NetworkScenario(spec.tiers, PathLossParams(spec.beta), spec.W, spec.gamma)
    return base.with_threshold(spec.swept_tier, tau)


def _epsilon(spec: SweepSpec) -> float:
    return sinr_from_stinr(spec.eps_prime, spec.gamma)


def _analytic(spec: SweepSpec, s: NetworkScenario, tau: float, qmc, quad) -> Estimate:
    p = s.channel
    if spec.quantity == Quantity.K_COVERAGE:
        return k_coverage(spec.k, s, qmc, quad)
    if spec.quantity == Quantity.PMF:
        return coverage_count_distribution(s, qmc, quad).pmf.get(spec.k, Estimate(0.0))
    if spec.quantity == Quantity.RESIDUAL:
        return residual_coverage(spec.k, tau, p, qmc, quad)
    if spec.quantity == Quantity.DELTA_IC:
        return delta_ic(spec.k, tau, _epsilon(spec), p, qmc, quad)
    return delta_sc(spec.k, tau, _epsilon(spec), p, qmc, quad)


def _simulated(spec: SweepSpec, b: SimBatch, s: NetworkScenario, tau: float) -> Estimate:
    taus = [t.tau for t in s.tiers]
    if spec.quantity == Quantity.K_COVERAGE:
        return empirical_tier_coverage(b, spec.k, taus)
    if spec.quantity == Quantity.PMF:
        return empirical_count_pmf(b, spec.k, taus)
    if spec.quantity == Quantity.RESIDUAL:
        return empirical_icsc(b, IcscQuery(spec.k, {spec.k}, tau, tau))
    kind = "ic" if spec.quantity == Quantity.DELTA_IC else "sc"
    return empirical_delta(b, kind, spec.k, tau, _epsilon(spec))


def _sim_config(spec: SweepSpec, cfg: SimConfig) -> SimConfig:
    """Keep enough strongest values to recount coverage at every grid point."""
    lowest = sweep_scenario(spec, db_to_linear(spec.tau_grid_db[0]))
    needed = max(spec.k, max_coverage_number(lowest))
    if needed > cfg.top_k:
        logger.info(f"{spec.name}: raising top_k from {cfg.top_k} to {needed}")
        return dataclasses.replace(cfg, top_k=needed)
    return cfg


# ─────────────────────────────────────────────
# Sweeps
# ─────────────────────────────────────────────

def run_sweep(
    spec: SweepSpec, qmc: Optional[QmcConfig] = None,
    sim_cfg: Optional[SimConfig] = None, quad: Optional[QuadConfig] = None,
) -> SweepTable:
    """One row per grid point; a failing point is recorded in its `note` cell."""
    two_tier = spec.tiers is not None and len(spec.tiers) > 1
    columns = SWEEP_COLUMNS + (["approx"] if two_tier else []) + ["note"]
    table = SweepTable(spec.name, columns)

    batch = None
    if sim_cfg is not None:
        cfg = _sim_config(spec, sim_cfg)
        batch = simulate(sweep_scenario(spec, db_to_linear(spec.tau_grid_db[0])), cfg)

    for tau_db in spec.tau_grid_db:
        row = {c: None for c in columns}
        row["tau_db"] = tau_db
        tau = db_to_linear(tau_db)
        try:
            s = sweep_scenario(spec, tau)
            est = _analytic(spec, s, tau, qmc, quad)
            row["analytic"], row["analytic_err"] = est.value, est.std_error
            row["note"] = est.flag
            if two_tier and spec.quantity == Quantity.K_COVERAGE:
                row["approx"] = k_coverage(spec.k, single_tier_approximation(s), qmc, quad).value
            if batch is not None:
                sim = _simulated(spec, batch, s, tau)
                row["simulated"], row["simulated_err"] = sim.value, sim.std_error
        except SinrError as e:
            logger.warning(f"{spec.name} at {tau_db} dB: {e}")
            row["note"] = f"{type(e).__name__}: {e}"
        table.rows.append(row)
    logger.info(f"Sweep {spec.name}: {len(table.rows)} points")
    return table


def truncation_study(
    spec: SweepSpec, terms: Sequence[int], qmc: Optional[QmcConfig] = None,
    quad: Optional[QuadConfig] = None,
) -> SweepTable:
    """Partial sums of the Δ expansion next to the full one and the first surplus term."""
    if spec.quantity not in (Quantity.DELTA_IC, Quantity.DELTA_SC):
        raise DomainError(f"{spec.name}: truncation study needs delta_ic or delta_sc")
    if not terms or any(t < 1 for t in terms):
        raise DomainError(f"partial-sum lengths must be positive, got {list(terms)}")
    kind = "ic" if spec.quantity == Quantity.DELTA_IC else "sc"
    partial_cols = [f"terms_{t}" for t in terms]
    columns = ["tau_db"] + partial_cols + ["full", "full_err", "surplus", "surplus_err", "note"]
    table = SweepTable(spec.name, columns)

    for tau_db in spec.tau_grid_db:
        row = {c: None for c in columns}
        row["tau_db"] = tau_db
        tau = db_to_linear(tau_db)
        try:
            p = sweep_scenario(spec, tau).channel
            signed = delta_terms(kind, spec.k, tau, _epsilon(spec), p, qmc, quad, extra=1)
            full, surplus = signed[:-1], signed[-1:]
            for col, t in zip(partial_cols, terms):
                row[col] = math.fsum(e.value for e in full[:t])
            total = combine((1.0, e) for e in full)
            row["full"], row["full_err"] = total.value, total.std_error
            if surplus:
                row["surplus"], row["surplus_err"] = surplus[0].value, surplus[0].std_error
        except SinrError as e:
            logger.warning(f"{spec.name} at {tau_db} dB: {e}")
            row["note"] = f"{type(e).__name__}: {e}"
        table.rows.append(row)
    return table


# ─────────────────────────────────────────────
# Presets
# ─────────────────────────────────────────────

@dataclass(frozen=True)
class FigurePreset:
    name: str
    sweeps: tuple
    truncation_terms: Optional[tuple] = None


def _two_tier(tau2_db: float) -> tuple:
    # λ₁ = λ₂/2, P₁ = 100·P₂; tier 1 threshold is swept
    return (
        TierSpec(lam=0.5, tau=1.0, power=100.0),
        TierSpec(lam=1.0, tau=db_to_linear(tau2_db), power=1.0),
    )


def _coverage_figure(name: str, beta: float) -> FigurePreset:
    grid = db_grid(-10.0, 20.0)
    return FigurePreset(name, tuple(
        SweepSpec(f"{name}_k{k}", Quantity.K_COVERAGE, grid, beta, k=k) for k in (1, 2, 3)
    ))


def _delta_figure(name: str, beta: float, eps_prime: float) -> FigurePreset:
    grid = db_grid(-10.0, 10.0)
    return FigurePreset(name, tuple(
        SweepSpec(f"{name}_{q.value}", q, grid, beta, k=2, eps_prime=eps_prime)
        for q in (Quantity.DELTA_IC, Quantity.DELTA_SC)
    ))


def _truncation_figure(name: str, eps_prime: float, terms: tuple) -> FigurePreset:
    spec = SweepSpec(
        f"{name}_delta_sc", Quantity.DELTA_SC, db_grid(-10.0, 10.0), 3.0, k=2, eps_prime=eps_prime,
    )
    return FigurePreset(name, (spec,), terms)


PRESETS = {
    "fig1": _coverage_figure("fig1", 3.0),
    "fig2": _coverage_figure("fig2", 5.0),
    "fig3": FigurePreset("fig3", (
        SweepSpec("fig3_tau2_1db_k1", Quantity.K_COVERAGE, db_grid(-10.0, 20.0), 3.0, k=1,
                  tiers=_two_tier(1.0)),
        SweepSpec("fig3_tau2_-2db_k1", Quantity.K_COVERAGE, db_grid(-10.0, 20.0), 3.0, k=1,
                  tiers=_two_tier(-2.0)),
        SweepSpec("fig3_tau2_-2db_k2", Quantity.K_COVERAGE, db_grid(-10.0, 20.0), 3.0, k=2,
                  tiers=_two_tier(-2.0)),
    )),
    "fig4": _delta_figure("fig4", 3.0, 0.1),
    "fig5": _delta_figure("fig5", 5.0, 0.1),
    "fig6": _delta_figure("fig6", 3.0, 0.05),
    "fig7": _delta_figure("fig7", 5.0, 0.05),
    "fig8": _truncation_figure("fig8", 0.1, (1, 2, 3)),
    "fig9": _truncation_figure("fig9", 0.05, (1, 2, 5)),
}


def run_figure(
    name: str, qmc: Optional[QmcConfig] = None, sim_cfg: Optional[SimConfig] = None,
    quad: Optional[QuadConfig] = None,
) -> list:
    if name not in PRESETS:
        raise DomainError(f"unknown figure {name!r}; choose from {', '.join(PRESETS)}")
    preset = PRESETS[name]
    if preset.truncation_terms is not None:
        return [truncation_study(s, preset.truncation_terms, qmc, quad) for s in preset.sweeps]
    return [run_sweep(s, qmc, sim_cfg, quad) for s in preset.sweeps]
