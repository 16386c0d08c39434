"""
Handlers for the subcommands: coverage, moments, icsc, figure, init.

Every handler takes the parsed arguments and an output stream, computes
all rows first and only then writes, so a failure never leaves a partial
CSV behind.
"""
import dataclasses
import logging
from pathlib import Path
from typing import Optional

from errors import BudgetError, ScenarioError, SinrError
from handlers.output import render_csv, write_csv
from handlers.scenario import load_scenario, template_text
from models import IcscQuery, NetworkScenario, QmcConfig, SimConfig
from services.coverage import db_to_linear, k_coverage, max_coverage_number
from services.figures import db_grid, run_figure
from services.icsc import delta_ic, delta_sc, icsc_coverage
from services.moments import factorial_moment_sinr, stinr_from_sinr
from services.netsim import (
    empirical_delta, empirical_icsc, empirical_moment, empirical_tier_coverage, simulate,
)

logger = logging.getLogger(__name__)

# failures that stop the whole command; any other SinrError only spoils its row
FATAL_ERRORS = (BudgetError, ScenarioError)


def _tau_grid(args) -> Optional[tuple]:
    if getattr(args, "grid", None):
        lo, hi, step = args.grid
        return db_grid(lo, hi, step)
    if getattr(args, "tau_db", None):
        return tuple(args.tau_db)
    return None


def _with_threshold(s: NetworkScenario, tier: int, tau: float) -> NetworkScenario:
    if not 0 <= tier < len(s.tiers):
        raise ScenarioError(f"tier index {tier} out of range (scenario has {len(s.tiers)})")
    return s.with_threshold(tier, tau)


def _simulated(row: dict, est):
    row["simulated"], row["simulated_err"] = est.value, est.std_error


def _analytic(row: dict, est):
    row["analytic"], row["analytic_err"] = est.value, est.std_error
    if est.flag:
        row["note"] = est.flag


def _row_failed(row: dict, e: Exception):
    logger.warning(f"Row {row} failed: {e}")
    row["note"] = f"{type(e).__name__}: {e}"


# ─────────────────────────────────────────────
# coverage
# ─────────────────────────────────────────────

def cmd_coverage(args, stdout) -> int:
    logger.info(f"coverage: k={args.k} from {args.scenario}")
    sf = load_scenario(args.scenario)
    base = sf.network()
    qmc = sf.qmc_config(args.seed)
    grid = _tau_grid(args)
    points = [(None, base)] if grid is None else [
        (tau_db, _with_threshold(base, args.tier, db_to_linear(tau_db))) for tau_db in grid
    ]

    batch = None
    if args.simulate:
        cfg = sf.sim_config(args.seed)
        needed = max(args.k, *(max_coverage_number(s) for _, s in points))
        batch = simulate(base, dataclasses.replace(cfg, top_k=max(cfg.top_k, needed)))

    columns = ["tau_db", "k", "analytic", "analytic_err"]
    columns += ["simulated", "simulated_err"] if args.simulate else []
    columns += ["note"]
    rows = []
    for tau_db, s in points:
        row = {"tau_db": tau_db, "k": args.k}
        try:
            _analytic(row, k_coverage(args.k, s, qmc))
        except FATAL_ERRORS:
            raise
        except SinrError as e:
            _row_failed(row, e)
        if batch is not None:
            _simulated(row, empirical_tier_coverage(batch, args.k, [t.tau for t in s.tiers]))
        rows.append(row)
    write_csv(columns, rows, args.out, stdout)
    logger.info(f"coverage: wrote {len(rows)} row(s)")
    return 0


# ─────────────────────────────────────────────
# moments
# ─────────────────────────────────────────────

def cmd_moments(args, stdout) -> int:
    logger.info(f"moments: n={len(args.thresholds_db)} from {args.scenario}")
    sf = load_scenario(args.scenario)
    s = sf.network()
    p = s.channel
    ts = [db_to_linear(t) for t in args.thresholds_db]
    n = len(ts)
    row = {"n": n, "thresholds_db": ";".join(repr(float(t)) for t in args.thresholds_db)}
    try:
        _analytic(row, factorial_moment_sinr(n, ts, p, sf.qmc_config(args.seed)))
    except FATAL_ERRORS:
        raise
    except SinrError as e:
        _row_failed(row, e)

    columns = ["n", "thresholds_db", "analytic", "analytic_err"]
    if args.simulate:
        cfg = sf.sim_config(args.seed)
        batch = simulate(s, dataclasses.replace(cfg, top_k=max(cfg.top_k, n)))
        thresholds = [stinr_from_sinr(t, p.gamma) for t in ts]
        # ordered n-tuples, matching the measure
        _simulated(row, empirical_moment(batch, n, thresholds))
        columns += ["simulated", "simulated_err"]
    columns += ["note"]
    write_csv(columns, [row], args.out, stdout)
    logger.info("moments: wrote 1 row")
    return 0


# ─────────────────────────────────────────────
# icsc
# ─────────────────────────────────────────────

def _combine_set(text: str) -> frozenset:
    try:
        return frozenset(int(u) for u in text.split(",") if u.strip())
    except ValueError as e:
        raise ScenarioError(f"--combine expects comma-separated indices, got {text!r}") from e


def cmd_icsc(args, stdout) -> int:
    logger.info(f"icsc: k={args.k} delta={args.delta} from {args.scenario}")
    sf = load_scenario(args.scenario)
    s = sf.network()
    if not s.is_single_tier:
        raise ScenarioError("icsc needs a single-tier scenario")
    p = s.channel
    qmc = sf.qmc_config(args.seed)
    grid = _tau_grid(args)
    if grid is None:
        raise ScenarioError("icsc needs --tau-db or --grid")
    epsilon = db_to_linear(args.eps_db)
    combine_set = _combine_set(args.combine) if args.combine else frozenset({1})
    query = None
    if not args.delta:
        # validated once; rows only change the threshold
        query = IcscQuery(args.k, combine_set, epsilon, epsilon, args.condition, args.gamma_bar)

    batch = None
    if args.simulate:
        cfg = sf.sim_config(args.seed)
        batch = simulate(s, dataclasses.replace(cfg, top_k=max(cfg.top_k, args.k)))

    columns = ["tau_db", "k", "analytic", "analytic_err"]
    columns += ["simulated", "simulated_err"] if args.simulate else []
    columns += ["note"]
    rows = []
    for tau_db in grid:
        tau = db_to_linear(tau_db)
        row = {"tau_db": tau_db, "k": args.k}
        q = None
        try:
            if query is not None:
                q = dataclasses.replace(query, tau=tau)
            if args.delta == "ic":
                est = delta_ic(args.k, tau, epsilon, p, qmc)
            elif args.delta == "sc":
                est = delta_sc(args.k, tau, epsilon, p, qmc)
            else:
                est = icsc_coverage(q, p, qmc)
            _analytic(row, est)
        except FATAL_ERRORS:
            raise
        except SinrError as e:
            _row_failed(row, e)
        if batch is not None and (args.delta or q is not None):
            if args.delta:
                sim = empirical_delta(batch, args.delta, args.k, tau, epsilon)
            else:
                sim = empirical_icsc(batch, q)
            _simulated(row, sim)
        rows.append(row)
    write_csv(columns, rows, args.out, stdout)
    logger.info(f"icsc: wrote {len(rows)} row(s)")
    return 0


# ─────────────────────────────────────────────
# figure / init
# ─────────────────────────────────────────────

def cmd_figure(args, stdout) -> int:
    logger.info(f"figure: {args.name}, simulate={args.simulate}")
    seed = args.seed
    qmc = QmcConfig(point_count=args.points) if seed is None else QmcConfig(
        point_count=args.points, scramble_seed=seed
    )
    sim_cfg = None
    if args.simulate:
        sim_cfg = SimConfig(trials=args.trials) if seed is None else SimConfig(
            trials=args.trials, seed=seed
        )
    tables = run_figure(args.name, qmc, sim_cfg)
    rendered = [(t.name, render_csv(t.columns, t.rows)) for t in tables]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in rendered:
        path = out_dir / f"{name}.csv"
        path.write_text(text, encoding="utf-8")
        stdout.write(f"{path}\n")
    logger.info(f"figure: wrote {len(rendered)} file(s) to {out_dir}")
    return 0


def cmd_init(args, stdout) -> int:
    logger.info(f"init: {args.path}, force={args.force}")
    path = Path(args.path)
    if path.exists() and not args.force:
        raise ScenarioError(f"{path} exists; pass --force to overwrite")
    path.write_text(template_text(), encoding="utf-8")
    stdout.write(f"{path}\n")
    logger.info(f"init: wrote template to {path}")
    return 0
