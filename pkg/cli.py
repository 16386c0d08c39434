"""
sinrmoments: command-line entry point.
"""
import argparse
import logging
import sys

from config import LOG_LEVEL, QMC_POINTS, SIM_TRIALS
from errors import SinrError
from handlers.commands import cmd_coverage, cmd_figure, cmd_icsc, cmd_init, cmd_moments
from handlers.output import DESCRIPTION, EPILOG, HELP
from models import IcCondition
from services.figures import PRESETS

logger = logging.getLogger(__name__)


def _add_scenario(p: argparse.ArgumentParser):
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.add_argument("--simulate", action="store_true", help="add Monte Carlo columns")


def _add_thresholds(p: argparse.ArgumentParser):
    p.add_argument("--tau-db", type=float, nargs="+", dest="tau_db")
    p.add_argument("--grid", type=float, nargs=3, metavar=("LO", "HI", "STEP"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sinrmoments", description=DESCRIPTION, epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--seed", type=int, default=None, help="QMC scrambling and simulator seed")
    parser.add_argument("--log-level", default=LOG_LEVEL, dest="log_level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help=HELP["coverage"])
    _add_scenario(p)
    _add_thresholds(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--tier", type=int, default=0, help="tier whose threshold is swept")

    p = sub.add_parser("moments", help=HELP["moments"])
    _add_scenario(p)
    p.add_argument("thresholds_db", type=float, nargs="+", metavar="TAU_DB")

    p = sub.add_parser("icsc", help=HELP["icsc"])
    _add_scenario(p)
    _add_thresholds(p)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--combine", default=None, help="combined signal indices, e.g. 1,2")
    p.add_argument("--eps-db", type=float, required=True, dest="eps_db")
    p.add_argument("--condition", choices=[c.value for c in IcCondition], default="none")
    p.add_argument("--gamma-bar", type=float, default=None, dest="gamma_bar")
    p.add_argument("--delta", choices=["ic", "sc"], default=None, help="Δ gain instead of coverage")

    p = sub.add_parser("figure", help=HELP["figure"])
    p.add_argument("name", choices=list(PRESETS))
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--points", type=int, default=QMC_POINTS)
    p.add_argument("--trials", type=int, default=SIM_TRIALS)

    p = sub.add_parser("init", help=HELP["init"])
    p.add_argument("path")
    p.add_argument("--force", action="store_true")
    return parser


COMMANDS = [
    ("coverage", cmd_coverage), ("moments", cmd_moments), ("icsc", cmd_icsc),
    ("figure", cmd_figure), ("init", cmd_init),
]


def main(argv=None, stdout=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        level=args.log_level.upper(),
        stream=sys.stderr,
    )
    handler = dict(COMMANDS)[args.command]
    try:
        return handler(args, stdout or sys.stdout)
    except SinrError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
