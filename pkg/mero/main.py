"""Command line: ``mero run``, ``mero report``, ``mero estimate-rstar``."""
from pathlib import Path
from typing import List, Optional
import argparse
import logging

from pydantic import ValidationError

from . import __version__
from .config.settings import get_settings, update_settings
from .errors import BudgetExhaustedError, ConfigurationError, InvalidArgumentError, SchemaError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mero", description="Minimax excess risk optimization experiments")
    parser.add_argument("--version", action="version", version=f"mero {__version__}")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)
    parser.add_argument("--progress", action="store_true", help="show progress bars")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run every (algorithm, seed) of a config")
    run.add_argument("config", type=Path)
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run.add_argument("--out", type=Path, default=None, help="output directory (overrides output_dir)")

    report = commands.add_parser("report", help="aggregate the traces of a run directory")
    report.add_argument("trace_dir", type=Path)
    report.add_argument("--out", type=Path, default=None)
    report.add_argument("--t-min", type=float, default=None, help="lower end of the slope-fit range")
    report.add_argument("--t-max", type=float, default=None, help="upper end of the slope-fit range")

    rstar = commands.add_parser("estimate-rstar", help="estimate minimal risks and write rstar.csv")
    rstar.add_argument("config", type=Path)
    rstar.add_argument("--out", type=Path, default=None)
    return parser


def _format_validation(error: ValidationError) -> str:
    return "\n".join(
        f"  {'.'.join(str(part) for part in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()
    )


def dispatch(args: argparse.Namespace) -> None:
    # imported here so `mero --version` stays fast
    from .config.run_config import load_run_config
    from .experiment import cmd_estimate_rstar, cmd_run
    from .report import cmd_report

    if args.command == "run":
        if args.jobs < 1:
            raise ConfigurationError(f"--jobs must be at least 1, got {args.jobs}")
        manifest = cmd_run(load_run_config(args.config), jobs=args.jobs, out_dir=args.out)
        print(f"Manifest: {manifest}")
    elif args.command == "report":
        t_range = None
        if args.t_min is not None or args.t_max is not None:
            t_range = (args.t_min or 0.0, args.t_max or float("inf"))
        summary = cmd_report(args.trace_dir, out_dir=args.out, t_range=t_range)
        print(f"Aggregate: {summary.aggregate}\nSlopes: {summary.slopes}")
    elif args.command == "estimate-rstar":
        print(f"Minimal risks: {cmd_estimate_rstar(load_run_config(args.config), out_dir=args.out)}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.log_level:
        overrides["log_level"] = args.log_level
    if args.progress:
        overrides["show_progress"] = True
    if overrides:
        update_settings(**overrides)
    logging.basicConfig(level=get_settings().log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        dispatch(args)
    except ValidationError as e:
        logger.error(f"Invalid config:\n{_format_validation(e)}")
        return EXIT_CONFIG
    except (ConfigurationError, InvalidArgumentError) as e:
        logger.error(f"Invalid config: {e}")
        return EXIT_CONFIG
    except BudgetExhaustedError as e:
        logger.error(str(e))
        return EXIT_BUDGET
    except (OSError, SchemaError) as e:
        logger.error(f"I/O error: {e}", exc_info=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
