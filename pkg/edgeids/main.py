import argparse
import sys
from pathlib import Path
from typing import List, Optional

from edgeids.app.cli import bench, cost, detect, evaluate, report, selection, train
from edgeids.app.core import clock
from edgeids.app.core.config import get_settings
from edgeids.app.core.errors import EdgeIdsError, UsageError
from edgeids.app.core.run_config import load_run_config
from edgeids.app.services.pipeline import PipelineService
from edgeids.app.utils.logger import logger, set_level

settings = get_settings()


class CliParser(argparse.ArgumentParser):
    """Usage errors raise UsageError so `run` maps them to exit code 1."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def create_app() -> CliParser:
    """
    Application factory: the argument parser with every command registered.
    """
    description = f"""
    **{settings.PROJECT_NAME}** trains, selects, benchmarks and costs small intrusion
    classifiers for edge hardware.

    Steps: train -> eval -> select -> bench -> cost -> report; detect streams alerts.
    """
    parser = CliParser(
        prog="edgeids",
        description=description,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    parser.add_argument("--config", type=Path, help="Run configuration file (section.key = value)")
    parser.add_argument("--seed", type=int, help="Master seed (overrides the config file)")
    parser.add_argument("--out", type=Path, default=settings.DEFAULT_RUN_DIR, help="Run directory")
    parser.add_argument("--fixed-clock", help="Freeze timestamps to this ISO-8601 instant")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=CliParser)
    subparsers.required = True

    # Register commands
    for command in (train, evaluate, selection, bench, detect, report, cost):
        command.register(subparsers)

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, execute and map failures to exit codes (1 usage, 2 data, 3 model/config)."""
    parser = create_app()
    try:
        args = parser.parse_args(argv)
        if args.log_level:
            set_level(args.log_level)
        try:
            clock.freeze(args.fixed_clock)
        except ValueError:
            raise UsageError(f"--fixed-clock expects an ISO-8601 instant, got '{args.fixed_clock}'")

        overrides = {"seed": args.seed}
        if hasattr(args, "overrides"):
            overrides.update(args.overrides(args))
        config = load_run_config(args.config, overrides)
        config.check_paths()

        logger.info(f"{settings.PROJECT_NAME} {args.command} (run directory {args.out})")
        return args.handler(args, PipelineService(config, args.out))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    except EdgeIdsError as exc:
        logger.error(str(exc))
        return exc.exit_code
    finally:
        clock.freeze(None)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
