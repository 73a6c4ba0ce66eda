"""
src/qar/main.py
───────────────
Command-line entry point.

Run with:
    python -m src.qar <command> --config path/to/config.cfg [--out run_dir]

Exit codes:
    0: success
    1: configuration, input or output-directory error
    2: solver failure
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

import yaml
from pydantic import ValidationError

from src.qar import __version__
from src.qar.commands import campaigns, solve, sweeps
from src.qar.errors import ConfigError, OutputExists, QarError, SolverError

logger = logging.getLogger("src.qar")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qar",
        description="Steady states, thermodynamics and studies of quantum absorption refrigerators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # ---------------------------------------------------------------------------
    # Subcommand registration
    # ---------------------------------------------------------------------------
    solve.register(subparsers)
    sweeps.register(subparsers)
    campaigns.register(subparsers)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _validation_messages(exc: ValidationError) -> list[str]:
    return [
        f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}"
        for error in exc.errors()
    ]


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, dispatch to a subcommand and map errors to exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except ConfigError as exc:
        for key, message in exc.violations:
            print(f"{type(exc).__name__}: {key}: {message}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        for line in _validation_messages(exc):
            print(f"ConfigError: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except (yaml.YAMLError, OSError, OutputExists) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        logger.debug("solver failure", exc_info=True)
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except QarError as exc:
        # domain, rate and other input-derived failures
        logger.debug("rejected input", exc_info=True)
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(cli_main())
