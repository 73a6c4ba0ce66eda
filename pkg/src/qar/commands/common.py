"""Options and helpers shared by the subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional

from src.qar.config import load_config_file
from src.qar.models import SystemConfig
from src.qar.storage import (
    build_manifest,
    prepare_run_dir,
    write_histogram,
    write_json,
    write_manifest,
    write_rows,
)
from src.qar.studies import StudyResult


def add_config_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, type=Path, help="YAML configuration file")
    parser.add_argument(
        "--truncation",
        type=int,
        default=None,
        help="Fock truncation for oscillator subsystems (overrides the config)",
    )


def add_output_options(parser: argparse.ArgumentParser, *, seed: bool = False, threads: bool = False) -> None:
    parser.add_argument("--out", type=Path, default=None, help="run directory to write")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="row file format")
    parser.add_argument("--force", action="store_true", help="overwrite an existing run directory")
    if seed:
        parser.add_argument("--seed", type=int, default=None, help="random seed (u64)")
    if threads:
        parser.add_argument("--threads", type=int, default=1, help="worker threads")


def with_truncation(config: SystemConfig, truncation: Optional[int]) -> SystemConfig:
    """Apply ``--truncation`` to every oscillator subsystem of the medium."""
    if truncation is None or config.medium.kind == "TLS":
        return config
    update: dict[str, Any] = {"truncation_B": truncation}
    if config.medium.kind == "OMS":
        update["truncation_A"] = truncation
    return config.model_copy(update={"medium": config.medium.model_copy(update=update)})


def load(args: argparse.Namespace) -> tuple[SystemConfig, dict[str, Any]]:
    config, studies = load_config_file(args.config)
    return with_truncation(config, args.truncation), studies


def emit(payload: Any) -> None:
    """Print a JSON document on stdout."""
    json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=str)
    sys.stdout.write("\n")


def write_study(
    args: argparse.Namespace,
    result: StudyResult,
    started_at: str,
    *,
    tolerances: Any = None,
    seed: Optional[int] = None,
    metadata: Optional[dict[str, Any]] = None,
) -> None:
    """Write a study to ``--out`` (with manifest) or print its summary."""
    if args.out is None:
        emit(result.summary)
        return
    run_dir = prepare_run_dir(args.out, force=args.force)
    write_rows(run_dir, result.columns, result.rows, args.format)
    write_json(run_dir / "summary.json", result.summary)
    if result.histogram is not None:
        write_histogram(run_dir, *result.histogram)
    manifest = build_manifest(
        args.command,
        result.config_hash,
        started_at,
        seed=seed,
        tolerances=tolerances,
        row_count=len(result.rows),
        failure_count=result.failure_count,
        warnings=result.warnings,
        metadata=metadata,
    )
    write_manifest(run_dir, manifest)
