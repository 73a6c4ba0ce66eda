"""
src/qar/commands/solve.py
─────────────────────────
Single-configuration subcommands.

Commands:
  steady   — solve one configuration, print its JSON detail record.
  validate — check a configuration and print its normalised form.
"""

from __future__ import annotations

import argparse

from src.qar.commands.common import add_config_option, add_output_options, emit, load
from src.qar.config import config_hash, validate
from src.qar.correlations import correlation_report
from src.qar.liouvillian import ledger_rows
from src.qar.storage import (
    build_manifest,
    now_utc,
    prepare_run_dir,
    write_json,
    write_manifest,
    write_rows,
    write_rows_csv,
)
from src.qar.thermo import CSV_COLUMNS, analyze

LEDGER_COLUMNS: tuple[str, ...] = ("bath", "label", "omega", "weight", "response", "rate", "parasitic")


def run_steady(args: argparse.Namespace) -> int:
    started = now_utc()
    config, _ = load(args)
    report = analyze(config)
    detail = report.record().model_dump(mode="json")
    if args.correlations:
        detail["correlations"] = correlation_report(report.rho, report.system).row()
    emit(detail)

    if args.out is not None:
        run_dir = prepare_run_dir(args.out, force=args.force)
        write_rows(run_dir, CSV_COLUMNS, [report.row()], args.format)
        write_json(run_dir / "detail.json", detail)
        write_rows_csv(run_dir / "ledger.csv", LEDGER_COLUMNS, ledger_rows(report.liouvillian))
        warnings = []
        if report.flags.truncation_warning:
            warnings.append("truncation: top Fock levels are populated")
        if not report.flags.weak_coupling_valid:
            warnings.append("validity: outside the weak-coupling regime")
        manifest = build_manifest(
            "steady",
            report.config_hash,
            started,
            tolerances=report.config.solver.tolerances,
            row_count=1,
            warnings=warnings,
            metadata={"frequency_scale_ghz": config.frequency_scale_ghz, "entropy_unit": "nats"},
        )
        write_manifest(run_dir, manifest)
    return 0


def run_validate(args: argparse.Namespace) -> int:
    config, _ = load(args)
    validated = validate(config)
    emit({"config_hash": config_hash(validated), "config": validated.model_dump(mode="json")})
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    steady = subparsers.add_parser("steady", help="solve one configuration")
    add_config_option(steady)
    add_output_options(steady)
    steady.add_argument("--correlations", action="store_true", help="add the correlation analysis")
    steady.set_defaults(handler=run_steady)

    check = subparsers.add_parser("validate", help="validate a configuration")
    add_config_option(check)
    check.set_defaults(handler=run_validate)
