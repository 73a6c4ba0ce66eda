"""
src/qar/commands/sweeps.py
──────────────────────────
Deterministic parameter scans.

Commands:
  sweep    — one-parameter sweep from the [sweep] table.
  maxpower — efficiency at maximum cooling power over omega_c ([search] table);
             rows.csv holds the coarse scan.
"""

from __future__ import annotations

import argparse

from src.qar.commands.common import add_config_option, add_output_options, emit, load, write_study
from src.qar.config import config_hash, validate
from src.qar.errors import ConfigError
from src.qar.models import SearchSpec, SweepSpec
from src.qar.storage import build_manifest, now_utc, prepare_run_dir, write_json, write_manifest, write_rows
from src.qar.studies import MAXPOWER_COLUMNS, max_power_point, run_sweep


def run_sweep_command(args: argparse.Namespace) -> int:
    started = now_utc()
    config, studies = load(args)
    if "sweep" not in studies:
        raise ConfigError([("sweep", "missing [sweep] table")])
    spec = SweepSpec(base=config, **studies["sweep"])
    tolerances = validate(config).solver.tolerances
    result = run_sweep(spec, threads=args.threads)
    write_study(args, result, started, tolerances=tolerances, metadata={"parameter": spec.parameter})
    return 0


def run_maxpower(args: argparse.Namespace) -> int:
    started = now_utc()
    config, studies = load(args)
    search = SearchSpec(**studies.get("search", {}))
    result = max_power_point(config, search)
    summary = {
        "omega_c_star": result.omega_c,
        "J_c_star": result.J_c,
        "cop_star": result.cop,
        "carnot_cop": result.carnot_cop,
        "cop_ratio": result.cop_ratio,
        "bound": result.bound,
        "surpassed": result.surpassed,
        "evaluations": result.evaluations,
    }
    emit(summary)
    if args.out is not None:
        run_dir = prepare_run_dir(args.out, force=args.force)
        write_rows(run_dir, MAXPOWER_COLUMNS, list(result.coarse), args.format)
        write_json(run_dir / "summary.json", summary)
        write_json(run_dir / "detail.json", result.report.record().model_dump(mode="json"))
        manifest = build_manifest(
            "maxpower",
            config_hash(config),
            started,
            tolerances=result.report.config.solver.tolerances,
            row_count=len(result.coarse),
            failure_count=sum(1 for row in result.coarse if row["error"]),
        )
        write_manifest(run_dir, manifest)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    sweep = subparsers.add_parser("sweep", help="one-parameter sweep")
    add_config_option(sweep)
    add_output_options(sweep, threads=True)
    sweep.set_defaults(handler=run_sweep_command)

    maxpower = subparsers.add_parser("maxpower", help="efficiency at maximum cooling power")
    add_config_option(maxpower)
    add_output_options(maxpower)
    maxpower.set_defaults(handler=run_maxpower)
