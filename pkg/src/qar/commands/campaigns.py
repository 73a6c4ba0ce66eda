"""
src/qar/commands/campaigns.py
─────────────────────────────
Multi-point studies built on the max-power search.

Commands:
  sample  — seeded random campaign ([sampling] table).
  leak    — heat-leak characteristic curves ([leak_study] table).
  swapped — swapped-topology efficiency bound check ([swapped_study] table).
"""

from __future__ import annotations

import argparse

from src.qar.commands.common import add_config_option, add_output_options, load, write_study
from src.qar.config import validate
from src.qar.models import LeakStudySpec, SamplingSpec, SearchSpec, SwappedStudySpec
from src.qar.storage import now_utc
from src.qar.studies import leak_curves, random_campaign, swapped_bound_check


def run_sample(args: argparse.Namespace) -> int:
    started = now_utc()
    config, studies = load(args)
    table = dict(studies.get("sampling", {}))
    if args.seed is not None:
        table["seed"] = args.seed
    if "search" in studies and "search" not in table:
        table["search"] = studies["search"]
    spec = SamplingSpec(base=config, **table)
    result = random_campaign(spec, threads=args.threads)
    write_study(
        args,
        result,
        started,
        tolerances=validate(config).solver.tolerances,
        seed=spec.seed,
        metadata={"count": spec.count, "ranges": {k: r.model_dump() for k, r in spec.ranges.items()}},
    )
    return 0


def run_leak(args: argparse.Namespace) -> int:
    started = now_utc()
    config, studies = load(args)
    spec = LeakStudySpec(base=config, **studies.get("leak_study", {}))
    result = leak_curves(spec, threads=args.threads)
    write_study(args, result, started, tolerances=validate(config).solver.tolerances)
    return 0


def run_swapped(args: argparse.Namespace) -> int:
    started = now_utc()
    config, studies = load(args)
    table = dict(studies.get("swapped_study", {}))
    if "search" in studies and "search" not in table:
        table["search"] = SearchSpec(**studies["search"])
    spec = SwappedStudySpec(base=config, **table)
    result = swapped_bound_check(spec, threads=args.threads)
    write_study(args, result, started, tolerances=validate(config).solver.tolerances)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    sample = subparsers.add_parser("sample", help="seeded random campaign")
    add_config_option(sample)
    add_output_options(sample, seed=True, threads=True)
    sample.set_defaults(handler=run_sample)

    leak = subparsers.add_parser("leak", help="heat-leak characteristic curves")
    add_config_option(leak)
    add_output_options(leak, threads=True)
    leak.set_defaults(handler=run_leak)

    swapped = subparsers.add_parser("swapped", help="swapped-topology bound check")
    add_config_option(swapped)
    add_output_options(swapped, threads=True)
    swapped.set_defaults(handler=run_swapped)
