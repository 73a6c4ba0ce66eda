"""Run-directory writer for study and solver output.

Layout of one run directory::

    manifest.json   RunManifest (exactly one per directory)
    rows.csv        one row per solved point   (or rows.json with --format json)
    summary.json    study summary
    hist.csv        histogram bins, random campaigns only
    ledger.csv      master-equation term ledger, single solves only
    detail.json     SteadyStateRecord, single solves only

Floats are written in full double precision scientific notation; rounding is
left to the consumer.  Everything except the manifest timestamps is a pure
function of the inputs.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from src.qar import __version__
from src.qar.errors import OutputExists
from src.qar.models import RunManifest, Tolerances

logger = logging.getLogger(__name__)

MANIFEST_NAME: str = "manifest.json"
RUN_FILES: tuple[str, ...] = (
    MANIFEST_NAME,
    "rows.csv",
    "rows.json",
    "summary.json",
    "hist.csv",
    "ledger.csv",
    "detail.json",
)
OutputFormat = str


# ---------------------------------------------------------------------------
# Value formatting
# ---------------------------------------------------------------------------

def format_value(value: Any) -> str:
    """CSV cell text for one value."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17e}"
    if isinstance(value, int):
        return str(value)
    return str(value)


def _json_ready(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return _json_ready(value.item())
    return value


def now_utc() -> str:
    return datetime.now(tz=timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def prepare_run_dir(path: Path | str, *, force: bool = False) -> Path:
    """Create ``path`` or reuse it when empty.

    With ``force`` the files a previous run wrote (``RUN_FILES``) are removed first.

    Raises:
        OutputExists: If ``path`` already holds a manifest and ``force`` is false.
    """
    run_dir = Path(path)
    if (run_dir / MANIFEST_NAME).exists() and not force:
        raise OutputExists(f"{run_dir} already contains a run; pass --force to overwrite")
    run_dir.mkdir(parents=True, exist_ok=True)
    if force:
        for name in RUN_FILES:
            stale = run_dir / name
            if stale.exists():
                logger.debug("removing stale %s", stale)
                stale.unlink()
    logger.debug("writing run to %s", run_dir)
    return run_dir


def write_rows_csv(path: Path, columns: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])


def write_json(path: Path, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_json_ready(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_rows(run_dir: Path, columns: Sequence[str], rows: list[dict[str, Any]], fmt: OutputFormat = "csv") -> Path:
    """Write ``rows.csv`` or ``rows.json`` and return its path."""
    if fmt == "json":
        target = run_dir / "rows.json"
        write_json(target, [{column: row.get(column) for column in columns} for row in rows])
    else:
        target = run_dir / "rows.csv"
        write_rows_csv(target, columns, rows)
    return target


def write_histogram(run_dir: Path, edges: Sequence[float], counts: Sequence[int]) -> Path:
    target = run_dir / "hist.csv"
    rows = [
        {"bin_low": lo, "bin_high": hi, "count": n}
        for lo, hi, n in zip(edges[:-1], edges[1:], counts)
    ]
    write_rows_csv(target, ("bin_low", "bin_high", "count"), rows)
    return target


def write_manifest(run_dir: Path, manifest: RunManifest) -> Path:
    target = run_dir / MANIFEST_NAME
    write_json(target, manifest.model_dump(mode="json"))
    logger.info("%s: %d rows, %d failures", manifest.command, manifest.row_count, manifest.failure_count)
    return target


def build_manifest(
    command: str,
    config_hash: str,
    started_at: str,
    *,
    seed: Optional[int] = None,
    tolerances: Optional[Tolerances] = None,
    row_count: int = 0,
    failure_count: int = 0,
    warnings: Optional[list[str]] = None,
    metadata: Optional[dict[str, Any]] = None,
) -> RunManifest:
    return RunManifest(
        tool_version=__version__,
        command=command,
        config_hash=config_hash,
        seed=seed,
        started_at=started_at,
        finished_at=now_utc(),
        tolerances=tolerances or Tolerances(),
        row_count=row_count,
        failure_count=failure_count,
        warnings=list(warnings or []),
        metadata=_json_ready(metadata or {}),
    )
