"""Parameter studies: sweeps, max-power searches, random campaigns, heat leaks, swapped topology.

Every study returns a ``StudyResult`` whose rows are produced in a fixed order
regardless of ``threads``.  Per-row failures are recorded in the ``error``
column and never abort a study.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from src.qar.config import config_hash, with_overrides
from src.qar.correlations import CORRELATION_COLUMNS, correlation_report
from src.qar.errors import ConfigError, NoCoolingInInterval, QarError
from src.qar.models import (
    LeakStudySpec,
    SamplingSpec,
    SearchSpec,
    SweepSpec,
    SwappedStudySpec,
    SystemConfig,
)
from src.qar.thermo import CSV_COLUMNS, SteadyStateReport, analyze, carnot_cop, cooling_window_omega_c

logger = logging.getLogger(__name__)

AUDIT_EVERY: int = 32
COLD_BATH_DIMENSION: int = 1
INV_PHI: float = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQUARE: float = (3.0 - math.sqrt(5.0)) / 2.0

_ROW_ERRORS = (QarError, ValidationError, ValueError, np.linalg.LinAlgError, ArithmeticError)


@dataclass
class StudyResult:
    """Tabular study output with a summary recomputable from ``rows``."""

    name: str
    columns: tuple[str, ...]
    rows: list[dict[str, Any]]
    config_hash: str
    summary: dict[str, Any] = field(default_factory=dict)
    histogram: Optional[tuple[list[float], list[int]]] = None
    warnings: list[str] = field(default_factory=list)

    @property
    def failure_count(self) -> int:
        return sum(1 for row in self.rows if row.get("error"))


def efficiency_bound(carnot: float, cold_dimension: int = COLD_BATH_DIMENSION) -> float:
    """Efficiency-at-maximum-power bound ``eps_c d / (d + 1)``."""
    return carnot * cold_dimension / (cold_dimension + 1)


def _map_ordered(fn: Callable[[Any], dict[str, Any]], items: Sequence[Any], threads: int) -> list[dict[str, Any]]:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _with_audit(config: SystemConfig) -> SystemConfig:
    return config.model_copy(update={"solver": config.solver.model_copy(update={"audit": True})})


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def grid_values(spec: SweepSpec) -> list[float]:
    if spec.values is not None:
        return list(spec.values)
    assert spec.grid is not None
    grid = spec.grid
    if grid.spacing == "log":
        return [float(v) for v in np.geomspace(grid.min, grid.max, grid.count)]
    return [float(v) for v in np.linspace(grid.min, grid.max, grid.count)]


def apply_parameter(base: SystemConfig, parameter: str, value: float) -> SystemConfig:
    return with_overrides(base, **{parameter: value})


def sweep_columns(parameter: str, correlations: bool) -> tuple[str, ...]:
    extra = CORRELATION_COLUMNS if correlations else ()
    return ("index", parameter, *CSV_COLUMNS, *extra, "error")


def _empty(columns: Iterable[str]) -> dict[str, Any]:
    return {column: None for column in columns}


def solve_row(
    index: int,
    config: SystemConfig,
    extra: dict[str, Any],
    columns: tuple[str, ...],
    correlations: bool = False,
) -> dict[str, Any]:
    """Solve one configuration into a row keyed by ``columns``."""
    row = _empty(columns)
    row.update(index=index, **extra)
    try:
        report = analyze(config)
        row.update(report.row())
        if correlations:
            row.update(correlation_report(report.rho, report.system).row())
        row["error"] = ""
        if not report.flags.weak_coupling_valid:
            logger.warning("row %d: outside the weak-coupling regime of the oscillator medium", index)
    except _ROW_ERRORS as exc:
        logger.warning("row %d failed: %s", index, exc)
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def summarize_rows(rows: list[dict[str, Any]], parameter: str) -> dict[str, Any]:
    """Max-power point of a sweep and the d_c = 1 efficiency bound."""
    cooling = [r for r in rows if not r.get("error") and r.get("cooling")]
    summary: dict[str, Any] = {
        "rows": len(rows),
        "failures": sum(1 for r in rows if r.get("error")),
        "cooling_rows": len(cooling),
        "laws_ok": all(r.get("laws_ok") for r in rows if not r.get("error")),
    }
    if not cooling:
        return summary
    best = max(cooling, key=lambda r: r["J_c"])
    bound = efficiency_bound(best["carnot_cop"])
    summary.update(
        {
            "parameter_star": best[parameter],
            "J_c_star": best["J_c"],
            "cop_star": best["cop"],
            "carnot_cop": best["carnot_cop"],
            "bound": bound,
            "surpassed": best["cop"] > bound,
        }
    )
    return summary


def run_sweep(spec: SweepSpec, *, threads: int = 1) -> StudyResult:
    """Solve every grid point of a one-parameter sweep."""
    values = grid_values(spec)
    correlations = "correlations" in spec.outputs
    columns = sweep_columns(spec.parameter, correlations)

    def task(item: tuple[int, float]) -> dict[str, Any]:
        index, value = item
        try:
            config = apply_parameter(spec.base, spec.parameter, value)
        except _ROW_ERRORS as exc:
            row = _empty(columns)
            row.update(index=index, **{spec.parameter: value}, error=f"{type(exc).__name__}: {exc}")
            return row
        if index % AUDIT_EVERY == 0:
            config = _with_audit(config)
        return solve_row(index, config, {spec.parameter: value}, columns, correlations)

    rows = _map_ordered(task, list(enumerate(values)), threads)
    logger.info("sweep over %s: %d rows", spec.parameter, len(rows))
    return StudyResult(
        name="sweep",
        columns=columns,
        rows=rows,
        config_hash=config_hash(spec.base),
        summary=summarize_rows(rows, spec.parameter),
    )


# ---------------------------------------------------------------------------
# Maximum cooling power
# ---------------------------------------------------------------------------

MAXPOWER_COLUMNS: tuple[str, ...] = ("index", "omega_c", "J_c", "cop", "cop_ratio", "cooling", "error")


@dataclass(frozen=True, eq=False)
class MaxPowerResult:
    omega_c: float
    J_c: float
    cop: float
    carnot_cop: float
    cop_ratio: float
    bound: float
    surpassed: bool
    evaluations: int
    report: SteadyStateReport
    coarse: tuple[dict[str, Any], ...] = ()


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Bracket ``[c, d]`` of width ``<= tol`` around the maximum of a unimodal ``f``.

    Equal values keep the left part of the bracket.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return a, b
    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(steps - 1):
        if yc >= yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    return (a, d) if yc >= yd else (c, b)


def search_interval(base: SystemConfig, search: Optional[SearchSpec]) -> tuple[float, float]:
    """``omega_c`` interval; missing bounds come from the cooling window."""
    search = search or SearchSpec()
    edge = cooling_window_omega_c(base)
    if edge is None and search.omega_c_max is None:
        raise NoCoolingInInterval("coupling closes the cooling window")
    hi = search.omega_c_max if search.omega_c_max is not None else edge
    lo = search.omega_c_min if search.omega_c_min is not None else 1e-3 * hi
    if not hi > lo > 0:
        raise NoCoolingInInterval(f"empty search interval ({lo}, {hi})")
    return lo, hi


def max_power_point(base: SystemConfig, search: Optional[SearchSpec] = None) -> MaxPowerResult:
    """Maximise ``J_c`` over ``omega_c``: coarse scan, then golden-section refinement.

    ``coarse`` keeps one ``MAXPOWER_COLUMNS`` row per scanned ``omega_c``,
    failed solves included.

    Raises:
        NoCoolingInInterval: If no scanned point refrigerates.
    """
    search = search or SearchSpec()
    lo, hi = search_interval(base, search)
    cache: dict[float, Optional[SteadyStateReport]] = {}
    errors: dict[float, str] = {}

    def solve(omega_c: float) -> Optional[SteadyStateReport]:
        if omega_c not in cache:
            try:
                cache[omega_c] = analyze(with_overrides(base, omega_c=omega_c))
            except _ROW_ERRORS as exc:
                logger.debug("max-power evaluation at omega_c=%.6g failed: %s", omega_c, exc)
                cache[omega_c] = None
                errors[omega_c] = f"{type(exc).__name__}: {exc}"
        return cache[omega_c]

    def power(omega_c: float) -> float:
        report = solve(omega_c)
        return report.J_c if report is not None and report.flags.cooling else -math.inf

    grid = [float(x) for x in np.linspace(lo, hi, search.coarse_points)]
    values = [power(x) for x in grid]
    coarse = tuple(_coarse_row(k, x, cache[x], errors.get(x, "")) for k, x in enumerate(grid))
    best = int(np.argmax(values))
    if not math.isfinite(values[best]):
        raise NoCoolingInInterval(f"no refrigeration for omega_c in [{lo:.6g}, {hi:.6g}]")

    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, len(grid) - 1)]
    c, d = golden_section_max(power, left, right, search.bracket_width)
    candidates = [grid[best], c, d, 0.5 * (c + d)]
    omega_star = max(candidates, key=lambda x: (power(x), -x))
    report = solve(omega_star)
    assert report is not None and report.cop is not None
    ratio = report.cop / report.carnot_cop
    bound = efficiency_bound(report.carnot_cop)
    return MaxPowerResult(
        omega_c=omega_star,
        J_c=report.J_c,
        cop=report.cop,
        carnot_cop=report.carnot_cop,
        cop_ratio=ratio,
        bound=bound,
        surpassed=report.cop > bound,
        evaluations=len(cache),
        report=report,
        coarse=coarse,
    )


def _coarse_row(index: int, omega_c: float, report: Optional[SteadyStateReport], error: str) -> dict[str, Any]:
    row = _empty(MAXPOWER_COLUMNS)
    row.update(index=index, omega_c=omega_c, error=error)
    if report is not None:
        row.update(
            J_c=report.J_c,
            cop=report.cop,
            cop_ratio=report.cop_ratio,
            cooling=report.flags.cooling,
        )
    return row


# ---------------------------------------------------------------------------
# Random campaign
# ---------------------------------------------------------------------------

SAMPLE_KEYS: tuple[str, ...] = ("T_w", "T_h", "T_c", "kappa_w", "kappa_h", "kappa_c", "g")
CAMPAIGN_COLUMNS: tuple[str, ...] = (
    "index",
    *SAMPLE_KEYS,
    "omega_c_star",
    "J_c_star",
    "cop_star",
    "carnot_cop",
    "cop_ratio",
    "surpassed",
    "error",
)


def _draw(rng: np.random.Generator, low: float, high: float, log: bool) -> float:
    if log:
        return float(math.exp(rng.uniform(math.log(low), math.log(high))))
    return float(rng.uniform(low, high))


def draw_samples(spec: SamplingSpec) -> list[dict[str, float]]:
    """All campaign samples, drawn up front from one seeded generator.

    ``T_h`` is drawn above ``T_c`` and ``T_w`` above ``T_h``.
    """
    rng = np.random.default_rng(spec.seed)
    r = spec.ranges
    samples = []
    for _ in range(spec.count):
        t_c = _draw(rng, r["T_c"].low, r["T_c"].high, r["T_c"].log)
        t_h = _draw(rng, max(r["T_h"].low, t_c), r["T_h"].high, r["T_h"].log)
        t_w = _draw(rng, max(r["T_w"].low, t_h), r["T_w"].high, r["T_w"].log)
        sample = {"T_w": t_w, "T_h": t_h, "T_c": t_c}
        for key in ("kappa_w", "kappa_h", "kappa_c", "g"):
            sample[key] = _draw(rng, r[key].low, r[key].high, r[key].log)
        samples.append(sample)
    return samples


def power_law_fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of ``y = A x**k`` in log-log space; returns ``(k, A)``."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(math.exp(intercept))


def random_campaign(spec: SamplingSpec, *, threads: int = 1) -> StudyResult:
    """Max-power point for every random sample plus a histogram of ``eps*/eps_c``."""
    samples = draw_samples(spec)

    def task(item: tuple[int, dict[str, float]]) -> dict[str, Any]:
        index, sample = item
        row = _empty(CAMPAIGN_COLUMNS)
        row.update(index=index, **sample)
        try:
            result = max_power_point(with_overrides(spec.base, **sample), spec.search)
            row.update(
                omega_c_star=result.omega_c,
                J_c_star=result.J_c,
                cop_star=result.cop,
                carnot_cop=result.carnot_cop,
                cop_ratio=result.cop_ratio,
                surpassed=result.surpassed,
                error="",
            )
        except _ROW_ERRORS as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    rows = _map_ordered(task, list(enumerate(samples)), threads)
    ratios = np.array([r["cop_ratio"] for r in rows if not r["error"]], dtype=float)
    counts, edges = np.histogram(ratios, bins=spec.histogram_bins, range=(0.0, 1.0))
    summary = summarize_campaign(rows)
    summary["seed"] = spec.seed
    return StudyResult(
        name="sample",
        columns=CAMPAIGN_COLUMNS,
        rows=rows,
        config_hash=config_hash(spec.base),
        summary=summary,
        histogram=([float(e) for e in edges], [int(c) for c in counts]),
    )


def summarize_campaign(rows: list[dict[str, Any]], near_carnot: float = 0.5) -> dict[str, Any]:
    ok = [r for r in rows if not r["error"]]
    ratios = [r["cop_ratio"] for r in ok]
    summary: dict[str, Any] = {
        "samples": len(rows),
        "failures": len(rows) - len(ok),
        "max_ratio": max(ratios) if ratios else None,
        "above_bound": sum(1 for r in ok if r["surpassed"]),
        "above_carnot": sum(1 for x in ratios if x > 1.0),
    }
    summary["fraction_above_bound"] = summary["above_bound"] / len(ok) if ok else 0.0
    tail = [r for r in ok if r["cop_ratio"] > near_carnot]
    if len(tail) >= 2 and len({r["g"] for r in tail}) >= 2:
        exponent, prefactor = power_law_fit([r["g"] for r in tail], [r["omega_c_star"] for r in tail])
        summary.update(omega_c_star_exponent=exponent, omega_c_star_prefactor=prefactor)
    return summary


# ---------------------------------------------------------------------------
# Heat leaks
# ---------------------------------------------------------------------------

LEAK_COLUMNS: tuple[str, ...] = (
    "index",
    "series",
    "g",
    "omega_c",
    "J_c",
    "J_c_norm",
    "cop",
    "cop_ratio",
    "cooling",
    "laws_ok",
    "error",
)


def _leak_curve(base: SystemConfig, g: float, points: int, series: str, start: int) -> list[dict[str, Any]]:
    config = with_overrides(base, g=g)
    edge = cooling_window_omega_c(config.model_copy(update={"leak": None}))
    rows: list[dict[str, Any]] = []
    if edge is None:
        return rows
    for k, omega_c in enumerate(np.linspace(0.02 * edge, 0.999 * edge, points)):
        row = _empty(LEAK_COLUMNS)
        row.update(index=start + k, series=series, g=g, omega_c=float(omega_c))
        try:
            report = analyze(with_overrides(config, omega_c=float(omega_c)))
            row.update(
                J_c=report.J_c,
                cop=report.cop,
                cop_ratio=report.cop_ratio,
                cooling=report.flags.cooling,
                laws_ok=report.flags.laws_ok,
                error="",
            )
        except _ROW_ERRORS as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    cooling = [r for r in rows if r["cooling"]]
    j0 = max((r["J_c"] for r in cooling), default=None)
    for r in rows:
        if j0 and r["J_c"] is not None:
            r["J_c_norm"] = r["J_c"] / j0
    return rows


def closure_gap(rows: list[dict[str, Any]]) -> Optional[float]:
    """``1 - max(eps/eps_c)`` on one curve; ``None`` if nothing cools."""
    ratios = [r["cop_ratio"] for r in rows if r["cooling"] and r["cop_ratio"] is not None]
    return 1.0 - max(ratios) if ratios else None


def leak_curves(spec: LeakStudySpec, *, threads: int = 1) -> StudyResult:
    """Parametric ``(J_c/J_0, eps/eps_c)`` curves per coupling, with and without the leak."""
    if spec.base.leak is None:
        raise ConfigError([("leak", "the leak study needs a configured leak")])
    control = spec.base.model_copy(update={"leak": None})
    jobs = [(g, spec.base, "leak") for g in spec.g_values] + [(g, control, "control") for g in spec.g_values]

    def task(item: tuple[int, tuple[float, SystemConfig, str]]) -> dict[str, Any]:
        k, (g, cfg, series) = item
        return {"rows": _leak_curve(cfg, g, spec.points, series, k * spec.points), "g": g, "series": series}

    curves = _map_ordered(task, list(enumerate(jobs)), threads)
    rows = [row for curve in curves for row in curve["rows"]]
    gaps = {
        series: {str(c["g"]): closure_gap(c["rows"]) for c in curves if c["series"] == series}
        for series in ("leak", "control")
    }
    return StudyResult(
        name="leak",
        columns=LEAK_COLUMNS,
        rows=rows,
        config_hash=config_hash(spec.base),
        summary={"overlap_target": spec.base.leak.overlap_target, "closure_gap": gaps},
    )


# ---------------------------------------------------------------------------
# Swapped topology
# ---------------------------------------------------------------------------

SWAPPED_COLUMNS: tuple[str, ...] = (
    "index",
    "g",
    "omega_c_star",
    "J_c_star",
    "cop_star",
    "carnot_cop",
    "cop_ratio",
    "bound_ratio",
    "within_bound",
    "error",
)


def swapped_bound_check(spec: SwappedStudySpec, *, threads: int = 1, slack: float = 1e-3) -> StudyResult:
    """Efficiency at maximum power of the swapped topology against ``eps_c / 2``."""
    bound_ratio = COLD_BATH_DIMENSION / (COLD_BATH_DIMENSION + 1)

    def task(item: tuple[int, float]) -> dict[str, Any]:
        index, g = item
        row = _empty(SWAPPED_COLUMNS)
        row.update(index=index, g=g, bound_ratio=bound_ratio)
        try:
            result = max_power_point(with_overrides(spec.base, g=g), spec.search)
            row.update(
                omega_c_star=result.omega_c,
                J_c_star=result.J_c,
                cop_star=result.cop,
                carnot_cop=result.carnot_cop,
                cop_ratio=result.cop_ratio,
                within_bound=result.cop_ratio <= bound_ratio * (1.0 + slack),
                error="",
            )
        except _ROW_ERRORS as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    rows = _map_ordered(task, list(enumerate(spec.g_values)), threads)
    ok = [r for r in rows if not r["error"]]
    t_w, t_h, t_c = spec.base.temperatures()
    return StudyResult(
        name="swapped",
        columns=SWAPPED_COLUMNS,
        rows=rows,
        config_hash=config_hash(spec.base),
        summary={
            "carnot_cop": carnot_cop(t_w, t_h, t_c),
            "bound_ratio": bound_ratio,
            "all_within_bound": bool(ok) and all(r["within_bound"] for r in ok),
        },
    )
