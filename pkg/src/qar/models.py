"""Pydantic schemas for refrigerator configurations, study specs and output records.

All frequencies, temperatures and rates are dimensionless with
hbar = k_B = 1; after validation they are expressed in units of the
subsystem-A frequency ``omega_h``.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MediumName = Literal["TLS", "TLOS", "OMS"]
BathRole = Literal["work", "hot", "cold"]
Topology = Literal["standard", "swapped"]
SpectralLayout = Literal["ideal", "single_cycle", "explicit"]
LambShiftMode = Literal["zero", "numeric-PV"]
SolverMethod = Literal["auto", "populations", "full"]
SweepParameter = Literal["omega_c", "g", "ohmic_exponent", "T_w", "T_h", "T_c"]

BATH_ROLES: tuple[str, ...] = ("work", "hot", "cold")


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# ---------------------------------------------------------------------------
# Working medium and baths
# ---------------------------------------------------------------------------

class MediumKind(_Frozen):
    """Medium selector with Fock truncations (filled per kind when omitted)."""

    kind: MediumName
    truncation_A: Optional[int] = None
    truncation_B: Optional[int] = None


class FilterSpec(_Frozen):
    """Single Lorentzian filter reshaping a bath response."""

    center: float
    strength: float
    lamb_shift_mode: LambShiftMode = "zero"


class BathSpec(_Frozen):
    """One thermal reservoir.

    ``coupling_windows`` of ``None`` means the bath acts on the whole
    frequency axis.
    """

    role: Optional[BathRole] = None
    temperature: float
    kappa: float
    ohmic_exponent: float = 1.0
    cutoff: Optional[float] = None
    filter: Optional[FilterSpec] = None
    coupling_windows: Optional[list[tuple[float, float]]] = None


class Baths(_Frozen):
    """Exactly one bath per role."""

    work: BathSpec
    hot: BathSpec
    cold: BathSpec

    @model_validator(mode="before")
    @classmethod
    def _stamp_roles(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        stamped = dict(data)
        for role in BATH_ROLES:
            spec = stamped.get(role)
            if isinstance(spec, BathSpec):
                stamped[role] = spec.model_copy(update={"role": role})
            elif isinstance(spec, dict):
                stamped[role] = {**spec, "role": role}
        return stamped

    def by_role(self, role: str) -> BathSpec:
        return getattr(self, role)

    def items(self) -> list[tuple[str, BathSpec]]:
        return [(role, self.by_role(role)) for role in BATH_ROLES]


class LeakSpec(_Frozen):
    """Parasitic overlap of the hot and work baths on one transition."""

    overlap_target: Literal["work_transition", "hot_transition"]
    strength: float = Field(default=0.01, ge=0.0)


# ---------------------------------------------------------------------------
# Solver options
# ---------------------------------------------------------------------------

class Tolerances(_Frozen):
    """Numerical tolerances; all are overridable from the config file."""

    trace: float = 1e-12
    psd: float = 1e-10
    residual: float = 1e-12
    first_law: float = 1e-10
    second_law: float = 1e-10
    path_agreement: float = 1e-10
    deflation_agreement: float = 1e-8
    degeneracy: float = 1e-9
    truncation_population: float = 1e-8
    weak_coupling_ratio: float = 0.1
    gross_flux_floor: float = 1e-6


class SolverOptions(_Frozen):
    method: SolverMethod = "auto"
    audit: bool = False
    audit_max_dim: int = Field(default=1600, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)


# ---------------------------------------------------------------------------
# System configuration
# ---------------------------------------------------------------------------

class SystemConfig(_Frozen):
    """Full description of one refrigerator instance.

    In the swapped topology subsystem A has frequency ``omega_c`` and
    subsystem B has frequency ``omega_w``; ``omega_h`` is then only the
    frequency unit.
    """

    medium: MediumKind
    omega_h: float = 1.0
    omega_c: float
    omega_w: Optional[float] = None
    g: float
    topology: Topology = "standard"
    spectral_layout: SpectralLayout = "ideal"
    bath: Baths
    leak: Optional[LeakSpec] = None
    solver: SolverOptions = Field(default_factory=SolverOptions)
    frequency_scale_ghz: Optional[float] = None

    def temperatures(self) -> tuple[float, float, float]:
        """Return ``(T_w, T_h, T_c)``."""
        return (
            self.bath.work.temperature,
            self.bath.hot.temperature,
            self.bath.cold.temperature,
        )


class ValidatedConfig(SystemConfig):
    """A ``SystemConfig`` that passed ``validate``: defaults filled, windows explicit,
    frequencies in units of ``omega_h``."""


# ---------------------------------------------------------------------------
# Study specifications
# ---------------------------------------------------------------------------

class GridSpec(_Frozen):
    min: float
    max: float
    count: int = Field(ge=2)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _check_bounds(self) -> "GridSpec":
        if not self.max > self.min:
            raise ValueError("grid max must exceed grid min")
        if self.spacing == "log" and self.min <= 0:
            raise ValueError("log grid requires a positive min")
        return self


class SweepSpec(_Frozen):
    """One-parameter sweep over a base configuration."""

    base: SystemConfig
    parameter: SweepParameter
    values: Optional[list[float]] = None
    grid: Optional[GridSpec] = None
    outputs: frozenset[Literal["thermo", "correlations"]] = frozenset({"thermo"})

    @model_validator(mode="after")
    def _check_grid(self) -> "SweepSpec":
        if (self.values is None) == (self.grid is None):
            raise ValueError("give exactly one of 'values' or 'grid'")
        if self.values is not None:
            if len(self.values) < 2:
                raise ValueError("a sweep needs at least two values")
            steps = [b - a for a, b in zip(self.values, self.values[1:])]
            if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
                raise ValueError("sweep values must be strictly monotone")
        return self


class SearchSpec(_Frozen):
    """Bracket for the max-power search; ``None`` bounds span the cooling window."""

    omega_c_min: Optional[float] = None
    omega_c_max: Optional[float] = None
    coarse_points: int = Field(default=33, ge=5)
    bracket_width: float = Field(default=1e-5, gt=0)


class Range(_Frozen):
    low: float
    high: float
    log: bool = False

    @model_validator(mode="after")
    def _check(self) -> "Range":
        if not (self.high > self.low > 0):
            raise ValueError("range requires 0 < low < high")
        return self


def _default_ranges() -> dict[str, Range]:
    return {
        "T_c": Range(low=0.05, high=1.0, log=True),
        "T_h": Range(low=0.05, high=4.0),
        "T_w": Range(low=0.05, high=20.0),
        "kappa_w": Range(low=1e-3, high=1e-2, log=True),
        "kappa_h": Range(low=1e-3, high=1e-2, log=True),
        "kappa_c": Range(low=1e-3, high=1e-2, log=True),
        "g": Range(low=1e-3, high=0.15, log=True),
    }


class SamplingSpec(_Frozen):
    """Random campaign over ``{T_alpha, kappa_alpha, g}`` at ``omega_h = 1``.

    ``T_h`` is drawn above ``T_c`` and ``T_w`` above ``T_h`` within their ranges.
    """

    base: SystemConfig
    ranges: dict[str, Range] = Field(default_factory=_default_ranges)
    count: int = Field(default=10_000, ge=1)
    seed: int = 0
    search: SearchSpec = Field(default_factory=SearchSpec)
    histogram_bins: int = Field(default=50, ge=1)

    @field_validator("ranges")
    @classmethod
    def _known_keys(cls, v: dict[str, Range]) -> dict[str, Range]:
        required = set(_default_ranges())
        unknown = set(v) - required
        if unknown:
            raise ValueError(f"unknown sampling keys: {sorted(unknown)}")
        return {**_default_ranges(), **v}


class LeakStudySpec(_Frozen):
    base: SystemConfig
    g_values: list[float] = Field(default_factory=lambda: [0.04, 0.06, 0.08, 0.10])
    points: int = Field(default=60, ge=3)


class SwappedStudySpec(_Frozen):
    base: SystemConfig
    g_values: list[float] = Field(
        default_factory=lambda: [0.025, 0.05, 0.075, 0.1, 0.125]
    )
    search: SearchSpec = Field(default_factory=SearchSpec)


# ---------------------------------------------------------------------------
# Output records
# ---------------------------------------------------------------------------

class ReportFlags(_Frozen):
    cooling: bool
    degenerate_bohr: bool = False
    truncation_warning: bool = False
    weak_coupling_valid: bool = True
    laws_ok: bool = True


class SteadyStateRecord(_Frozen):
    """JSON detail record of one solved configuration."""

    config_hash: str
    medium: MediumName
    topology: Topology
    dimension: int
    method: str
    J_w: float
    J_h: float
    J_c: float
    sigma: float
    cop: Optional[float]
    carnot_cop: float
    cop_ratio: Optional[float]
    first_law_residual: float
    trace_error: float
    min_eigenvalue: float
    flags: ReportFlags
    populations: list[float]


class RunManifest(_Frozen):
    tool_version: str
    command: str
    config_hash: str
    seed: Optional[int] = None
    started_at: str
    finished_at: str
    tolerances: Tolerances
    row_count: int = 0
    failure_count: int = 0
    warnings: list[str] = Field(default_factory=list)
    metadata: dict[str, Any] = Field(default_factory=dict)
