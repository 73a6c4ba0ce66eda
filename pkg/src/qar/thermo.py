"""Steady states and thermodynamic observables.

Heat currents follow ``J_alpha = Tr[(L_alpha rho) H]`` with heat flowing into
the working medium counted positive.  A configuration refrigerates when
``J_c > 0``, ``J_w > 0`` and ``J_h < 0``.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import csgraph
from scipy.sparse import linalg as sparse_linalg

from src.qar.config import config_hash, dressed_b_frequency, validate
from src.qar.errors import DegenerateSteadyState, NotRefrigerating, TemperatureOrderViolation
from src.qar.liouvillian import (
    LiouvillianSet,
    assemble,
    populations_decouple,
    rate_matrix,
    unvec,
    vec,
)
from src.qar.medium import DressedSystem, build_medium
from src.qar.models import (
    BATH_ROLES,
    ReportFlags,
    SolverOptions,
    SteadyStateRecord,
    SystemConfig,
    Tolerances,
    ValidatedConfig,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS: tuple[str, ...] = (
    "config_hash",
    "medium",
    "topology",
    "dimension",
    "method",
    "J_w",
    "J_h",
    "J_c",
    "sigma",
    "cop",
    "carnot_cop",
    "cop_ratio",
    "first_law_residual",
    "trace_error",
    "min_eigenvalue",
    "cooling",
    "degenerate_bohr",
    "truncation_warning",
    "weak_coupling_valid",
    "laws_ok",
)


# ---------------------------------------------------------------------------
# Steady state
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SteadyState:
    rho: np.ndarray
    method: str
    residual: float
    trace_error: float
    min_eigenvalue: float
    nullity: Optional[int] = None
    audit_difference: Optional[float] = None
    closed_classes: Optional[int] = None

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))


def closed_classes(w: sparse.spmatrix) -> int:
    """Number of closed communicating classes of the jump graph of ``w``.

    Each closed class carries its own stationary distribution, so this is
    the kernel dimension of the rate matrix.
    """
    d = w.shape[0]
    coo = sparse.coo_matrix(w)
    mask = (coo.row != coo.col) & (coo.data > 0)
    # edge j -> i for every positive rate W[i, j]
    graph = sparse.csr_matrix((np.ones(int(mask.sum())), (coo.col[mask], coo.row[mask])), shape=(d, d))
    count, labels = csgraph.connected_components(graph, directed=True, connection="strong")
    leaves = np.ones(count, dtype=bool)
    src, dst = graph.nonzero()
    leaves[labels[src][labels[src] != labels[dst]]] = False
    return int(leaves.sum())


def _deflated_solve(generator: sparse.spmatrix, row: int, trace_row: sparse.spmatrix) -> np.ndarray:
    """Solve ``L x = 0`` with equation ``row`` replaced by ``trace(x) = 1``."""
    deflated = sparse.lil_matrix(generator)
    deflated[row, :] = trace_row
    rhs = np.zeros(generator.shape[0], dtype=generator.dtype)
    rhs[row] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", sparse_linalg.MatrixRankWarning)
        try:
            solution = sparse_linalg.spsolve(deflated.tocsc(), rhs)
        except sparse_linalg.MatrixRankWarning as exc:
            raise DegenerateSteadyState("deflated generator is singular") from exc
    if not np.all(np.isfinite(solution)):
        raise DegenerateSteadyState("deflated generator is singular")
    return np.asarray(solution)


def _solve_populations(w: sparse.csr_matrix) -> np.ndarray:
    classes = closed_classes(w)
    if classes != 1:
        raise DegenerateSteadyState(f"population graph has {classes} closed classes")
    return np.real(_deflated_solve(w, 0, sparse.csr_matrix(np.ones((1, w.shape[0])))))


def _solve_full(lset: LiouvillianSet, agreement: float) -> np.ndarray:
    """Deflate on ``rho[0, 0]`` and on ``rho[d-1, d-1]``; the two must agree."""
    d = lset.dimension
    generator = lset.total
    trace_row = sparse.csr_matrix(vec(np.eye(d, dtype=complex)))
    first = _deflated_solve(generator, 0, trace_row)
    second = _deflated_solve(generator, d * d - 1, trace_row)
    spread = float(np.max(np.abs(first - second)))
    if spread > agreement:
        raise DegenerateSteadyState(f"deflations disagree by {spread:.3e}")
    rho = unvec(first, d)
    return 0.5 * (rho + rho.conj().T)


def nullity(lset: LiouvillianSet, rcond: float) -> int:
    """Dimension of the kernel of the total generator (dense SVD)."""
    return int(linalg.null_space(lset.total.toarray(), rcond=rcond).shape[1])


def steady_state(lset: LiouvillianSet, options: Optional[SolverOptions] = None) -> SteadyState:
    """Unique stationary state of ``lset``.

    ``method="auto"`` uses the population rate matrix when populations
    decouple from coherences and the full deflated solve otherwise.  Every
    solve checks uniqueness: the population path counts closed classes of
    the jump graph, the full path compares two deflations.  With
    ``audit=True`` (and ``d**2 <= audit_max_dim``) the kernel dimension is
    also computed by SVD and both paths are cross-checked.

    Raises:
        DegenerateSteadyState: If the stationary state is not unique.
    """
    options = options or SolverOptions()
    tol = options.tolerances
    method = options.method
    if method == "auto":
        method = "populations" if populations_decouple(lset) else "full"
    elif method == "populations" and not populations_decouple(lset):
        logger.warning("populations path requested but coherences couple; using full path")
        method = "full"
    logger.debug("steady state via %s path, d=%d", method, lset.dimension)

    if method == "populations":
        w = rate_matrix(lset)
        p = _solve_populations(w)
        scale = float(np.max(np.abs(w.data))) if w.nnz else 1.0
        residual = float(np.max(np.abs(w @ p))) / scale
        rho = np.diag(p).astype(complex)
        min_eigenvalue = float(p.min())
        classes: Optional[int] = 1
    else:
        rho = _solve_full(lset, tol.deflation_agreement)
        generator = lset.total
        scale = float(np.max(np.abs(generator.data))) if generator.nnz else 1.0
        residual = float(np.max(np.abs(generator @ vec(rho)))) / scale
        min_eigenvalue = float(np.linalg.eigvalsh(rho)[0])
        classes = None

    kernel_dim: Optional[int] = None
    audit_diff: Optional[float] = None
    if options.audit and lset.dimension**2 <= options.audit_max_dim:
        kernel_dim = nullity(lset, tol.degeneracy)
        if kernel_dim > 1:
            raise DegenerateSteadyState(f"generator kernel has dimension {kernel_dim}")
        if method == "populations":
            audit_diff = float(np.max(np.abs(_solve_full(lset, tol.deflation_agreement) - rho)))
            if audit_diff > tol.path_agreement:
                logger.warning("population and full paths differ by %.3e", audit_diff)

    return SteadyState(
        rho=rho,
        method=method,
        residual=residual,
        trace_error=float(abs(np.trace(rho) - 1.0)),
        min_eigenvalue=min_eigenvalue,
        nullity=kernel_dim,
        audit_difference=audit_diff,
        closed_classes=classes,
    )


# ---------------------------------------------------------------------------
# Currents and figures of merit
# ---------------------------------------------------------------------------

def heat_currents(lset: LiouvillianSet, rho: np.ndarray, hamiltonian: np.ndarray) -> dict[str, float]:
    """``{role: Tr[(L_role rho) H]}`` for the three baths."""
    d = lset.dimension
    v = vec(rho)
    return {
        role: float(np.real(np.trace(unvec(lset.blocks[role] @ v, d) @ hamiltonian)))
        for role in BATH_ROLES
    }


def population_currents(lset: LiouvillianSet, populations: np.ndarray) -> dict[str, float]:
    """Heat currents of a diagonal state: ``sum_i E_i (W_role p)_i``."""
    return {
        role: float(lset.energies @ (rate_matrix(lset, (role,)) @ populations))
        for role in BATH_ROLES
    }


def gross_energy_flux(lset: LiouvillianSet, rho: np.ndarray, energies: np.ndarray) -> float:
    """Total one-way energy traffic ``sum |E_i - E_j| W_ij p_j`` over all baths."""
    w = sparse.coo_matrix(rate_matrix(lset))
    off = w.row != w.col
    rows, cols, rates = w.row[off], w.col[off], w.data[off]
    p = np.real(np.diag(rho))
    return float(np.sum(rates * np.abs(energies[rows] - energies[cols]) * p[cols]))


def carnot_cop(t_w: float, t_h: float, t_c: float) -> float:
    """``(T_w - T_h) T_c / ((T_h - T_c) T_w)``.

    Raises:
        TemperatureOrderViolation: Unless ``T_w > T_h > T_c > 0``.
    """
    if not (t_w > t_h > t_c > 0):
        raise TemperatureOrderViolation([("bath", f"requires T_w > T_h > T_c > 0, got {t_w}, {t_h}, {t_c}")])
    return (t_w - t_h) * t_c / ((t_h - t_c) * t_w)


def cooling_window(config: SystemConfig) -> float:
    """Largest dressed cold-side frequency that still refrigerates.

    Standard: ``eps_c * w_w`` with ``w_h = w~_c + w_w``, i.e. ``eps_c/(1+eps_c) w_h``.
    Swapped: ``eps_c * w~_w`` bounds the subsystem-A frequency ``omega_c``.
    """
    eps = carnot_cop(*config.temperatures())
    if config.topology == "swapped":
        assert config.omega_w is not None
        return eps * dressed_b_frequency(config.medium.kind, config.omega_w, config.g)
    return eps / (1.0 + eps) * config.omega_h


def cooling_window_omega_c(config: SystemConfig) -> Optional[float]:
    """Bare ``omega_c`` at the window edge, or ``None`` if the coupling closes the window."""
    edge = cooling_window(config)
    if config.topology == "swapped" or config.medium.kind != "TLS":
        return edge
    squared = edge * edge - 4.0 * config.g * config.g
    return math.sqrt(squared) if squared > 0 else None


class CycleKind(str, enum.Enum):
    """Cooling cycles of the coupled-qubit level scheme and their inverses."""

    COOLING_4324 = "cooling_4324"
    COOLING_3213 = "cooling_3213"
    SINGLE_43214 = "single_43214"
    INVERSE_4324 = "inverse_4324"
    INVERSE_3213 = "inverse_3213"
    INVERSE_43214 = "inverse_43214"

    @property
    def inverse(self) -> bool:
        return self.value.startswith("inverse")


def cycle_entropy(
    omega_h: float,
    omega_c_tilde: float,
    omega_w: float,
    temperatures: tuple[float, float, float],
    cycle: CycleKind = CycleKind.COOLING_4324,
) -> float:
    """Entropy produced in the baths per completed cycle.

    The three-transition cycles give ``-w~_c/T_c - w_w/T_w + w_h/T_h``; the
    single four-transition cycle absorbs two cold quanta and releases
    ``w_+ = w_h + w~_c`` to the hot bath.
    """
    t_w, t_h, t_c = temperatures
    if cycle in (CycleKind.SINGLE_43214, CycleKind.INVERSE_43214):
        omega_plus = omega_h + omega_c_tilde
        sigma = -2.0 * omega_c_tilde / t_c - omega_w / t_w + omega_plus / t_h
    else:
        sigma = -omega_c_tilde / t_c - omega_w / t_w + omega_h / t_h
    return -sigma if cycle.inverse else sigma


@dataclass(frozen=True)
class CopEntropy:
    cop: Optional[float]
    cop_ratio: Optional[float]
    sigma: float


def is_cooling(j_w: float, j_h: float, j_c: float) -> bool:
    return j_c > 0 and j_w > 0 and j_h < 0


def cop_and_entropy(
    currents: dict[str, float],
    temperatures: tuple[float, float, float],
    carnot: Optional[float] = None,
    *,
    strict: bool = False,
) -> CopEntropy:
    """COP ``J_c / J_w`` on the cooling branch and ``sigma = -sum J/T``.

    Raises:
        NotRefrigerating: If ``strict`` and the cooling pattern is absent.
    """
    t_w, t_h, t_c = temperatures
    j_w, j_h, j_c = currents["work"], currents["hot"], currents["cold"]
    sigma = -(j_w / t_w + j_h / t_h + j_c / t_c)
    if not is_cooling(j_w, j_h, j_c):
        if strict:
            raise NotRefrigerating(f"J_w={j_w:.3e}, J_h={j_h:.3e}, J_c={j_c:.3e}")
        return CopEntropy(None, None, sigma)
    cop = j_c / j_w
    ratio = cop / carnot if carnot and math.isfinite(carnot) else None
    return CopEntropy(cop, ratio, sigma)


# ---------------------------------------------------------------------------
# Full analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SteadyStateReport:
    """Solved configuration with currents, figures of merit and flags."""

    config: ValidatedConfig
    config_hash: str
    system: DressedSystem
    liouvillian: LiouvillianSet
    state: SteadyState
    J_w: float
    J_h: float
    J_c: float
    sigma: float
    cop: Optional[float]
    carnot_cop: float
    cop_ratio: Optional[float]
    first_law_residual: float
    law_scale: float
    flags: ReportFlags

    @property
    def rho(self) -> np.ndarray:
        return self.state.rho

    @property
    def currents(self) -> dict[str, float]:
        return {"work": self.J_w, "hot": self.J_h, "cold": self.J_c}

    def record(self) -> SteadyStateRecord:
        return SteadyStateRecord(
            config_hash=self.config_hash,
            medium=self.config.medium.kind,
            topology=self.config.topology,
            dimension=self.system.dimension,
            method=self.state.method,
            J_w=self.J_w,
            J_h=self.J_h,
            J_c=self.J_c,
            sigma=self.sigma,
            cop=self.cop,
            carnot_cop=self.carnot_cop,
            cop_ratio=self.cop_ratio,
            first_law_residual=self.first_law_residual,
            trace_error=self.state.trace_error,
            min_eigenvalue=self.state.min_eigenvalue,
            flags=self.flags,
            populations=[float(p) for p in self.state.populations],
        )

    def row(self) -> dict[str, object]:
        """Flat row keyed by ``CSV_COLUMNS``."""
        record = self.record().model_dump()
        flags = record.pop("flags")
        record.pop("populations")
        record.update(flags)
        return {column: record[column] for column in CSV_COLUMNS}


def _oscillator_flags(
    system: DressedSystem, populations: np.ndarray, config: SystemConfig, tol: Tolerances
) -> tuple[bool, bool]:
    """``(truncation_warning, weak_coupling_valid)``."""
    if system.kind == "TLS":
        return False, True
    grid = populations.reshape(system.dim_a, system.dim_b)
    top_b = float(grid[:, -2:].sum())
    top_a = float(grid[-2:, :].sum()) if system.kind == "OMS" else 0.0
    truncation = max(top_a, top_b) > tol.truncation_population
    mean_b = float(np.sum(grid.sum(axis=0) * np.arange(system.dim_b)))
    weak = config.g**2 * mean_b < tol.weak_coupling_ratio * system.omega_b**2
    return truncation, weak


def analyze(config: SystemConfig, *, enforce_ordering: bool = True) -> SteadyStateReport:
    """Validate, dress, assemble, solve and evaluate one configuration."""
    validated = validate(config, enforce_ordering=enforce_ordering)
    tol = validated.solver.tolerances
    system = build_medium(validated)
    lset = assemble(system, validated)
    state = steady_state(lset, validated.solver)
    if state.method == "populations":
        currents = population_currents(lset, state.populations)
    else:
        currents = heat_currents(lset, state.rho, system.hamiltonian)
    temperatures = validated.temperatures()
    try:
        carnot = carnot_cop(*temperatures)
    except TemperatureOrderViolation:
        carnot = math.nan
    merit = cop_and_entropy(currents, temperatures, carnot)

    j_w, j_h, j_c = currents["work"], currents["hot"], currents["cold"]
    residual = j_w + j_h + j_c
    scale = max(
        max(abs(j_w), abs(j_h), abs(j_c)),
        tol.gross_flux_floor * gross_energy_flux(lset, state.rho, system.energies),
    )
    laws_ok = abs(residual) <= tol.first_law * max(scale, 1e-300) and merit.sigma >= -tol.second_law * max(
        scale, 1e-300
    )
    if not laws_ok:
        logger.warning("thermodynamic law check failed: residual %.3e, sigma %.3e", residual, merit.sigma)
    truncation, weak = _oscillator_flags(system, state.populations, validated, tol)
    if truncation:
        logger.warning("top Fock levels carry more than %.1e population", tol.truncation_population)
    flags = ReportFlags(
        cooling=is_cooling(j_w, j_h, j_c),
        degenerate_bohr=lset.degenerate_bohr,
        truncation_warning=truncation,
        weak_coupling_valid=weak,
        laws_ok=laws_ok,
    )
    return SteadyStateReport(
        config=validated,
        config_hash=config_hash(validated),
        system=system,
        liouvillian=lset,
        state=state,
        J_w=j_w,
        J_h=j_h,
        J_c=j_c,
        sigma=merit.sigma,
        cop=merit.cop,
        carnot_cop=carnot,
        cop_ratio=merit.cop_ratio,
        first_law_residual=residual,
        law_scale=scale,
        flags=flags,
    )
