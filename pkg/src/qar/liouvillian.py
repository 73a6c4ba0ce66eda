"""Global master-equation superoperators in the dressed basis.

Density matrices are vectorised column-stacked (``order="F"``), so
``vec(A X B) = (B^T kron A) vec(X)``.  Superoperators are ``scipy.sparse``
CSR matrices built on first use: the population path only needs the jump
channels, and a converged oscillator medium has ``d**2`` in the millions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse

from src.qar.errors import ConfigError, NegativeRate
from src.qar.medium import ADJOINT, DressedSystem, LOWERING_LABELS
from src.qar.models import BATH_ROLES, BathSpec, LeakSpec, SystemConfig
from src.qar.spectra import bath_response

logger = logging.getLogger(__name__)

_ZERO = 0.0

# label -> (weight attribute on DressedSystem)
_A_LABELS: dict[str, str] = {
    "a": "c2",
    "a_dag": "c2",
    "a_b_dag": "s2",
    "a_dag_b": "s2",
    "a_b": "s2",
    "a_dag_b_dag": "s2",
}
_B_LABELS: dict[str, str] = {"b": "c2", "b_dag": "c2"}

# overlap target -> (parasitic bath, bath whose windows gate it, leaked labels)
_PARASITIC: dict[str, tuple[str, str, tuple[str, ...]]] = {
    "work_transition": ("hot", "work", ("a_b_dag", "a_dag_b")),
    "hot_transition": ("work", "hot", ("a", "a_dag")),
}


@dataclass(frozen=True)
class LedgerTerm:
    """One (bath, label, Bohr component) entry of the master equation."""

    bath: str
    label: str
    omega: float
    weight: float
    response: float
    rate: float
    parasitic: bool = False


@dataclass(frozen=True, eq=False)
class LiouvillianSet:
    """Per-bath jump channels, with their dissipator blocks built lazily.

    ``channels[role]`` holds the combined jump operators ``X`` (rates folded
    in) whose dissipators make up ``blocks[role]``.
    """

    dimension: int
    energies: np.ndarray
    channels: dict[str, list[tuple[float, sparse.csr_matrix]]]
    ledger: tuple[LedgerTerm, ...]
    topology: str
    degenerate_bohr: bool = False
    metadata: dict[str, str] = field(default_factory=dict)

    @cached_property
    def blocks(self) -> dict[str, sparse.csr_matrix]:
        size = self.dimension**2
        out: dict[str, sparse.csr_matrix] = {}
        for role in BATH_ROLES:
            block = sparse.csr_matrix((size, size), dtype=complex)
            for _, op in self.channels[role]:
                block = block + dissipator(op)
            out[role] = block.tocsr()
        return out

    @cached_property
    def coherent(self) -> sparse.csr_matrix:
        # diagonal H: element (i, j) of rho picks up -i (E_i - E_j)
        gaps = self.energies[:, None] - self.energies[None, :]
        return sparse.diags(-1j * vec(gaps), format="csr")

    @property
    def total(self) -> sparse.csr_matrix:
        return (self.coherent + self.dissipative_total()).tocsr()

    def dissipative_total(self) -> sparse.csr_matrix:
        out = sparse.csr_matrix((self.dimension**2, self.dimension**2), dtype=complex)
        for role in BATH_ROLES:
            out = out + self.blocks[role]
        return out.tocsr()


# ---------------------------------------------------------------------------
# Superoperator primitives
# ---------------------------------------------------------------------------

def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dimension: int) -> np.ndarray:
    return np.asarray(v).reshape((dimension, dimension), order="F")


def dissipator(op: np.ndarray, rate: float = 1.0) -> sparse.csr_matrix:
    """``rate * (O rho O^dag - 1/2 {O^dag O, rho})`` as a sparse superoperator.

    Raises:
        NegativeRate: If ``rate < 0``.
    """
    if rate < 0:
        raise NegativeRate(f"dissipator rate must be >= 0, got {rate}")
    o = sparse.csr_matrix(op, dtype=complex)
    d = o.shape[0]
    eye = sparse.identity(d, dtype=complex, format="csr")
    odo = (o.conj().T @ o).tocsr()
    sup = sparse.kron(o.conj(), o) - 0.5 * sparse.kron(eye, odo) - 0.5 * sparse.kron(odo.T, eye)
    return (rate * sup).tocsr()


def coherent_generator(hamiltonian: np.ndarray) -> sparse.csr_matrix:
    """``-i [H, rho]`` as a sparse superoperator."""
    h = sparse.csr_matrix(hamiltonian, dtype=complex)
    eye = sparse.identity(h.shape[0], dtype=complex, format="csr")
    return (-1j * (sparse.kron(eye, h) - sparse.kron(h.T, eye))).tocsr()


def trace_annihilation_error(superop: sparse.spmatrix) -> float:
    """``max |vec(I)^dag L|``: zero for a trace-preserving generator."""
    d = int(round(np.sqrt(superop.shape[0])))
    row = vec(np.eye(d, dtype=complex)).conj() @ superop
    return float(np.max(np.abs(row))) if row.size else 0.0


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

Term = tuple[LedgerTerm, sparse.csr_matrix]


def _role_labels(topology: str) -> dict[str, dict[str, str]]:
    if topology == "swapped":
        return {"work": _B_LABELS, "hot": _A_LABELS, "cold": _A_LABELS}
    return {"work": _A_LABELS, "hot": _A_LABELS, "cold": _B_LABELS}


def _bath_terms(system: DressedSystem, role: str, bath: BathSpec, labels: dict[str, str]) -> list[Term]:
    terms: list[Term] = []
    for label, weight_attr in labels.items():
        weight = getattr(system, weight_attr)
        for omega, comp in system.components[label]:
            response = bath_response(omega, bath)
            terms.append((LedgerTerm(role, label, omega, weight, response, weight * response), comp))
    return terms


def _parasitic_terms(system: DressedSystem, config: SystemConfig, leak: LeakSpec) -> list[Term]:
    """The overlapping bath on the leaked transition, gated by its owner's windows."""
    role, source, labels = _PARASITIC[leak.overlap_target]
    bath = config.bath.by_role(role)
    if bath.coupling_windows is None:
        logger.debug("%s bath is unwindowed and already drives %s; no parasitic terms", role, source)
        return []
    gated = bath.model_copy(update={"coupling_windows": config.bath.by_role(source).coupling_windows})
    terms: list[Term] = []
    for label in labels:
        weight = getattr(system, _A_LABELS[label])
        for omega, comp in system.components[label]:
            response = bath_response(omega, gated)
            rate = leak.strength * weight * response
            terms.append((LedgerTerm(role, label, omega, weight, response, rate, parasitic=True), comp))
    return terms


def _group_channels(terms: list[Term], tol: float) -> list[tuple[float, sparse.csr_matrix]]:
    """Merge same-frequency components of one bath into one jump operator each."""
    live = sorted(((t, c) for t, c in terms if t.rate > 0), key=lambda tc: tc[0].omega)
    groups: list[tuple[float, sparse.csr_matrix]] = []
    for term, comp in live:
        scaled = np.sqrt(term.rate) * comp
        if groups and abs(term.omega - groups[-1][0]) <= tol:
            groups[-1] = (groups[-1][0], (groups[-1][1] + scaled).tocsr())
        else:
            groups.append((term.omega, scaled.tocsr()))
    return groups


def _has_label_degeneracy(system: DressedSystem, ledger: list[LedgerTerm]) -> bool:
    active = {t.label for t in ledger if t.rate > 0}
    active |= {lbl for lbl, adj in ADJOINT.items() if adj in active}
    by_class: dict[int, set[str]] = {}
    for tr in system.transitions:
        if tr.label in active:
            by_class.setdefault(tr.degeneracy_class, set()).add(tr.label)
    return any(len(labels) > 1 for labels in by_class.values())


def _finish(system: DressedSystem, config: SystemConfig, terms: dict[str, list[Term]]) -> LiouvillianSet:
    tol = config.solver.tolerances.degeneracy
    ledger = [term for role in BATH_ROLES for term, _ in terms[role]]
    degenerate = _has_label_degeneracy(system, ledger)
    if degenerate:
        logger.warning("degenerate Bohr frequencies across jump labels; population shortcut disabled")
    return LiouvillianSet(
        dimension=system.dimension,
        energies=np.asarray(system.energies, dtype=float),
        channels={role: _group_channels(terms[role], tol) for role in BATH_ROLES},
        ledger=tuple(ledger),
        topology=config.topology,
        degenerate_bohr=degenerate,
    )


def _require_topology(config: SystemConfig, topology: str) -> None:
    if config.topology != topology:
        raise ConfigError([("topology", f"expected {topology!r} topology, got {config.topology!r}")])


def assemble_standard(system: DressedSystem, config: SystemConfig) -> LiouvillianSet:
    """Hot/work baths drive the subsystem-A labels, the cold bath drives ``b``.

    Any ``leak`` on the config is ignored; see ``assemble_with_leak``.

    Raises:
        ConfigError: If the config uses the swapped topology.
    """
    _require_topology(config, "standard")
    labels = _role_labels("standard")
    terms = {role: _bath_terms(system, role, config.bath.by_role(role), labels[role]) for role in BATH_ROLES}
    return _finish(system, config, terms)


def assemble_swapped(system: DressedSystem, config: SystemConfig) -> LiouvillianSet:
    """Hot/cold baths drive the subsystem-A labels, the work bath drives ``b``.

    Raises:
        ConfigError: If the config uses the standard topology.
    """
    _require_topology(config, "swapped")
    labels = _role_labels("swapped")
    terms = {role: _bath_terms(system, role, config.bath.by_role(role), labels[role]) for role in BATH_ROLES}
    return _finish(system, config, terms)


def assemble_with_leak(system: DressedSystem, config: SystemConfig, leak: LeakSpec) -> LiouvillianSet:
    """Standard assembly plus the leak's parasitic terms.

    The overlapping bath (hot for ``work_transition``, work for
    ``hot_transition``) also drives the other bath's transition family through
    that bath's coupling windows, at ``strength`` times its own rate.
    """
    _require_topology(config, "standard")
    labels = _role_labels("standard")
    terms = {role: _bath_terms(system, role, config.bath.by_role(role), labels[role]) for role in BATH_ROLES}
    parasitic = _parasitic_terms(system, config, leak)
    if parasitic:
        terms[parasitic[0][0].bath].extend(parasitic)
    return _finish(system, config, terms)


def assemble(system: DressedSystem, config: SystemConfig) -> LiouvillianSet:
    """Dispatch on topology and leak."""
    if config.topology == "swapped":
        return assemble_swapped(system, config)
    if config.leak is not None:
        return assemble_with_leak(system, config, config.leak)
    return assemble_standard(system, config)


# ---------------------------------------------------------------------------
# Structure checks and export
# ---------------------------------------------------------------------------

def populations_decouple(lset: LiouvillianSet) -> bool:
    """``True`` if no jump operator maps a dressed state onto a superposition.

    Then diagonal states stay diagonal and populations follow a classical
    rate matrix.
    """
    for role in BATH_ROLES:
        for _, op in lset.channels[role]:
            cols = op.nonzero()[1]
            if cols.size and np.bincount(cols, minlength=lset.dimension).max() > 1:
                return False
    return not lset.degenerate_bohr


def rate_matrix(lset: LiouvillianSet, roles: tuple[str, ...] = BATH_ROLES) -> sparse.csr_matrix:
    """Classical generator ``W[i, j]`` (rate ``j -> i``), columns summing to zero."""
    d = lset.dimension
    w = sparse.csr_matrix((d, d))
    for role in roles:
        for _, op in lset.channels[role]:
            w = w + abs(op).power(2)
    w = (w - sparse.diags(w.diagonal())).tocsr()
    outflow = np.asarray(w.sum(axis=0)).ravel()
    return (w - sparse.diags(outflow)).tocsr()


def ledger_rows(lset: LiouvillianSet) -> list[dict[str, object]]:
    """Term ledger as table rows, lowering labels before their adjoints."""
    order = {label: k for k, label in enumerate(l for lab in LOWERING_LABELS for l in (lab, ADJOINT[lab]))}
    rows = sorted(
        lset.ledger,
        key=lambda t: (BATH_ROLES.index(t.bath), order[t.label], t.omega),
    )
    return [
        {
            "bath": t.bath,
            "label": t.label,
            "omega": t.omega,
            "weight": t.weight,
            "response": t.response,
            "rate": t.rate,
            "parasitic": t.parasitic,
        }
        for t in rows
    ]


def active_terms(lset: LiouvillianSet, role: str) -> list[LedgerTerm]:
    return [t for t in lset.ledger if t.bath == role and t.rate > _ZERO]
