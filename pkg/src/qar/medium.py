"""Dressed (polaron-frame) description of the three working media.

Basis conventions
-----------------
- TLS: dressed states ordered ``|1>..|4> = |++>, |+->, |-+>, |-->`` (excited
  first), energies ``(+-w_A +- w~_B)/2``.
- TLOS / OMS: index ``n * dim_B + m`` with ``n`` the excitation of A and ``m``
  the displaced Fock index of B (ground first).

Jump operators are built directly on dressed indices; the displacement of the
polaron frame is absorbed into the basis and never exponentiated here.  They
are stored as ``scipy.sparse`` CSR matrices: converged oscillator media run to
a few thousand levels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import sparse

from src.qar.config import default_truncation, dressed_b_frequency
from src.qar.models import SystemConfig

logger = logging.getLogger(__name__)

LOWERING_LABELS: tuple[str, ...] = ("a", "a_b_dag", "a_b", "b")
ADJOINT: dict[str, str] = {
    "a": "a_dag",
    "a_b_dag": "a_dag_b",
    "a_b": "a_dag_b_dag",
    "b": "b_dag",
}
JUMP_LABELS: tuple[str, ...] = tuple(l for pair in ADJOINT.items() for l in pair)

_GROUP_TOL: float = 1e-9

Component = tuple[float, sparse.csr_matrix]


@dataclass(frozen=True)
class Transition:
    """One matrix element of a lowering eigenoperator: ``source -> target``."""

    omega: float
    label: str
    source: int
    target: int
    degeneracy_class: int


@dataclass(frozen=True)
class DressedFrequencies:
    omega_b_tilde: float
    c2: float
    s2: float
    theta: Optional[float] = None
    beta: Optional[float] = None


@dataclass(frozen=True, eq=False)
class DressedSystem:
    """Immutable dressed eigenbasis of one working medium.

    ``components[label]`` lists the Bohr-frequency components of each jump
    operator; ``nominal[label]`` is the frequency the label carries in the
    master equation (exact for TLS/TLOS, anharmonic centre for OMS).
    """

    kind: str
    dim_a: int
    dim_b: int
    energies: np.ndarray
    levels: tuple[tuple[int, int], ...]
    omega_a: float
    omega_b: float
    frequencies: DressedFrequencies
    jump_ops: dict[str, sparse.csr_matrix]
    components: dict[str, list[Component]]
    nominal: dict[str, float]
    transitions: tuple[Transition, ...]
    eigenvectors: Optional[np.ndarray] = None
    metadata: dict[str, float] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def omega_b_tilde(self) -> float:
        return self.frequencies.omega_b_tilde

    @property
    def c2(self) -> float:
        return self.frequencies.c2

    @property
    def s2(self) -> float:
        return self.frequencies.s2

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.energies).astype(complex)

    def with_offset(self, offset: float) -> "DressedSystem":
        """Same system with every energy shifted by ``offset``."""
        return replace(self, energies=self.energies + offset)

    def bohr_frequencies(self) -> list[float]:
        """Sorted distinct positive Bohr frequencies of the lowering operators."""
        return sorted({round(t.omega, 12) for t in self.transitions})


# ---------------------------------------------------------------------------
# Frequencies and weights
# ---------------------------------------------------------------------------

def dressed_frequencies(kind: str, omega_b: float, g: float) -> DressedFrequencies:
    """Dressed B frequency and the coupling weights ``c**2``, ``s**2``.

    TLS hybridise with ``sin(theta) = 2g / w~``, ``cos(theta) = w / w~``;
    for an oscillator B the weights are ``1`` and ``(g / w)**2``.
    """
    tilde = dressed_b_frequency(kind, omega_b, g)
    if kind == "TLS":
        theta = math.atan2(2.0 * g, omega_b)
        return DressedFrequencies(tilde, math.cos(theta) ** 2, math.sin(theta) ** 2, theta=theta)
    beta = g / omega_b
    return DressedFrequencies(tilde, 1.0, beta * beta, beta=beta)


def subsystem_frequencies(config: SystemConfig) -> tuple[float, float]:
    """``(omega_A, omega_B)``: ``(omega_h, omega_c)`` standard, ``(omega_c, omega_w)`` swapped."""
    if config.topology == "swapped":
        assert config.omega_w is not None
        return config.omega_c, config.omega_w
    return config.omega_h, config.omega_c


# ---------------------------------------------------------------------------
# Operator helpers
# ---------------------------------------------------------------------------

def lowering(n: int) -> np.ndarray:
    """Truncated ladder lowering operator on ``n`` levels, ground state first."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


def _label_operators(a: sparse.spmatrix, b: sparse.spmatrix) -> dict[str, sparse.csr_matrix]:
    ops = {
        "a": a,
        "b": b,
        "a_b_dag": a @ b.conj().T,
        "a_b": a @ b,
    }
    for label in list(ops):
        ops[ADJOINT[label]] = ops[label].conj().T
    return {label: sparse.csr_matrix(ops[label], dtype=complex) for label in JUMP_LABELS}


def bohr_components(op, energies: np.ndarray, tol: float = _GROUP_TOL) -> list[Component]:
    """Split ``op`` into eigenoperators ``sum_{E_j - E_i = w} |i><i|op|j><j|``.

    Returns ``(w, component)`` pairs sorted by ``w``; elements whose Bohr
    frequencies agree within ``tol`` share one component.  ``op`` may be dense
    or sparse; components are CSR.
    """
    coo = sparse.coo_matrix(op)
    keep = coo.data != 0
    rows, cols, data = coo.row[keep], coo.col[keep], coo.data[keep]
    if rows.size == 0:
        return []
    freqs = energies[cols] - energies[rows]
    order = np.argsort(freqs, kind="stable")
    groups: list[list[int]] = []
    for k in order:
        if groups and abs(freqs[k] - freqs[groups[-1][0]]) <= tol:
            groups[-1].append(int(k))
        else:
            groups.append([int(k)])
    components: list[Component] = []
    for members in groups:
        idx = np.asarray(members)
        comp = sparse.csr_matrix((data[idx], (rows[idx], cols[idx])), shape=coo.shape, dtype=complex)
        components.append((float(np.mean(freqs[idx])), comp))
    return components


def _transition_table(
    components: dict[str, list[Component]], tol: float = _GROUP_TOL
) -> tuple[Transition, ...]:
    raw: list[tuple[float, str, int, int]] = []
    for label in LOWERING_LABELS:
        for omega, comp in components[label]:
            rows, cols = comp.nonzero()
            raw.extend((omega, label, int(j), int(i)) for i, j in zip(rows, cols))
    distinct: list[float] = []
    for omega in sorted(abs(r[0]) for r in raw):
        if not distinct or omega - distinct[-1] > tol:
            distinct.append(omega)
    centres = np.asarray(distinct)

    def klass(omega: float) -> int:
        return int(np.argmin(np.abs(centres - abs(omega))))

    return tuple(Transition(w, label, src, dst, klass(w)) for w, label, src, dst in raw)


def _assemble(
    kind: str,
    dim_a: int,
    dim_b: int,
    energies: np.ndarray,
    levels: list[tuple[int, int]],
    a: sparse.spmatrix,
    b: sparse.spmatrix,
    omega_a: float,
    omega_b: float,
    freqs: DressedFrequencies,
    eigenvectors: Optional[np.ndarray] = None,
) -> DressedSystem:
    ops = _label_operators(a, b)
    components = {label: bohr_components(op, energies) for label, op in ops.items()}
    tilde = freqs.omega_b_tilde
    nominal = {"a": omega_a, "b": tilde, "a_b_dag": omega_a - tilde, "a_b": omega_a + tilde}
    for label in LOWERING_LABELS:
        nominal[ADJOINT[label]] = -nominal[label]
    system = DressedSystem(
        kind=kind,
        dim_a=dim_a,
        dim_b=dim_b,
        energies=energies,
        levels=tuple(levels),
        omega_a=omega_a,
        omega_b=omega_b,
        frequencies=freqs,
        jump_ops=ops,
        components=components,
        nominal=nominal,
        transitions=_transition_table(components),
        eigenvectors=eigenvectors,
    )
    logger.debug("built %s dressed system, d=%d", kind, system.dimension)
    return system


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def tls_eigenvectors(theta: float) -> np.ndarray:
    """Columns are dressed states ``|1>..|4>`` in the bare ``|++>, |+->, |-+>, |-->`` basis."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [c, s, 0.0, 0.0],
            [-s, c, 0.0, 0.0],
            [0.0, 0.0, c, -s],
            [0.0, 0.0, s, c],
        ]
    )


def build_tls(config: SystemConfig) -> DressedSystem:
    omega_a, omega_b = subsystem_frequencies(config)
    freqs = dressed_frequencies("TLS", omega_b, config.g)
    # excited-first single-qubit ordering
    sigma_minus = sparse.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
    eye = sparse.identity(2, format="csr")
    levels = [(1, 1), (1, 0), (0, 1), (0, 0)]
    energies = np.array(
        [(2 * n - 1) * omega_a / 2.0 + (2 * m - 1) * freqs.omega_b_tilde / 2.0 for n, m in levels]
    )
    assert freqs.theta is not None
    return _assemble(
        "TLS", 2, 2, energies, levels,
        sparse.kron(sigma_minus, eye), sparse.kron(eye, sigma_minus),
        omega_a, omega_b, freqs,
        eigenvectors=tls_eigenvectors(freqs.theta),
    )


def _ladder(n: int) -> sparse.csr_matrix:
    return sparse.csr_matrix(lowering(n))


def build_tlos(config: SystemConfig) -> DressedSystem:
    omega_a, omega_b = subsystem_frequencies(config)
    dim_b = config.medium.truncation_B or default_truncation(config)[1]
    freqs = dressed_frequencies("TLOS", omega_b, config.g)
    shift = config.g**2 / omega_b
    levels = [(n, m) for n in range(2) for m in range(dim_b)]
    energies = np.array([(n - 0.5) * omega_a + m * omega_b - shift for n, m in levels])
    return _assemble(
        "TLOS", 2, dim_b, energies, levels,
        sparse.kron(_ladder(2), sparse.identity(dim_b)), sparse.kron(sparse.identity(2), _ladder(dim_b)),
        omega_a, omega_b, freqs,
    )


def build_oms(config: SystemConfig) -> DressedSystem:
    omega_a, omega_b = subsystem_frequencies(config)
    fallback_a, fallback_b = default_truncation(config)
    dim_a = config.medium.truncation_A or fallback_a
    dim_b = config.medium.truncation_B or fallback_b
    freqs = dressed_frequencies("OMS", omega_b, config.g)
    chi = config.g**2 / omega_b
    levels = [(n, m) for n in range(dim_a) for m in range(dim_b)]
    energies = np.array([n * omega_a + m * omega_b - chi * n * n for n, m in levels])
    return _assemble(
        "OMS", dim_a, dim_b, energies, levels,
        sparse.kron(_ladder(dim_a), sparse.identity(dim_b)), sparse.kron(sparse.identity(dim_a), _ladder(dim_b)),
        omega_a, omega_b, freqs,
    )


_BUILDERS = {"TLS": build_tls, "TLOS": build_tlos, "OMS": build_oms}


def build_medium(config: SystemConfig) -> DressedSystem:
    """Dispatch on ``config.medium.kind``."""
    return _BUILDERS[config.medium.kind](config)


def commutator_remainder(system: DressedSystem, label: str) -> float:
    """Spectral norm of ``[H, O] + w O`` for the label's nominal frequency ``w``."""
    h = system.hamiltonian
    op = system.jump_ops[label].toarray()
    remainder = h @ op - op @ h + system.nominal[label] * op
    return float(np.linalg.norm(remainder, 2))
