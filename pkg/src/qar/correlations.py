"""Correlations between subsystems A and B of a steady state.

Entropies are in nats.  Classical correlations and discord are computed for
two qubits only; oscillator media report mutual information.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import qutip
from scipy import linalg, optimize

from src.qar.errors import DomainError, StructureViolation
from src.qar.medium import DressedSystem

logger = logging.getLogger(__name__)

Party = Literal["A", "B"]

ENTROPY_CUTOFF: float = 1e-14
GRID_POINTS: int = 64
STRUCTURE_TOL: float = 1e-10

CORRELATION_COLUMNS: tuple[str, ...] = (
    "S_A",
    "S_B",
    "S_AB",
    "I_total",
    "I_classical",
    "discord",
    "ppt_min_eig",
    "entangled",
    "measured_party",
)


@dataclass(frozen=True, eq=False)
class BareState:
    rho: np.ndarray
    dims: tuple[int, int]


@dataclass(frozen=True)
class DiscordResult:
    discord: float
    classical: float
    theta: float
    phi: float


@dataclass(frozen=True)
class PPTResult:
    min_eigenvalue: float
    entangled: bool
    closed_form: Optional[float] = None


@dataclass(frozen=True)
class CorrelationReport:
    S_A: float
    S_B: float
    S_AB: float
    I_total: float
    I_classical: Optional[float]
    discord: Optional[float]
    ppt_min_eig: Optional[float]
    entangled: Optional[bool]
    measured_party: Optional[str]

    def row(self) -> dict[str, object]:
        return {column: getattr(self, column) for column in CORRELATION_COLUMNS}


# ---------------------------------------------------------------------------
# Basis change
# ---------------------------------------------------------------------------

def _displacement(alpha: float, size: int) -> np.ndarray:
    b = np.diag(np.sqrt(np.arange(1, size, dtype=float)), 1)
    return linalg.expm(alpha * (b.T - b))


def to_bare_basis(rho: np.ndarray, system: DressedSystem) -> BareState:
    """Express a dressed-basis state in the product basis of A and B.

    For two qubits the state must keep its two-block form (A excited / A
    ground); oscillator B is expanded on a padded Fock space with dressed
    states ``|n> (x) D(-beta n)|m>``.

    Raises:
        StructureViolation: If a two-qubit state has weight outside the blocks.
    """
    if system.kind == "TLS":
        assert system.eigenvectors is not None
        v = system.eigenvectors
        bare = v @ rho @ v.conj().T
        off_block = max(np.max(np.abs(bare[:2, 2:])), np.max(np.abs(bare[2:, :2])))
        if off_block > STRUCTURE_TOL:
            raise StructureViolation(f"two-qubit state leaks outside its blocks by {off_block:.3e}")
        return BareState(bare, (2, 2))

    beta = system.frequencies.beta or 0.0
    shift = beta * (system.dim_a - 1)
    padded = system.dim_b + int(math.ceil(shift * shift + 6.0 * shift)) + 8
    work = padded + 16
    columns = []
    for n in range(system.dim_a):
        disp = _displacement(-beta * n, work)[:padded, : system.dim_b]
        e_n = np.zeros(system.dim_a)
        e_n[n] = 1.0
        columns.append(np.kron(e_n[:, None], disp))
    v = np.hstack(columns)
    bare = v @ rho @ v.conj().T
    return BareState(bare, (system.dim_a, padded))


# ---------------------------------------------------------------------------
# Entropies
# ---------------------------------------------------------------------------

def von_neumann_entropy(rho: np.ndarray) -> float:
    eigenvalues = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    eigenvalues = eigenvalues[eigenvalues > ENTROPY_CUTOFF]
    return float(-np.sum(eigenvalues * np.log(eigenvalues)))


def reduced_states(state: BareState) -> tuple[np.ndarray, np.ndarray]:
    d_a, d_b = state.dims
    q = qutip.Qobj(state.rho, dims=[[d_a, d_b], [d_a, d_b]])
    return q.ptrace(0).full(), q.ptrace(1).full()


def entropies(state: BareState) -> tuple[float, float, float]:
    """``(S_A, S_B, S_AB)``."""
    rho_a, rho_b = reduced_states(state)
    return von_neumann_entropy(rho_a), von_neumann_entropy(rho_b), von_neumann_entropy(state.rho)


def mutual_information(state: BareState) -> float:
    s_a, s_b, s_ab = entropies(state)
    return s_a + s_b - s_ab


# ---------------------------------------------------------------------------
# Discord
# ---------------------------------------------------------------------------

def _qubit_entropy(blocks: np.ndarray) -> np.ndarray:
    """Entropy of (unnormalised) 2x2 Hermitian blocks, shape ``(..., 2, 2)``, after normalising."""
    tr = np.real(blocks[..., 0, 0] + blocks[..., 1, 1])
    diff = np.real(blocks[..., 0, 0] - blocks[..., 1, 1])
    radius = np.sqrt(diff**2 + 4.0 * np.abs(blocks[..., 0, 1]) ** 2)
    safe = np.where(tr > 0, tr, 1.0)
    out = np.zeros_like(tr)
    for sign in (1.0, -1.0):
        lam = 0.5 * (tr + sign * radius) / safe
        term = np.where(lam > ENTROPY_CUTOFF, -lam * np.log(np.where(lam > ENTROPY_CUTOFF, lam, 1.0)), 0.0)
        out = out + term
    return np.where(tr > 0, out, 0.0)


def _projector_kets(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    phase = np.exp(1j * phi)
    up = np.stack([c + 0j, phase * s], axis=-1)
    down = np.stack([s + 0j, -phase * c], axis=-1)
    return up, down


def _classical_information(rho4: np.ndarray, party: Party, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """``S(other) - sum_k p_k S(other | k)`` for projective measurements along ``(theta, phi)``."""
    tensor = rho4.reshape(2, 2, 2, 2)
    up, down = _projector_kets(theta, phi)
    if party == "A":
        other = np.einsum("abcb->ac", tensor.transpose(1, 0, 3, 2))
        cond = [np.einsum("...a,abcd,...c->...bd", k.conj(), tensor, k) for k in (up, down)]
    else:
        other = np.einsum("abcb->ac", tensor)
        cond = [np.einsum("...b,abcd,...d->...ac", k.conj(), tensor, k) for k in (up, down)]
    s_other = von_neumann_entropy(other)
    conditional = sum(
        np.real(c[..., 0, 0] + c[..., 1, 1]) * _qubit_entropy(c) for c in cond
    )
    return s_other - conditional


def discord(state: BareState, measured_party: Party = "A") -> DiscordResult:
    """Discord with classical correlations maximised over projective measurements.

    A 64 x 64 grid over the Bloch sphere seeds a Nelder-Mead refinement; the
    first grid maximum (lexicographic in ``theta, phi``) is kept on ties.
    """
    if state.dims != (2, 2):
        raise DomainError("discord is only defined here for two qubits")
    rho = state.rho
    thetas = np.linspace(0.0, math.pi, GRID_POINTS)
    phis = np.linspace(0.0, 2.0 * math.pi, GRID_POINTS, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    values = _classical_information(rho, measured_party, tt, pp)
    best = int(np.argmax(values))
    theta0, phi0 = float(tt.flat[best]), float(pp.flat[best])
    best_value = float(values.flat[best])

    def objective(x: np.ndarray) -> float:
        return -float(_classical_information(rho, measured_party, np.asarray(x[0]), np.asarray(x[1])))

    refined = optimize.minimize(
        objective,
        np.array([theta0, phi0]),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    if -refined.fun > best_value:
        best_value = -float(refined.fun)
        theta0, phi0 = float(refined.x[0]), float(refined.x[1])
    total = mutual_information(state)
    return DiscordResult(discord=total - best_value, classical=best_value, theta=theta0, phi=phi0)


def classical_information_grid(state: BareState, measured_party: Party = "A", points: int = GRID_POINTS) -> float:
    """Best classical correlation on a pure ``points x points`` grid, no refinement."""
    thetas = np.linspace(0.0, math.pi, points)
    phis = np.linspace(0.0, 2.0 * math.pi, points, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    return float(np.max(_classical_information(state.rho, measured_party, tt, pp)))


# ---------------------------------------------------------------------------
# Entanglement
# ---------------------------------------------------------------------------

def block_least_eigenvalue(rho: np.ndarray) -> float:
    """Least eigenvalue of a two-block state from ``(r11 + r22 - sqrt((r11 - r22)^2 + 4|r12|^2)) / 2``."""
    values = []
    for lo in (0, 2):
        r11, r22 = np.real(rho[lo, lo]), np.real(rho[lo + 1, lo + 1])
        r12 = rho[lo, lo + 1]
        values.append(0.5 * (r11 + r22 - math.sqrt((r11 - r22) ** 2 + 4.0 * abs(r12) ** 2)))
    return float(min(values))


def is_block_structured(rho: np.ndarray, tol: float = STRUCTURE_TOL) -> bool:
    return bool(max(np.max(np.abs(rho[:2, 2:])), np.max(np.abs(rho[2:, :2]))) <= tol)


def ppt_check(state: BareState, tol: float = 1e-10) -> PPTResult:
    """Partial transpose on B; negative spectrum means entangled."""
    d_a, d_b = state.dims
    q = qutip.Qobj(state.rho, dims=[[d_a, d_b], [d_a, d_b]])
    transposed = qutip.partial_transpose(q, [0, 1]).full()
    least = float(np.linalg.eigvalsh(0.5 * (transposed + transposed.conj().T))[0])
    closed = None
    if state.dims == (2, 2) and is_block_structured(state.rho):
        closed = block_least_eigenvalue(state.rho)
        if abs(closed - least) > tol:
            logger.warning("closed-form PPT eigenvalue %.3e differs from spectrum %.3e", closed, least)
    return PPTResult(min_eigenvalue=least, entangled=least < -tol, closed_form=closed)


def correlation_report(rho: np.ndarray, system: DressedSystem, measured_party: Party = "A") -> CorrelationReport:
    """Entropies and mutual information for every medium, discord and PPT for two qubits."""
    state = to_bare_basis(rho, system)
    s_a, s_b, s_ab = entropies(state)
    total = s_a + s_b - s_ab
    if system.kind != "TLS":
        return CorrelationReport(s_a, s_b, s_ab, total, None, None, None, None, None)
    result = discord(state, measured_party)
    ppt = ppt_check(state)
    return CorrelationReport(
        s_a, s_b, s_ab, total, result.classical, result.discord, ppt.min_eigenvalue, ppt.entangled, measured_party
    )
