"""
test_correlations.py — Entropies, mutual information, discord and the PPT test.

Run with:
    python -m pytest tests/test_correlations.py -v
"""

import math

import numpy as np
import pytest

from src.qar.correlations import (
    CORRELATION_COLUMNS,
    BareState,
    block_least_eigenvalue,
    classical_information_grid,
    correlation_report,
    discord,
    entropies,
    mutual_information,
    ppt_check,
    to_bare_basis,
    von_neumann_entropy,
)
from src.qar.errors import DomainError, StructureViolation
from src.qar.thermo import analyze
from tests.conftest import make_config

LN2 = math.log(2.0)


def _ket(*amplitudes: complex) -> np.ndarray:
    v = np.array(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def _bell() -> BareState:
    psi = _ket(1, 0, 0, 1)
    return BareState(np.outer(psi, psi.conj()), (2, 2))


def _classical_quantum() -> BareState:
    """A measured in z, B left in non-orthogonal pure states |0> and |+>."""
    zero, plus = _ket(1, 0), _ket(1, 1)
    rho = 0.5 * np.kron(np.diag([1.0, 0.0]), np.outer(zero, zero)) + 0.5 * np.kron(
        np.diag([0.0, 1.0]), np.outer(plus, plus)
    )
    return BareState(rho.astype(complex), (2, 2))


class TestEntropies:
    def test_pure_and_maximally_mixed(self) -> None:
        assert von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
        assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(LN2)

    def test_bell_state(self) -> None:
        """Maximally entangled qubits share 2 ln 2 of mutual information."""
        s_a, s_b, s_ab = entropies(_bell())
        assert (s_a, s_b) == pytest.approx((LN2, LN2))
        assert s_ab == pytest.approx(0.0, abs=1e-12)
        assert mutual_information(_bell()) == pytest.approx(2 * LN2)

    def test_product_state_uncorrelated(self) -> None:
        rho = np.kron(np.diag([0.7, 0.3]), np.diag([0.4, 0.6])).astype(complex)
        assert mutual_information(BareState(rho, (2, 2))) == pytest.approx(0.0, abs=1e-12)


class TestDiscord:
    def test_bell_state(self) -> None:
        result = discord(_bell(), "A")
        assert result.classical == pytest.approx(LN2, abs=1e-8)
        assert result.discord == pytest.approx(LN2, abs=1e-8)

    def test_classical_quantum_state_measured_on_a(self) -> None:
        """Measuring the classical party leaves no discord."""
        assert abs(discord(_classical_quantum(), "A").discord) < 1e-7

    def test_classical_quantum_state_measured_on_b(self) -> None:
        """Non-orthogonal conditional states of B carry discord."""
        assert discord(_classical_quantum(), "B").discord > 1e-3

    def test_refinement_improves_on_grid(self) -> None:
        state = _classical_quantum()
        refined = discord(state, "B").classical
        grid = classical_information_grid(state, "B")
        assert refined >= grid - 1e-12
        assert refined == pytest.approx(grid, abs=1e-3)

    def test_discord_bounded_by_mutual_information(self) -> None:
        state = _classical_quantum()
        result = discord(state, "B")
        assert 0.0 <= result.discord <= mutual_information(state) + 1e-12

    def test_two_qubits_only(self) -> None:
        with pytest.raises(DomainError):
            discord(BareState(np.eye(6) / 6, (2, 3)))


class TestEntanglement:
    def test_bell_state_is_entangled(self) -> None:
        result = ppt_check(_bell())
        assert result.entangled
        assert result.min_eigenvalue == pytest.approx(-0.5)

    def test_product_state_separable(self) -> None:
        rho = np.kron(np.diag([0.7, 0.3]), np.diag([0.4, 0.6])).astype(complex)
        result = ppt_check(BareState(rho, (2, 2)))
        assert not result.entangled
        assert result.min_eigenvalue == pytest.approx(0.12)

    def test_block_closed_form(self) -> None:
        """For a two-block state the closed form equals the least eigenvalue."""
        result = ppt_check(_classical_quantum())
        assert result.closed_form is not None
        assert result.closed_form == pytest.approx(result.min_eigenvalue, abs=1e-10)

    def test_block_least_eigenvalue_of_diagonal_state(self) -> None:
        assert block_least_eigenvalue(np.diag([0.1, 0.2, 0.3, 0.4])) == pytest.approx(0.1)


class TestSteadyStateCorrelations:
    def test_qubit_steady_state(self) -> None:
        """Dressed qubit steady states: no entanglement, no discord when measuring A."""
        report = analyze(make_config(omega_c=0.1, g=0.05, temperatures=(3.0, 2.0, 1.0)))
        state = to_bare_basis(report.rho, report.system)
        assert np.trace(state.rho).real == pytest.approx(1.0)
        ppt = ppt_check(state)
        assert ppt.min_eigenvalue >= -1e-10
        assert ppt.closed_form == pytest.approx(ppt.min_eigenvalue, abs=1e-10)
        assert abs(discord(state, "A").discord) <= 1e-7
        assert mutual_information(state) > 0

    def test_uncoupled_qubits_are_uncorrelated(self) -> None:
        """Without coupling the work bath decouples and the state is a product."""
        report = analyze(make_config(omega_c=0.1, g=0.0, temperatures=(3.0, 2.0, 1.0)))
        state = to_bare_basis(report.rho, report.system)
        assert mutual_information(state) == pytest.approx(0.0, abs=1e-10)

    def test_off_block_weight_is_rejected(self, weak_config) -> None:
        report = analyze(weak_config)
        rho = np.eye(4, dtype=complex) / 4
        rho[0, 2] = rho[2, 0] = 0.1
        with pytest.raises(StructureViolation):
            to_bare_basis(rho, report.system)

    def test_oscillator_bare_state(self) -> None:
        """The displaced-Fock expansion keeps the state normalised."""
        report = analyze(make_config(kind="TLOS"))
        state = to_bare_basis(report.rho, report.system)
        assert state.dims[0] == 2
        assert state.dims[1] > report.system.dim_b
        assert np.trace(state.rho).real == pytest.approx(1.0, abs=1e-8)
        assert mutual_information(state) >= -1e-12

    def test_report_rows(self, weak_config) -> None:
        report = analyze(weak_config)
        qubits = correlation_report(report.rho, report.system)
        assert tuple(qubits.row()) == CORRELATION_COLUMNS
        assert qubits.measured_party == "A"
        oscillator = analyze(make_config(kind="TLOS"))
        row = correlation_report(oscillator.rho, oscillator.system).row()
        assert row["discord"] is None
        assert row["I_total"] >= -1e-12
