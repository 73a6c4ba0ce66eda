"""
test_thermo.py — Steady states, heat currents and thermodynamic figures of merit.

Run with:
    python -m pytest tests/test_thermo.py -v
"""

import math

import numpy as np
import pytest
from scipy import sparse

from src.qar.config import default_truncation, validate
from src.qar.errors import DegenerateSteadyState, NotRefrigerating, TemperatureOrderViolation
from src.qar.liouvillian import LiouvillianSet, assemble, rate_matrix
from src.qar.medium import build_medium
from src.qar.models import BATH_ROLES, SolverOptions
from src.qar.thermo import (
    CSV_COLUMNS,
    CycleKind,
    analyze,
    carnot_cop,
    closed_classes,
    cooling_window,
    cooling_window_omega_c,
    cop_and_entropy,
    cycle_entropy,
    heat_currents,
    population_currents,
    steady_state,
)
from tests.conftest import make_config


def _jump(d: int, target: int, source: int, rate: float) -> sparse.csr_matrix:
    op = np.zeros((d, d), dtype=complex)
    op[target, source] = math.sqrt(rate)
    return sparse.csr_matrix(op)


def _bare_set(energies, channels) -> LiouvillianSet:
    return LiouvillianSet(
        dimension=len(energies),
        energies=np.asarray(energies, dtype=float),
        channels={role: channels.get(role, []) for role in BATH_ROLES},
        ledger=(),
        topology="standard",
    )


# ---------------------------------------------------------------------------
# Carnot bound and cooling window
# ---------------------------------------------------------------------------

class TestCarnot:
    @pytest.mark.parametrize(
        "temperatures, expected",
        [((3.0, 2.0, 1.0), 1.0 / 3.0), ((0.75, 0.5, 0.125), 1.0 / 9.0), ((10.0, 6.0, 5.0), 2.0)],
    )
    def test_values(self, temperatures, expected) -> None:
        assert carnot_cop(*temperatures) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("temperatures", [(1.0, 1.0, 0.5), (2.0, 1.0, 1.0), (1.0, 2.0, 0.5)])
    def test_requires_ordering(self, temperatures) -> None:
        with pytest.raises(TemperatureOrderViolation):
            carnot_cop(*temperatures)

    def test_cooling_window_standard(self, warm_config) -> None:
        """eps_c / (1 + eps_c) omega_h = 0.25 at T = {3, 2, 1}."""
        assert cooling_window(warm_config) == pytest.approx(0.25)

    def test_cooling_window_bare_edge(self, warm_config) -> None:
        edge = cooling_window_omega_c(warm_config)
        assert edge == pytest.approx(math.sqrt(0.25**2 - 4 * 0.01**2))

    def test_strong_coupling_closes_window(self) -> None:
        """2 g above the dressed edge leaves no bare omega_c that cools."""
        assert cooling_window_omega_c(make_config(g=0.2, temperatures=(3.0, 2.0, 1.0))) is None

    def test_cooling_window_swapped(self) -> None:
        config = make_config(temperatures=(3.0, 2.0, 1.0), topology="swapped", omega_w=1.0, g=0.05)
        assert cooling_window(config) == pytest.approx(math.sqrt(1.0 + 0.01) / 3.0)


# ---------------------------------------------------------------------------
# Cycle entropies and COP
# ---------------------------------------------------------------------------

class TestCycles:
    def test_three_transition_cycle_vanishes_at_edge(self) -> None:
        """At omega~_c = 0.25, omega_w = 0.75 and T = {3, 2, 1} the cycle is reversible."""
        sigma = cycle_entropy(1.0, 0.25, 0.75, (3.0, 2.0, 1.0))
        assert sigma == pytest.approx(0.0, abs=1e-15)

    def test_inverse_cycle_negates(self) -> None:
        forward = cycle_entropy(1.0, 0.1, 0.9, (3.0, 2.0, 1.0), CycleKind.COOLING_3213)
        backward = cycle_entropy(1.0, 0.1, 0.9, (3.0, 2.0, 1.0), CycleKind.INVERSE_3213)
        assert backward == -forward
        assert forward > 0

    def test_single_cycle_takes_two_cold_quanta(self) -> None:
        sigma = cycle_entropy(1.0, 0.1, 0.9, (3.0, 2.0, 1.0), CycleKind.SINGLE_43214)
        assert sigma == pytest.approx(-0.2 - 0.3 + 1.1 / 2.0)


class TestCopAndEntropy:
    def test_cooling_branch(self) -> None:
        merit = cop_and_entropy({"work": 0.9, "hot": -1.0, "cold": 0.1}, (3.0, 2.0, 1.0), 1.0 / 3.0)
        assert merit.cop == pytest.approx(0.1 / 0.9)
        assert merit.cop_ratio == pytest.approx(0.3 / 0.9)
        assert merit.sigma == pytest.approx(-(0.3 - 0.5 + 0.1))

    def test_not_cooling_reports_none(self) -> None:
        merit = cop_and_entropy({"work": 0.9, "hot": -0.8, "cold": -0.1}, (3.0, 2.0, 1.0))
        assert merit.cop is None
        assert merit.cop_ratio is None

    def test_strict_raises(self) -> None:
        with pytest.raises(NotRefrigerating):
            cop_and_entropy({"work": 0.9, "hot": -0.8, "cold": -0.1}, (3.0, 2.0, 1.0), strict=True)


# ---------------------------------------------------------------------------
# Steady state
# ---------------------------------------------------------------------------

class TestSteadyState:
    @pytest.mark.parametrize("kind", ["TLS", "TLOS", "OMS"])
    def test_is_a_density_matrix(self, kind) -> None:
        """Unit trace, Hermitian, positive semidefinite."""
        report = analyze(make_config(kind=kind))
        rho = report.rho
        assert abs(np.trace(rho) - 1.0) < 1e-12
        assert np.allclose(rho, rho.conj().T)
        assert report.state.min_eigenvalue > -1e-10

    def test_paths_agree(self, warm_config) -> None:
        """Population and full solves give the same state; the kernel is one-dimensional."""
        validated = validate(warm_config)
        lset = assemble(build_medium(validated), validated)
        state = steady_state(lset, SolverOptions(audit=True))
        assert state.method == "populations"
        assert state.nullity == 1
        assert state.audit_difference < 1e-10

    def test_full_path(self, warm_config) -> None:
        validated = validate(warm_config)
        lset = assemble(build_medium(validated), validated)
        full = steady_state(lset, SolverOptions(method="full"))
        pops = steady_state(lset, SolverOptions(method="populations"))
        assert full.method == "full"
        assert np.allclose(full.rho, pops.rho, atol=1e-10)
        assert full.residual < 1e-10

    def test_no_dissipation_is_degenerate(self) -> None:
        """A purely coherent generator has no unique stationary state."""
        lset = _bare_set([1.0, 0.5, -0.5, -1.0], {})
        with pytest.raises(DegenerateSteadyState):
            steady_state(lset)

    @pytest.mark.parametrize("method", ["populations", "full"])
    def test_disconnected_pairs_are_degenerate(self, method) -> None:
        """Two pairs of levels that never exchange population are caught without an audit."""
        channels = {
            "work": [(0.5, _jump(4, 1, 0, 0.1)), (-0.5, _jump(4, 0, 1, 0.05))],
            "hot": [(0.5, _jump(4, 3, 2, 0.1)), (-0.5, _jump(4, 2, 3, 0.05))],
        }
        with pytest.raises(DegenerateSteadyState):
            steady_state(_bare_set([1.0, 0.5, -0.5, -1.0], channels), SolverOptions(method=method))

    def test_connected_chain_solves(self) -> None:
        """Detailed balance on a three-level chain: p1 / p0 = p2 / p1 = 1/2."""
        channels = {
            "work": [(1.0, _jump(3, 0, 1, 0.2)), (1.0, _jump(3, 1, 2, 0.2))],
            "hot": [(-1.0, _jump(3, 1, 0, 0.1)), (-1.0, _jump(3, 2, 1, 0.1))],
        }
        lset = _bare_set([0.0, 1.0, 2.0], channels)
        state = steady_state(lset)
        assert state.closed_classes == 1
        assert state.populations == pytest.approx(np.array([4.0, 2.0, 1.0]) / 7.0)
        full = steady_state(lset, SolverOptions(method="full"))
        assert np.allclose(full.rho, state.rho, atol=1e-12)

    @pytest.mark.parametrize("kind", ["TLS", "TLOS", "OMS"])
    def test_equal_temperatures_give_gibbs_state(self, kind) -> None:
        """Equal bath temperatures relax to exp(-E / T) / Z."""
        medium = {"kind": kind, "truncation_A": 6, "truncation_B": 24} if kind == "OMS" else {"kind": kind}
        report = analyze(make_config(medium=medium, temperatures=(0.5, 0.5, 0.5)), enforce_ordering=False)
        energies = report.system.energies
        gibbs = np.exp(-(energies - energies.min()) / 0.5)
        gibbs /= gibbs.sum()
        assert np.allclose(report.state.populations, gibbs, atol=1e-10)
        assert math.isnan(report.carnot_cop)


class TestClosedClasses:
    def test_transient_state_is_not_a_class(self) -> None:
        """0 -> 1 only, 1 <-> 2: one closed class {1, 2}."""
        w = sparse.csr_matrix(np.array([[-1.0, 0.0, 0.0], [1.0, -1.0, 1.0], [0.0, 1.0, -1.0]]))
        assert closed_classes(w) == 1

    def test_two_absorbing_states(self) -> None:
        w = sparse.csr_matrix(np.array([[0.0, 1.0, 0.0], [0.0, -2.0, 0.0], [0.0, 1.0, 0.0]]))
        assert closed_classes(w) == 2

    def test_assembled_media_are_irreducible(self, warm_config) -> None:
        validated = validate(warm_config)
        lset = assemble(build_medium(validated), validated)
        assert closed_classes(rate_matrix(lset)) == 1


class TestTruncation:
    @pytest.mark.parametrize(
        "kind, omega_c",
        [("TLOS", 0.02), ("TLOS", 0.08), ("OMS", 0.08)],
    )
    def test_default_truncation_is_converged(self, kind, omega_c) -> None:
        """Four more Fock levels than the default move J_c by less than 0.1 %."""
        config = make_config(kind=kind, omega_c=omega_c)
        n_a, n_b = default_truncation(config)
        base = analyze(config).J_c
        medium = {"kind": kind, "truncation_B": n_b + 4}
        if kind == "OMS":
            medium["truncation_A"] = n_a + 4
        bigger = analyze(make_config(medium=medium, omega_c=omega_c)).J_c
        assert bigger == pytest.approx(base, rel=1e-3)


# ---------------------------------------------------------------------------
# Currents and reports
# ---------------------------------------------------------------------------

class TestAnalyze:
    def test_weak_coupling_qubits_refrigerate(self, weak_config) -> None:
        report = analyze(weak_config)
        assert report.flags.cooling
        assert report.J_c > 0 and report.J_w > 0 and report.J_h < 0
        assert report.flags.laws_ok
        assert report.cop <= report.carnot_cop + 1e-8

    def test_first_law(self, warm_config) -> None:
        report = analyze(warm_config)
        scale = max(abs(j) for j in report.currents.values())
        assert abs(report.first_law_residual) <= 1e-10 * scale
        assert report.sigma >= -1e-10 * scale

    def test_currents_proportional_to_frequencies(self) -> None:
        """Ideal qubits: J_w : J_h : J_c = omega_w : -omega_h : omega~_c at any coupling."""
        config = make_config(omega_c=0.1, g=0.04, temperatures=(3.0, 2.0, 1.0))
        report = analyze(config)
        tilde = math.sqrt(0.01 + 4 * 0.04**2)
        assert report.J_c / report.J_w == pytest.approx(tilde / (1.0 - tilde), rel=1e-6)
        assert report.J_h / report.J_c == pytest.approx(-1.0 / tilde, rel=1e-6)
        assert report.cop == pytest.approx(tilde / (1.0 - tilde), rel=1e-6)

    def test_cooling_changes_sign_at_window_edge(self) -> None:
        """J_c crosses zero at omega~_c = 0.25 for T = {3, 2, 1}."""
        g = 0.01

        def j_c(tilde: float) -> float:
            omega_c = math.sqrt(tilde**2 - 4 * g * g)
            return analyze(make_config(omega_c=omega_c, g=g, temperatures=(3.0, 2.0, 1.0))).J_c

        assert j_c(0.2499) > 0
        assert j_c(0.2501) < 0

    def test_heat_currents_sum_to_zero(self, warm_config) -> None:
        validated = validate(warm_config)
        system = build_medium(validated)
        lset = assemble(system, validated)
        state = steady_state(lset)
        currents = heat_currents(lset, state.rho, system.hamiltonian)
        assert sum(currents.values()) == pytest.approx(0.0, abs=1e-14)

    def test_population_currents_match_superoperator(self, warm_config) -> None:
        validated = validate(warm_config)
        system = build_medium(validated)
        lset = assemble(system, validated)
        state = steady_state(lset)
        full = heat_currents(lset, state.rho, system.hamiltonian)
        cheap = population_currents(lset, state.populations)
        for role in BATH_ROLES:
            assert cheap[role] == pytest.approx(full[role], rel=1e-10, abs=1e-18)

    def test_oscillator_medium_beats_qubits(self) -> None:
        """At omega_c = 0.04 the qubit-oscillator fridge out-cools coupled qubits."""
        tls = analyze(make_config(kind="TLS", omega_c=0.04)).J_c
        tlos = analyze(make_config(kind="TLOS", omega_c=0.04)).J_c
        assert tlos > tls > 0

    def test_row_columns(self, weak_config) -> None:
        row = analyze(weak_config).row()
        assert tuple(row) == CSV_COLUMNS
        assert row["medium"] == "TLS"
        assert row["method"] == "populations"

    def test_record_populations(self, weak_config) -> None:
        record = analyze(weak_config).record()
        assert len(record.populations) == 4
        assert sum(record.populations) == pytest.approx(1.0)

    def test_oscillator_flags(self) -> None:
        """A stiff oscillator at weak coupling is valid and well truncated."""
        report = analyze(make_config(kind="TLOS", omega_c=0.5))
        assert report.flags.weak_coupling_valid
        assert not report.flags.truncation_warning

    def test_truncation_warning(self) -> None:
        """A hot bath on a three-level oscillator populates its top levels."""
        config = make_config(kind="TLOS", medium={"kind": "TLOS", "truncation_B": 3})
        report = analyze(config)
        assert report.flags.truncation_warning
