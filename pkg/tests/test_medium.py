"""
test_medium.py — Dressed eigenbases and jump operators of the three media.

Run with:
    python -m pytest tests/test_medium.py -v
"""

import math

import numpy as np
import pytest

from src.qar.config import validate
from src.qar.medium import (
    JUMP_LABELS,
    LOWERING_LABELS,
    bohr_components,
    build_medium,
    commutator_remainder,
    dressed_frequencies,
    lowering,
    subsystem_frequencies,
)
from tests.conftest import make_config


def _system(kind: str = "TLS", **fields):
    return build_medium(validate(make_config(kind=kind, **fields)))


class TestDressedFrequencies:
    def test_qubit_weights_sum_to_one(self) -> None:
        """cos^2 + sin^2 = 1 and omega~ = sqrt(omega^2 + 4 g^2)."""
        freqs = dressed_frequencies("TLS", 0.1, 0.05)
        assert freqs.c2 + freqs.s2 == pytest.approx(1.0)
        assert freqs.omega_b_tilde == pytest.approx(math.sqrt(0.02))
        assert freqs.s2 == pytest.approx((2 * 0.05) ** 2 / 0.02)

    def test_uncoupled_qubits(self) -> None:
        freqs = dressed_frequencies("TLS", 0.1, 0.0)
        assert (freqs.c2, freqs.s2) == (1.0, 0.0)

    def test_oscillator_weights(self) -> None:
        """An oscillator keeps its frequency; s^2 = (g / omega)^2."""
        freqs = dressed_frequencies("TLOS", 0.1, 0.005)
        assert freqs.omega_b_tilde == 0.1
        assert freqs.c2 == 1.0
        assert freqs.s2 == pytest.approx(0.0025)

    def test_swapped_subsystems(self) -> None:
        config = make_config(topology="swapped", omega_w=0.9, omega_c=0.2)
        assert subsystem_frequencies(config) == (0.2, 0.9)


class TestQubits:
    def test_energies(self) -> None:
        """Excited-first ordering with energies (+-1 +- omega~)/2."""
        system = _system(omega_c=0.1, g=0.05)
        tilde = math.sqrt(0.02)
        expected = [(1 + tilde) / 2, (1 - tilde) / 2, (-1 + tilde) / 2, (-1 - tilde) / 2]
        assert system.energies == pytest.approx(expected)
        assert system.dimension == 4

    def test_eigenvectors_orthogonal(self) -> None:
        system = _system(omega_c=0.1, g=0.05)
        v = system.eigenvectors
        assert np.allclose(v @ v.T, np.eye(4))

    @pytest.mark.parametrize("label", JUMP_LABELS)
    def test_eigenoperators_are_exact(self, label) -> None:
        """[H, O] = -omega O for every label of the qubit medium."""
        assert commutator_remainder(_system(omega_c=0.1, g=0.05), label) < 1e-12

    def test_bohr_frequencies(self) -> None:
        system = _system(omega_c=0.1, g=0.05)
        tilde = math.sqrt(0.02)
        assert system.bohr_frequencies() == pytest.approx(sorted([tilde, 1 - tilde, 1.0, 1 + tilde]))


class TestOscillators:
    def test_default_dimensions_follow_thermal_tail(self) -> None:
        """At T_c = 0.125, omega_c = 0.05 oscillator B needs 53 levels; A at T_w = 0.75 needs 18."""
        assert _system("TLOS").dimension == 2 * 53
        assert _system("OMS").dimension == 18 * 53

    def test_explicit_truncation_wins(self) -> None:
        system = _system("OMS", medium={"kind": "OMS", "truncation_A": 4, "truncation_B": 6})
        assert (system.dim_a, system.dim_b) == (4, 6)

    @pytest.mark.parametrize("label", JUMP_LABELS)
    def test_qubit_oscillator_eigenoperators_are_exact(self, label) -> None:
        """The polaron shift is uniform, so every TLOS label has one Bohr frequency."""
        assert commutator_remainder(_system("TLOS"), label) < 1e-12

    def test_optomechanical_a_is_anharmonic(self) -> None:
        """The Kerr term splits subsystem-A transitions; b stays harmonic."""
        system = _system("OMS", omega_c=0.1, g=0.02)
        assert len(system.components["a"]) == system.dim_a - 1
        assert commutator_remainder(system, "b") < 1e-12
        assert commutator_remainder(system, "a") > 1e-6

    def test_with_offset_keeps_bohr_frequencies(self) -> None:
        system = _system("TLOS")
        shifted = system.with_offset(3.0)
        assert shifted.energies == pytest.approx(system.energies + 3.0)
        assert shifted.bohr_frequencies() == system.bohr_frequencies()


class TestBohrComponents:
    def test_lowering(self) -> None:
        assert np.allclose(lowering(3), [[0, 1, 0], [0, 0, math.sqrt(2)], [0, 0, 0]])

    @pytest.mark.parametrize("kind", ["TLS", "TLOS", "OMS"])
    def test_components_sum_to_operator(self, kind) -> None:
        """The eigenoperator decomposition is a partition of the operator."""
        system = _system(kind, omega_c=0.1, g=0.02)
        for label in LOWERING_LABELS:
            total = sum(comp.toarray() for _, comp in system.components[label])
            assert np.allclose(total, system.jump_ops[label].toarray())

    @pytest.mark.parametrize("kind", ["TLS", "OMS"])
    def test_each_component_is_an_eigenoperator(self, kind) -> None:
        system = _system(kind, omega_c=0.1, g=0.02)
        h = system.hamiltonian
        for omega, comp in system.components["a"]:
            dense = comp.toarray()
            assert np.allclose(h @ dense - dense @ h, -omega * dense, atol=1e-12)

    def test_lowering_frequencies_positive(self) -> None:
        system = _system("TLS", omega_c=0.1, g=0.02)
        for label in LOWERING_LABELS:
            assert all(omega > 0 for omega, _ in system.components[label])

    def test_empty_operator(self) -> None:
        assert bohr_components(np.zeros((2, 2)), np.array([1.0, 0.0])) == []
