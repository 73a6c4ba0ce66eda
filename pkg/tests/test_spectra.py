"""
test_spectra.py — Bath occupations, spectral densities and response functions.

Run with:
    python -m pytest tests/test_spectra.py -v
"""

import math

import pytest

from src.qar.errors import DomainError
from src.qar.models import BathSpec, FilterSpec
from src.qar.spectra import (
    bath_response,
    bose_occupation,
    filtered_response,
    gated_response,
    in_windows,
    ohmic_density,
    principal_value_shift,
    sample_responses,
    spectral_response,
)


def _bath(**fields) -> BathSpec:
    data = {"role": "hot", "temperature": 1.0, "kappa": 0.005, "cutoff": 1000.0}
    data.update(fields)
    return BathSpec(**data)


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

class TestBoseOccupation:
    def test_unit_ratio(self) -> None:
        """n(1, 1) = 1 / (e - 1)."""
        assert bose_occupation(1.0, 1.0) == pytest.approx(1.0 / (math.e - 1.0), rel=1e-14)

    def test_huge_ratio_underflows_to_zero(self) -> None:
        assert bose_occupation(1000.0, 1.0) == 0.0

    @pytest.mark.parametrize("omega, temperature", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
    def test_domain(self, omega, temperature) -> None:
        """Non-positive frequency or temperature is a domain error."""
        with pytest.raises(DomainError):
            bose_occupation(omega, temperature)


class TestOhmicDensity:
    def test_ohmic_value(self) -> None:
        """kappa = 0.005, p = 1, omega = 1, cutoff = 1000."""
        assert ohmic_density(1.0, 0.005, 1.0, 1000.0) == pytest.approx(0.005 * math.exp(-0.001), rel=1e-14)

    def test_super_ohmic_scaling(self) -> None:
        """For p = 2 the cutoff enters as cutoff**(p - 1)."""
        value = ohmic_density(0.5, 0.01, 2.0, 10.0)
        assert value == pytest.approx(0.01 * 0.25 * 10.0 * math.exp(-0.05))


# ---------------------------------------------------------------------------
# Response modes
# ---------------------------------------------------------------------------

class TestSpectralResponse:
    def test_emission_branch(self) -> None:
        """G(1) = 2 pi J(1) (1 + n(1)) ~ 0.04965 at T = 1."""
        expected = 2.0 * math.pi * 0.005 * math.exp(-0.001) * (1.0 + 1.0 / (math.e - 1.0))
        assert spectral_response(1.0, _bath()) == pytest.approx(expected, rel=1e-12)
        assert spectral_response(1.0, _bath()) == pytest.approx(0.04965, rel=1e-3)

    @pytest.mark.parametrize("omega", [0.05, 0.3, 1.0, 4.0])
    def test_detailed_balance(self, omega) -> None:
        """G(-w) = exp(-w / T) G(w)."""
        bath = _bath(temperature=0.5)
        ratio = spectral_response(-omega, bath) / spectral_response(omega, bath)
        assert ratio == pytest.approx(math.exp(-omega / 0.5), rel=1e-12)

    def test_zero_frequency_ohmic(self) -> None:
        """The p = 1 limit at omega = 0 is 2 pi kappa T."""
        assert spectral_response(0.0, _bath(temperature=0.7)) == pytest.approx(2 * math.pi * 0.005 * 0.7)

    def test_zero_frequency_super_ohmic(self) -> None:
        assert spectral_response(0.0, _bath(ohmic_exponent=2.0)) == 0.0

    def test_zero_frequency_sub_ohmic_diverges(self) -> None:
        with pytest.raises(DomainError):
            spectral_response(0.0, _bath(ohmic_exponent=0.5))

    def test_continuous_near_zero(self) -> None:
        """Small omega approaches the zero-frequency limit."""
        bath = _bath(temperature=0.7)
        assert spectral_response(1e-7, bath) == pytest.approx(spectral_response(0.0, bath), rel=1e-6)


class TestFilteredResponse:
    def test_line_center(self) -> None:
        """At the filter center with no shift the value is kappa_f / pi."""
        bath = _bath(filter=FilterSpec(center=1.0, strength=0.02))
        assert filtered_response(1.0, bath) == pytest.approx(0.02 / math.pi, rel=1e-12)

    def test_detailed_balance(self) -> None:
        bath = _bath(temperature=0.4, filter=FilterSpec(center=0.8, strength=0.02))
        ratio = filtered_response(-0.9, bath) / filtered_response(0.9, bath)
        assert ratio == pytest.approx(math.exp(-0.9 / 0.4), rel=1e-12)

    def test_off_resonance_is_suppressed(self) -> None:
        bath = _bath(filter=FilterSpec(center=1.0, strength=0.02))
        assert filtered_response(0.5, bath) < 0.1 * filtered_response(1.0, bath)

    def test_requires_filter(self) -> None:
        with pytest.raises(DomainError):
            filtered_response(1.0, _bath())


class TestPrincipalValue:
    def test_shift_is_finite_and_negative(self) -> None:
        """An increasing Ohmic response pulls the line down."""
        shift = principal_value_shift(1.0, _bath(cutoff=10.0))
        assert math.isfinite(shift)
        assert shift < 0.0

    def test_shifted_filter_recenters(self) -> None:
        """In numeric-PV mode the peak sits at center + shift."""
        plain = _bath(cutoff=10.0)
        shift = principal_value_shift(1.0, plain)
        bath = _bath(
            cutoff=10.0,
            filter=FilterSpec(center=1.0 - shift, strength=0.02, lamb_shift_mode="numeric-PV"),
        )
        assert filtered_response(1.0, bath) == pytest.approx(0.02 / math.pi, rel=1e-9)

    def test_domain(self) -> None:
        with pytest.raises(DomainError):
            principal_value_shift(0.0, _bath())


class TestGating:
    def test_half_open_windows(self) -> None:
        """Windows include the lower edge and exclude the upper one."""
        windows = [(0.5, 1.0)]
        assert in_windows(0.5, windows)
        assert not in_windows(1.0, windows)
        assert in_windows(-0.7, windows)
        assert in_windows(123.0, None)

    def test_gated_response_outside_window(self) -> None:
        bath = _bath(coupling_windows=[(0.9, 1.1)])
        assert gated_response(0.5, bath) == 0.0
        assert gated_response(-0.5, bath) == 0.0
        assert gated_response(1.0, bath) == spectral_response(1.0, bath)

    def test_bath_response_gates_filtered_baths(self) -> None:
        bath = _bath(coupling_windows=[(0.9, 1.1)], filter=FilterSpec(center=1.0, strength=0.02))
        assert bath_response(1.5, bath) == 0.0
        assert bath_response(1.0, bath) == pytest.approx(0.02 / math.pi)

    def test_sample_responses(self) -> None:
        samples = sample_responses(_bath(), [-1.0, 0.5, 1.0])
        assert [s.omega for s in samples] == [-1.0, 0.5, 1.0]
        assert all(s.bath_role == "hot" for s in samples)
        assert all(s.value > 0 for s in samples)
