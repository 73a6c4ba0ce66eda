"""Bath spectral response functions G(omega).

Positive frequencies are emission into the bath, negative frequencies
absorption from it.  Every mode (plain, filtered, gated) satisfies detailed
balance ``G(-w) = exp(-w/T) G(w)``: negative branches are always derived from
the positive branch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import integrate

from src.qar.errors import DomainError, QuadratureFailure
from src.qar.models import BathSpec

logger = logging.getLogger(__name__)

_EXP_OVERFLOW: float = 700.0
_DEFAULT_CUTOFF: float = 1000.0
_PV_RTOL: float = 1e-6
_TAIL_CUTOFFS: float = 50.0


@dataclass(frozen=True)
class ResponseSample:
    omega: float
    value: float
    bath_role: Optional[str]


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

def bose_occupation(omega: float, temperature: float) -> float:
    """Mean thermal occupation ``1 / (exp(omega/T) - 1)``.

    Raises:
        DomainError: If ``omega <= 0`` or ``temperature <= 0``.
    """
    if omega <= 0:
        raise DomainError(f"bose_occupation needs omega > 0, got {omega}")
    if temperature <= 0:
        raise DomainError(f"bose_occupation needs T > 0, got {temperature}")
    x = omega / temperature
    if x > _EXP_OVERFLOW:
        return 0.0
    return 1.0 / math.expm1(x)


def ohmic_density(omega: float, kappa: float, exponent: float, cutoff: float) -> float:
    """Ohmic-family spectral density ``kappa * w**p * wct**(p-1) * exp(-w/wct)``."""
    if omega <= 0:
        raise DomainError(f"ohmic_density needs omega > 0, got {omega}")
    return kappa * omega**exponent * cutoff ** (exponent - 1.0) * math.exp(-omega / cutoff)


def damping_rate(omega: float, bath: BathSpec) -> float:
    """``gamma(w) = 2 pi J(w)``."""
    cutoff = bath.cutoff if bath.cutoff is not None else _DEFAULT_CUTOFF
    return 2.0 * math.pi * ohmic_density(omega, bath.kappa, bath.ohmic_exponent, cutoff)


def _zero_frequency_limit(bath: BathSpec) -> float:
    p = bath.ohmic_exponent
    if p == 1.0:
        return 2.0 * math.pi * bath.kappa * bath.temperature
    if p > 1.0:
        return 0.0
    raise DomainError("sub-Ohmic response diverges at omega = 0")


def _detailed_balance(positive_value: float, omega_abs: float, temperature: float) -> float:
    x = omega_abs / temperature
    if x > _EXP_OVERFLOW:
        return 0.0
    return positive_value * math.exp(-x)


# ---------------------------------------------------------------------------
# Response modes
# ---------------------------------------------------------------------------

def spectral_response(omega: float, bath: BathSpec) -> float:
    """Unfiltered two-branch response of one bath.

    ``w > 0`` gives ``gamma(w)(1 + n(w))``; ``w < 0`` gives ``gamma(|w|) n(|w|)``.
    ``w = 0`` returns the continuous limit (``2 pi kappa T`` for ``p = 1``,
    ``0`` for ``p > 1``).
    """
    if omega == 0.0:
        return _zero_frequency_limit(bath)
    w = abs(omega)
    x = w / bath.temperature
    # gamma (1 + n) = gamma / (1 - exp(-x))
    emission = damping_rate(w, bath) / -math.expm1(-x)
    if omega > 0:
        return emission
    return _detailed_balance(emission, w, bath.temperature)


def principal_value_shift(omega: float, bath: BathSpec) -> float:
    """Lamb-type shift ``P int_0^inf G(w') / (w - w') dw'`` of the unfiltered response.

    The pole is handled by Cauchy-weighted quadrature on ``[0, 2w]``; the
    remaining tail is integrated up to fifty cutoffs.

    Raises:
        QuadratureFailure: If either piece misses the relative tolerance.
    """
    if omega <= 0:
        raise DomainError(f"principal_value_shift needs omega > 0, got {omega}")
    cutoff = bath.cutoff if bath.cutoff is not None else _DEFAULT_CUTOFF

    def response(x: float) -> float:
        return spectral_response(x, bath)

    split = 2.0 * omega
    upper = max(_TAIL_CUTOFFS * cutoff, 4.0 * omega)
    # quad's cauchy weight integrates f(x) / (x - c); the shift carries (c - x).
    near, near_err = integrate.quad(response, 0.0, split, weight="cauchy", wvar=omega, limit=200)
    tail_points = [p for p in (cutoff,) if split < p < upper]
    tail, tail_err = integrate.quad(
        lambda x: response(x) / (x - omega), split, upper, limit=500, points=tail_points or None
    )
    value = -(near + tail)
    error = near_err + tail_err
    if error > _PV_RTOL * max(abs(value), 1e-300):
        raise QuadratureFailure(
            f"principal value at omega={omega} reached error {error:.3e} for value {value:.6e}"
        )
    return value


def filtered_response(omega: float, bath: BathSpec) -> float:
    """Lorentzian-filtered response.

    ``(kf/pi) (pi G)^2 / ((w - wf - Delta)^2 + (pi G)^2)`` on the positive branch,
    detailed balance for the negative one.
    """
    if bath.filter is None:
        raise DomainError("filtered_response requires a bath filter")
    f = bath.filter
    w = abs(omega)
    base = spectral_response(w, bath)
    shift = principal_value_shift(w, bath) if f.lamb_shift_mode == "numeric-PV" and w > 0 else 0.0
    half_width = math.pi * base
    if half_width == 0.0:
        return 0.0
    detuning = w - f.center - shift
    positive = (f.strength / math.pi) * half_width**2 / (detuning**2 + half_width**2)
    if omega >= 0:
        return positive
    return _detailed_balance(positive, w, bath.temperature)


def in_windows(omega: float, windows: Optional[Iterable[tuple[float, float]]]) -> bool:
    """``True`` if ``|omega|`` lies in a half-open window, or if there are no windows."""
    if windows is None:
        return True
    w = abs(omega)
    return any(lo <= w < hi for lo, hi in windows)


def gated_response(omega: float, bath: BathSpec) -> float:
    """Unfiltered response restricted to the bath's coupling windows."""
    if not in_windows(omega, bath.coupling_windows):
        return 0.0
    return spectral_response(omega, bath)


def bath_response(omega: float, bath: BathSpec) -> float:
    """Response used by the master equation: filtered if a filter is set, then gated."""
    if not in_windows(omega, bath.coupling_windows):
        return 0.0
    if bath.filter is not None:
        return filtered_response(omega, bath)
    return spectral_response(omega, bath)


def sample_responses(bath: BathSpec, omegas: Iterable[float]) -> list[ResponseSample]:
    """Tabulate ``bath_response`` on a frequency grid."""
    samples = [ResponseSample(float(w), bath_response(float(w), bath), bath.role) for w in omegas]
    if any(s.value < 0 or not np.isfinite(s.value) for s in samples):
        logger.warning("non-finite or negative response for %s bath", bath.role)
    return samples
