"""Exception hierarchy for the absorption-refrigerator engine.

Configuration problems derive from ``ConfigError`` (also a ``ValueError``) and
always name the offending dotted config key.  Numerical failures derive from
``SolverError``.  Soft conditions (truncation, validity, degeneracy) are report
flags, not exceptions.
"""

from __future__ import annotations


class QarError(Exception):
    """Base class for every error raised by the package."""


# ---------------------------------------------------------------------------
# Configuration errors
# ---------------------------------------------------------------------------

class ConfigError(QarError, ValueError):
    """A configuration failed semantic validation.

    Args:
        violations: ``(key, message)`` pairs, one per offending config key.
    """

    def __init__(self, violations: list[tuple[str, str]]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(f"{key}: {msg}" for key, msg in self.violations))


class TemperatureOrderViolation(ConfigError):
    """Bath temperatures are not strictly ordered T_w > T_h > T_c."""


class NonPositiveParameter(ConfigError):
    """A parameter that must be positive (or non-negative) is not."""


class TruncationTooSmall(ConfigError):
    """An oscillator Fock truncation is below two levels."""


class InvalidMedium(ConfigError):
    """Truncations are inconsistent with the medium kind."""


class InvalidWindow(ConfigError):
    """Coupling windows overlap or have non-positive width."""


class OutputExists(QarError, FileExistsError):
    """The output directory already holds a run and ``--force`` was not given."""


# ---------------------------------------------------------------------------
# Numerical errors
# ---------------------------------------------------------------------------

class DomainError(QarError, ValueError):
    """A function was evaluated outside its mathematical domain."""


class NegativeRate(QarError, ValueError):
    """A Lindblad rate prefactor is negative."""


class SolverError(QarError, RuntimeError):
    """A numerical procedure failed."""


class DegenerateSteadyState(SolverError):
    """The generator has more than one stationary state."""


class QuadratureFailure(SolverError):
    """The principal-value integral did not reach the requested tolerance."""


class NotRefrigerating(SolverError):
    """The COP was requested for a state that does not refrigerate."""


class NoCoolingInInterval(SolverError):
    """No point of the searched interval refrigerates."""


class StructureViolation(SolverError):
    """A two-qubit steady state lost its block structure."""
