"""Quantum absorption refrigerator simulator and study engine."""

__version__ = "1.0.0"

from .config import validate
from .errors import ConfigError, QarError, SolverError
from .models import SystemConfig, ValidatedConfig

__all__ = [
    "__version__",
    "ConfigError",
    "QarError",
    "SolverError",
    "SystemConfig",
    "ValidatedConfig",
    "validate",
]
