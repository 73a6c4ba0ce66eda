"""
tests/conftest.py
─────────────────
Shared pytest fixtures for the refrigerator test suite.
"""

from pathlib import Path
from typing import Any, Callable

import pytest

from src.qar.models import SystemConfig

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def make_config(
    *,
    kind: str = "TLS",
    omega_c: float = 0.05,
    g: float = 0.005,
    temperatures: tuple[float, float, float] = (0.75, 0.5, 0.125),
    kappa: float = 0.005,
    **extra: Any,
) -> SystemConfig:
    """Build a raw configuration with identical damping on all three baths."""
    t_w, t_h, t_c = temperatures
    data: dict[str, Any] = {
        "medium": {"kind": kind},
        "omega_h": 1.0,
        "omega_c": omega_c,
        "g": g,
        "bath": {
            "work": {"temperature": t_w, "kappa": kappa},
            "hot": {"temperature": t_h, "kappa": kappa},
            "cold": {"temperature": t_c, "kappa": kappa},
        },
    }
    data.update(extra)
    return SystemConfig.model_validate(data)


@pytest.fixture
def config_factory() -> Callable[..., SystemConfig]:
    """Return ``make_config`` so tests can vary one parameter at a time."""
    return make_config


@pytest.fixture
def weak_config() -> SystemConfig:
    """Coupled qubits at T = {0.75, 0.5, 0.125}, g = 0.005, inside the cooling window."""
    return make_config()


@pytest.fixture
def warm_config() -> SystemConfig:
    """Coupled qubits at T = {3, 2, 1} (Carnot COP 1/3, window edge 0.25)."""
    return make_config(omega_c=0.1, g=0.01, temperatures=(3.0, 2.0, 1.0))


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[str, str], Path]:
    """Write a YAML config into the test's temporary directory and return its path."""

    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
