"""Semantic validation, normalisation and hashing of refrigerator configurations.

``validate`` is the single gate: every other module consumes a
``ValidatedConfig`` and never re-checks temperature ordering.

Normalisation
-------------
- frequencies, temperatures, cutoffs, filter parameters and windows are divided
  by ``omega_h`` (which becomes 1);
- ``kappa`` is rescaled so that the spectral density keeps its value;
- missing cutoffs default to ``1000 * omega_h``;
- oscillator truncations left unset are sized from the thermal tail of the
  bath resonant with each oscillator (see ``default_truncation``);
- for the ``ideal`` and ``single_cycle`` layouts the work/hot (swapped: cold/hot)
  coupling windows are derived from the dressed transition frequencies.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Union

import yaml

from src.qar.errors import (
    ConfigError,
    InvalidMedium,
    InvalidWindow,
    NonPositiveParameter,
    TemperatureOrderViolation,
    TruncationTooSmall,
)
from src.qar.models import BATH_ROLES, BathSpec, SystemConfig, ValidatedConfig

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF_RATIO: float = 1000.0
DEFAULT_TRUNCATION: dict[str, tuple[int, int]] = {
    "TLS": (2, 2),
    "TLOS": (2, 12),
    "OMS": (10, 10),
}
TRUNCATION_TAIL: float = 1e-9
MAX_FOCK_LEVELS: int = 240
MAX_OMS_DIMENSION: int = 2500
_MIN_HALF_WIDTH: float = 1e-9

STUDY_TABLES: tuple[str, ...] = ("sweep", "search", "sampling", "leak_study", "swapped_study")

Window = tuple[float, float]


# ---------------------------------------------------------------------------
# Dressed subsystem-B frequency (shared with the medium module)
# ---------------------------------------------------------------------------

def dressed_b_frequency(kind: str, omega_b: float, g: float) -> float:
    """Return the dressed frequency of subsystem B.

    Coupled qubits hybridise: ``sqrt(omega_b**2 + 4 g**2)``.  For a
    qubit-oscillator or two oscillators the polaron frame leaves it at
    ``omega_b``.
    """
    if kind == "TLS":
        return math.sqrt(omega_b * omega_b + 4.0 * g * g)
    return omega_b


def transition_frequencies(config: SystemConfig) -> dict[str, float]:
    """Nominal signed frequencies of the subsystem-A transition families.

    Keys: ``hot``/``work``/``plus`` for the standard topology,
    ``cold``/``minus``/``hot``/``work`` for the swapped one.
    """
    kind = config.medium.kind
    if config.topology == "standard":
        dressed = dressed_b_frequency(kind, config.omega_c, config.g)
        return {
            "hot": config.omega_h,
            "work": config.omega_h - dressed,
            "plus": config.omega_h + dressed,
            "cold": dressed,
        }
    assert config.omega_w is not None
    dressed_w = dressed_b_frequency(kind, config.omega_w, config.g)
    return {
        "cold": config.omega_c,
        "minus": config.omega_c - dressed_w,
        "hot": config.omega_c + dressed_w,
        "work": dressed_w,
    }


def _isolating_half_width(frequencies: list[float]) -> float:
    """Half the smallest gap between distinct points of ``{0} ∪ |frequencies|``."""
    points = sorted({0.0, *(abs(f) for f in frequencies)})
    gaps = [b - a for a, b in zip(points, points[1:]) if b - a > 0]
    if not gaps:
        return _MIN_HALF_WIDTH
    return max(0.5 * min(gaps), _MIN_HALF_WIDTH)


def _window(center: float, half_width: float) -> Window:
    c = abs(center)
    return (max(c - half_width, 0.0), c + half_width)


def layout_windows(config: SystemConfig) -> dict[str, list[Window] | None]:
    """Derive per-role coupling windows for the ``ideal``/``single_cycle`` layouts."""
    freqs = transition_frequencies(config)
    if config.topology == "standard":
        delta = _isolating_half_width([freqs["hot"], freqs["work"], freqs["plus"]])
        hot_center = freqs["hot"] if config.spectral_layout == "ideal" else freqs["plus"]
        return {
            "work": [_window(freqs["work"], delta)],
            "hot": [_window(hot_center, delta)],
            "cold": None,
        }
    delta = _isolating_half_width([freqs["cold"], freqs["minus"], freqs["hot"]])
    return {
        "work": None,
        "hot": [_window(freqs["hot"], delta)],
        "cold": [_window(freqs["cold"], delta)],
    }


# ---------------------------------------------------------------------------
# Fock truncation
# ---------------------------------------------------------------------------

def fock_levels(omega: float, temperature: float, tail: float = TRUNCATION_TAIL) -> int:
    """Smallest ``N`` whose top two thermal levels hold at most ``tail``.

    A thermal oscillator with ``r = exp(-omega / T)`` puts ``(1 - r**2) r**(N-2)``
    on levels ``N-2`` and ``N-1``.
    """
    r = math.exp(-omega / temperature)
    weight = 1.0 - r * r
    if r <= 0.0 or weight <= tail:
        return 2
    return 2 + max(0, math.ceil(math.log(tail / weight) / math.log(r)))


def default_truncation(config: SystemConfig) -> tuple[int, int]:
    """Fock truncations ``(N_A, N_B)`` for a config that leaves them unset.

    Each oscillator is sized from the thermal tail at the temperature of the
    bath resonant with it (A: the hotter of work and hot, B: its own bath),
    never below ``DEFAULT_TRUNCATION`` and capped by ``MAX_FOCK_LEVELS`` and,
    for two oscillators, ``MAX_OMS_DIMENSION``.
    """
    kind = config.medium.kind
    floor_a, floor_b = DEFAULT_TRUNCATION[kind]
    if kind == "TLS":
        return floor_a, floor_b
    if config.topology == "swapped":
        assert config.omega_w is not None
        omega_a, omega_b = config.omega_c, config.omega_w
        t_b = config.bath.work.temperature
    else:
        omega_a, omega_b = config.omega_h, config.omega_c
        t_b = config.bath.cold.temperature
    t_a = max(config.bath.work.temperature, config.bath.hot.temperature)
    wanted_b = max(floor_b, fock_levels(omega_b, t_b))
    n_b = min(wanted_b, MAX_FOCK_LEVELS)
    if n_b < wanted_b:
        logger.warning("oscillator B truncation capped at %d of %d levels", n_b, wanted_b)
    if kind == "TLOS":
        return 2, n_b
    n_a = min(max(floor_a, fock_levels(omega_a, t_a)), MAX_FOCK_LEVELS)
    if n_a * n_b > MAX_OMS_DIMENSION:
        n_b = max(floor_b, MAX_OMS_DIMENSION // n_a)
        logger.warning("OMS truncation capped at %d x %d levels", n_a, n_b)
    return n_a, n_b


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check_positive(
    violations: list[tuple[type[ConfigError], str, str]],
    key: str,
    value: float | None,
    *,
    allow_zero: bool = False,
) -> None:
    if value is None:
        return
    ok = value >= 0 if allow_zero else value > 0
    if not ok or math.isnan(value):
        bound = ">= 0" if allow_zero else "> 0"
        violations.append((NonPositiveParameter, key, f"must be {bound}, got {value}"))


def _check_windows(
    violations: list[tuple[type[ConfigError], str, str]],
    key: str,
    windows: list[Window] | None,
) -> None:
    if windows is None:
        return
    ordered = sorted(windows)
    for lo, hi in ordered:
        if lo < 0 or not hi > lo:
            violations.append((InvalidWindow, key, f"window ({lo}, {hi}) needs 0 <= lo < hi"))
    for (_, hi), (lo, _) in zip(ordered, ordered[1:]):
        if lo < hi:
            violations.append((InvalidWindow, key, "windows must be disjoint"))
            break


def _collect_violations(
    config: SystemConfig, enforce_ordering: bool
) -> list[tuple[type[ConfigError], str, str]]:
    violations: list[tuple[type[ConfigError], str, str]] = []

    kind = config.medium.kind
    trunc_a, trunc_b = config.medium.truncation_A, config.medium.truncation_B
    if kind == "TLS" and (trunc_a not in (None, 2) or trunc_b not in (None, 2)):
        violations.append((InvalidMedium, "medium", "TLS requires truncation_A = truncation_B = 2"))
    if kind == "TLOS" and trunc_a not in (None, 2):
        violations.append((InvalidMedium, "medium.truncation_A", "TLOS requires truncation_A = 2"))
    if kind in ("TLOS", "OMS") and trunc_b is not None and trunc_b < 2:
        violations.append((TruncationTooSmall, "medium.truncation_B", f"must be >= 2, got {trunc_b}"))
    if kind == "OMS" and trunc_a is not None and trunc_a < 2:
        violations.append((TruncationTooSmall, "medium.truncation_A", f"must be >= 2, got {trunc_a}"))

    _check_positive(violations, "omega_h", config.omega_h)
    _check_positive(violations, "omega_c", config.omega_c)
    _check_positive(violations, "g", config.g, allow_zero=True)
    if config.topology == "swapped":
        if config.omega_w is None:
            violations.append((NonPositiveParameter, "omega_w", "required for the swapped topology"))
        else:
            _check_positive(violations, "omega_w", config.omega_w)
        if config.spectral_layout == "single_cycle":
            violations.append((ConfigError, "spectral_layout", "single_cycle requires the standard topology"))
        if config.leak is not None:
            violations.append((ConfigError, "leak", "heat leaks require the standard topology"))

    for role, bath in config.bath.items():
        prefix = f"bath.{role}"
        _check_positive(violations, f"{prefix}.temperature", bath.temperature)
        _check_positive(violations, f"{prefix}.kappa", bath.kappa)
        _check_positive(violations, f"{prefix}.ohmic_exponent", bath.ohmic_exponent)
        _check_positive(violations, f"{prefix}.cutoff", bath.cutoff)
        if bath.filter is not None:
            _check_positive(violations, f"{prefix}.filter.center", bath.filter.center)
            _check_positive(violations, f"{prefix}.filter.strength", bath.filter.strength)
        _check_windows(violations, f"{prefix}.coupling_windows", bath.coupling_windows)

    if enforce_ordering:
        t_w, t_h, t_c = config.temperatures()
        if not (t_w > t_h > t_c):
            violations.append(
                (
                    TemperatureOrderViolation,
                    "bath",
                    f"requires T_w > T_h > T_c, got {t_w}, {t_h}, {t_c}",
                )
            )
    return violations


def _normalised_bath(bath: BathSpec, scale: float) -> BathSpec:
    cutoff = bath.cutoff if bath.cutoff is not None else DEFAULT_CUTOFF_RATIO * scale
    p = bath.ohmic_exponent
    update: dict[str, Any] = {
        "temperature": bath.temperature / scale,
        "cutoff": cutoff / scale,
        # J = kappa * omega**p * cutoff**(p-1) is a rate: keep its value.
        "kappa": bath.kappa * scale ** (2.0 * p - 2.0),
    }
    if bath.filter is not None:
        update["filter"] = bath.filter.model_copy(
            update={
                "center": bath.filter.center / scale,
                "strength": bath.filter.strength / scale,
            }
        )
    if bath.coupling_windows is not None:
        update["coupling_windows"] = [(lo / scale, hi / scale) for lo, hi in bath.coupling_windows]
    return bath.model_copy(update=update)


def validate(config: SystemConfig, *, enforce_ordering: bool = True) -> ValidatedConfig:
    """Check a configuration and return its normalised form.

    Args:
        config: Raw (or already validated) configuration.
        enforce_ordering: Require ``T_w > T_h > T_c``.  Disabled only for
            equilibrium checks.

    Returns:
        A frozen ``ValidatedConfig``.  ``validate`` is idempotent.

    Raises:
        ConfigError: Subclass matching the first violation; ``violations``
            lists every offending key.
    """
    violations = _collect_violations(config, enforce_ordering)
    if violations:
        first_cls = violations[0][0]
        raise first_cls([(key, msg) for _, key, msg in violations])

    scale = config.omega_h
    trunc_a, trunc_b = default_truncation(config)
    medium = config.medium.model_copy(
        update={
            "truncation_A": config.medium.truncation_A or trunc_a,
            "truncation_B": config.medium.truncation_B or trunc_b,
        }
    )
    baths = {role: _normalised_bath(bath, scale) for role, bath in config.bath.items()}
    scaled = config.model_copy(
        update={
            "medium": medium,
            "omega_h": 1.0,
            "omega_c": config.omega_c / scale,
            "omega_w": None if config.omega_w is None else config.omega_w / scale,
            "g": config.g / scale,
            "bath": config.bath.model_copy(update=baths),
        }
    )

    if scaled.spectral_layout != "explicit":
        derived = layout_windows(scaled)
        baths = {
            role: scaled.bath.by_role(role).model_copy(update={"coupling_windows": derived[role]})
            for role in BATH_ROLES
        }
    data = scaled.model_copy(update={"bath": scaled.bath.model_copy(update=baths)}).model_dump()
    validated = ValidatedConfig.model_validate(data)
    logger.debug("validated %s config, hash %s", validated.medium.kind, config_hash(validated))
    return validated


# ---------------------------------------------------------------------------
# Canonical form, hashing and file loading
# ---------------------------------------------------------------------------

def canonical_bytes(config: SystemConfig) -> bytes:
    """Platform-independent serialisation used for hashing."""
    payload = config.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def config_hash(config: SystemConfig) -> str:
    return hashlib.sha256(canonical_bytes(config)).hexdigest()


def load_config_file(path: Union[str, Path]) -> tuple[SystemConfig, dict[str, Any]]:
    """Read a YAML config file.

    Returns:
        The system configuration and the study tables (``sweep``, ``search``,
        ``sampling``, ``leak_study``, ``swapped_study``) found alongside it.
    """
    with open(path, encoding="utf-8") as handle:
        data = yaml.safe_load(handle) or {}
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "config file must hold a mapping of keys")])
    studies = {key: data.pop(key) for key in STUDY_TABLES if key in data}
    return SystemConfig.model_validate(data), studies


def with_overrides(config: SystemConfig, **fields: Any) -> SystemConfig:
    """Return a copy of a raw config with top-level fields or bath fields replaced.

    Bath fields use keys like ``T_w`` / ``kappa_c``; ``ohmic_exponent`` applies to
    all three baths.
    """
    baths = {role: config.bath.by_role(role) for role in BATH_ROLES}
    top: dict[str, Any] = {}
    for key, value in fields.items():
        if key.startswith(("T_", "kappa_")):
            attr, role_key = key.split("_", 1)
            role = {"w": "work", "h": "hot", "c": "cold"}[role_key]
            name = "temperature" if attr == "T" else "kappa"
            baths[role] = baths[role].model_copy(update={name: value})
        elif key == "ohmic_exponent":
            baths = {r: b.model_copy(update={"ohmic_exponent": value}) for r, b in baths.items()}
        else:
            top[key] = value
    data = config.model_dump()
    data.update(top)
    data["bath"] = {role: bath.model_dump() for role, bath in baths.items()}
    return SystemConfig.model_validate(data)
