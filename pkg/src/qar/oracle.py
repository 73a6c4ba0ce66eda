"""Closed-form rate equations for the coupled-qubit refrigerator with an infinitely hot work bath.

The two excitation probabilities ``x_h = <s+_h s-_h>`` and ``x_c = <s+_c s-_c>``
obey linear rate equations in the ideal layout.  Their stationary solution
gives currents proportional to the transition frequencies, ``J_alpha = w_alpha K``.

With ``a = c2 G_h``, ``b = c2 G_c``, ``W = s2 G_w``, ``q_h = exp(-w_h/T_h)``,
``q_c = exp(-w~_c/T_c)``, ``A = a (1 + q_h)`` and ``B = b (1 + q_c)``::

    K = W a b (q_c - q_h) / (A B + W (A + B))
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from src.qar.config import transition_frequencies
from src.qar.errors import DomainError
from src.qar.medium import dressed_frequencies
from src.qar.models import SystemConfig
from src.qar.spectra import bose_occupation, spectral_response

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateParams:
    """Rates, weights, temperatures and frequencies of the coupled-qubit rate model."""

    gamma_w: float
    gamma_h: float
    gamma_c: float
    c2: float
    s2: float
    t_h: float
    t_c: float
    omega_h: float
    omega_c_tilde: float
    omega_w: float

    def __post_init__(self) -> None:
        for name in ("gamma_w", "gamma_h", "gamma_c"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")

    @property
    def q_h(self) -> float:
        return math.exp(-self.omega_h / self.t_h)

    @property
    def q_c(self) -> float:
        return math.exp(-self.omega_c_tilde / self.t_c)

    @classmethod
    def from_config(cls, config: SystemConfig) -> "RateParams":
        """Emission rates ``G_alpha(w_alpha)`` of the numeric solver's baths."""
        freqs = transition_frequencies(config)
        dressed = dressed_frequencies("TLS", config.omega_c, config.g)
        omega_w = freqs["work"]
        return cls(
            gamma_w=spectral_response(omega_w, config.bath.work),
            gamma_h=spectral_response(config.omega_h, config.bath.hot),
            gamma_c=spectral_response(dressed.omega_b_tilde, config.bath.cold),
            c2=dressed.c2,
            s2=dressed.s2,
            t_h=config.bath.hot.temperature,
            t_c=config.bath.cold.temperature,
            omega_h=config.omega_h,
            omega_c_tilde=dressed.omega_b_tilde,
            omega_w=omega_w,
        )

    @classmethod
    def from_literal_kappas(cls, config: SystemConfig) -> "RateParams":
        """Literal rates ``G_alpha = w_alpha kappa_alpha n(w_alpha)``.

        The work-bath occupation is evaluated at the configured ``T_w``.
        """
        base = cls.from_config(config)
        baths = config.bath

        def gamma(omega: float, kappa: float, temperature: float) -> float:
            return omega * kappa * bose_occupation(omega, temperature)

        return cls(
            gamma_w=gamma(base.omega_w, baths.work.kappa, baths.work.temperature),
            gamma_h=gamma(base.omega_h, baths.hot.kappa, baths.hot.temperature),
            gamma_c=gamma(base.omega_c_tilde, baths.cold.kappa, baths.cold.temperature),
            c2=base.c2,
            s2=base.s2,
            t_h=base.t_h,
            t_c=base.t_c,
            omega_h=base.omega_h,
            omega_c_tilde=base.omega_c_tilde,
            omega_w=base.omega_w,
        )


def rate_odes(params: RateParams, x: np.ndarray) -> np.ndarray:
    """``d/dt (x_h, x_c)``."""
    x_h, x_c = x
    a = params.c2 * params.gamma_h
    b = params.c2 * params.gamma_c
    w = params.s2 * params.gamma_w
    dx_h = -a * (1.0 + params.q_h) * x_h + a * params.q_h + w * (x_c - x_h)
    dx_c = -b * (1.0 + params.q_c) * x_c + b * params.q_c + w * (x_h - x_c)
    return np.array([dx_h, dx_c])


def _linear_system(params: RateParams) -> tuple[np.ndarray, np.ndarray]:
    a = params.c2 * params.gamma_h
    b = params.c2 * params.gamma_c
    w = params.s2 * params.gamma_w
    matrix = np.array(
        [
            [-a * (1.0 + params.q_h) - w, w],
            [w, -b * (1.0 + params.q_c) - w],
        ]
    )
    offset = np.array([a * params.q_h, b * params.q_c])
    return matrix, offset


def stationary_point(params: RateParams) -> np.ndarray:
    """Fixed point of ``rate_odes`` by a 2x2 linear solve."""
    matrix, offset = _linear_system(params)
    return linalg.solve(matrix, -offset)


def integrate_rates(params: RateParams, t_final: float, x0: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Integrate the rate equations to ``t_final`` (stiff Radau scheme)."""
    solution = integrate.solve_ivp(
        lambda _t, x: rate_odes(params, x),
        (0.0, t_final),
        np.asarray(x0, dtype=float),
        method="Radau",
        rtol=1e-12,
        atol=1e-14,
    )
    if not solution.success:
        logger.warning("rate integration stopped early: %s", solution.message)
    return solution.y[:, -1]


def k_factor(params: RateParams) -> float:
    a = params.c2 * params.gamma_h
    b = params.c2 * params.gamma_c
    w = params.s2 * params.gamma_w
    big_a = a * (1.0 + params.q_h)
    big_b = b * (1.0 + params.q_c)
    return w * a * b * (params.q_c - params.q_h) / (big_a * big_b + w * (big_a + big_b))


def analytic_currents(params: RateParams) -> dict[str, float]:
    """``{work: w_w K, hot: -w_h K, cold: w~_c K}``; ``K > 0`` means cooling."""
    k = k_factor(params)
    return {
        "work": params.omega_w * k,
        "hot": -params.omega_h * k,
        "cold": params.omega_c_tilde * k,
    }


def work_exchange_current(params: RateParams, x: np.ndarray) -> float:
    """Net rate of work-driven swaps ``W (x_h - x_c)`` at state ``x``; equals ``-K`` when stationary."""
    return params.s2 * params.gamma_w * (x[0] - x[1])
