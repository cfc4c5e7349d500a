"""
Module for the dynamics of a single fermionic probe: exact (non-Markovian)
and Markovian occupations, their temperature derivatives, the steady state,
the short-time expansion and the fluctuation-dissipation check.
"""

import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fermi_thermometry.errors import (
    DivergentExpansion,
    InvalidParameters,
    OutOfRange,
)
from fermi_thermometry.model import ModelParams, fermi, fermi_dT
from fermi_thermometry.quad import (
    QuadConfig,
    integrate_panels,
    integrate_response,
    single_mode_response,
)

logger = logging.getLogger(__name__)

METHODS = ("exact", "markovian", "short_time")
SHORT_TIME_WARN = 0.1


@dataclass
class Trajectory:
    """Occupation p1(t) and dp1/dT of one probe on a time grid."""

    times: np.ndarray
    p1: np.ndarray
    dp1_dT: np.ndarray
    method: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.p1 = np.asarray(self.p1, dtype=float)
        self.dp1_dT = np.asarray(self.dp1_dT, dtype=float)
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.times.shape == self.p1.shape == self.dp1_dT.shape):
            raise ValueError("times, p1 and dp1_dT must have equal length")
        if self.times.size and (self.times[0] < 0 or np.any(np.diff(self.times) <= 0)):
            raise ValueError("times must be strictly increasing and start at t >= 0")
        if np.any((self.p1 < 0) | (self.p1 > 1)):
            raise ValueError("p1 values must lie in [0, 1]")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "p1": self.p1,
            "dp1_dT": self.dp1_dT,
            "method": self.method,
        })


def _check_time(t: float) -> None:
    if not (np.isfinite(t) and t >= 0):
        raise InvalidParameters(f"t must be finite and >= 0, got {t}")


def _as_probability(value: float, cfg: QuadConfig) -> float:
    """Clamp tiny quadrature excursions outside [0, 1]; reject larger ones."""
    excursion = max(-value, value - 1.0, 0.0)
    if excursion > cfg.abs_tol:
        raise OutOfRange(f"population {value!r} outside [0, 1] by {excursion:.3e}")
    return min(max(value, 0.0), 1.0)


def p1_exact_with_derivative(t: float, params: ModelParams,
                             cfg: Optional[QuadConfig] = None) -> Tuple[float, float]:
    """
    Exact population and its temperature derivative from one quadrature pass.

        p1(t) = e^{-Gamma t} p1(0) + (Gamma/2pi) int f |g(omega, t)|^2 d omega

    which equals e^{-Gamma t} p1(0) + (2 Gamma/pi) int f w_t with w_t the
    transient Lorentzian weight.

    Returns:
        (p1, dp1_dT)
    """
    cfg = cfg or QuadConfig()
    _check_time(t)
    p0 = params.p0
    if t == 0:
        return p0, 0.0
    response = single_mode_response(params, t)
    n = integrate_response(response, params, cfg, ("fermi", "fermi_dT"))
    scale = params.gamma / (2.0 * np.pi)
    p1 = np.exp(-params.gamma * t) * p0 + scale * n[0, 0, 0].real
    return _as_probability(float(p1), cfg), float(scale * n[1, 0, 0].real)


def p1_exact(t: float, params: ModelParams, cfg: Optional[QuadConfig] = None) -> float:
    """Exact occupation of the probe at time t."""
    cfg = cfg or QuadConfig()
    _check_time(t)
    if t == 0:
        return params.p0
    response = single_mode_response(params, t)
    n = integrate_response(response, params, cfg, ("fermi",))
    p1 = np.exp(-params.gamma * t) * params.p0 + params.gamma / (2.0 * np.pi) * n[0, 0, 0].real
    return _as_probability(float(p1), cfg)


def p1_exact_dT(t: float, params: ModelParams, cfg: Optional[QuadConfig] = None) -> float:
    """Temperature derivative of p1_exact, taken under the integral."""
    cfg = cfg or QuadConfig()
    _check_time(t)
    if t == 0:
        return 0.0
    response = single_mode_response(params, t)
    n = integrate_response(response, params, cfg, ("fermi_dT",))
    return float(params.gamma / (2.0 * np.pi) * n[0, 0, 0].real)


def p1_steady(params: ModelParams, cfg: Optional[QuadConfig] = None) -> float:
    """Steady-state occupation (2 Gamma/pi) int f/(Gamma^2 + 4(omega-eps)^2) d omega."""
    cfg = cfg or QuadConfig()
    response = single_mode_response(params, None)
    n = integrate_response(response, params, cfg, ("fermi",))
    return _as_probability(float(params.gamma / (2.0 * np.pi) * n[0, 0, 0].real), cfg)


def p1_steady_dT(params: ModelParams, cfg: Optional[QuadConfig] = None) -> float:
    cfg = cfg or QuadConfig()
    response = single_mode_response(params, None)
    n = integrate_response(response, params, cfg, ("fermi_dT",))
    return float(params.gamma / (2.0 * np.pi) * n[0, 0, 0].real)


def p1_steady_with_derivative(params: ModelParams,
                              cfg: Optional[QuadConfig] = None) -> Tuple[float, float]:
    cfg = cfg or QuadConfig()
    response = single_mode_response(params, None)
    n = integrate_response(response, params, cfg, ("fermi", "fermi_dT"))
    scale = params.gamma / (2.0 * np.pi)
    return _as_probability(float(scale * n[0, 0, 0].real), cfg), float(scale * n[1, 0, 0].real)


def p1_markovian(t: float, params: ModelParams) -> float:
    """Rate-equation solution e^{-Gamma t} p1(0) + (1 - e^{-Gamma t}) f(eps)."""
    _check_time(t)
    decay = np.exp(-params.gamma * t)
    return float(decay * params.p0 - np.expm1(-params.gamma * t) * fermi(params.epsilon, params))


def p1_markovian_dT(t: float, params: ModelParams) -> float:
    _check_time(t)
    return float(-np.expm1(-params.gamma * t) * fermi_dT(params.epsilon, params))


def p1_short_time(t: float, params: ModelParams, cfg: Optional[QuadConfig] = None,
                  half_width: Optional[float] = None) -> float:
    """
    Second-order short-time expansion

        p1(t) ~ n0 + t^2 (Gamma/2pi) int_{mu-W}^{mu+W} (f(omega) - n0) d omega

    over a window symmetric about mu. With a flat band the window integral
    is 2W(1/2 - n0), so it only converges for n0 = 1/2; without an explicit
    `half_width` the window is doubled once and DivergentExpansion is raised
    when the value moves.

    Raises:
        DivergentExpansion: if the window integral depends on W
    """
    cfg = cfg or QuadConfig()
    _check_time(t)
    n0 = params.p0
    if t == 0:
        return n0
    if params.gamma * t > SHORT_TIME_WARN:
        logger.warning("short-time expansion used at Gamma*t = %.3g > %.1f",
                       params.gamma * t, SHORT_TIME_WARN)

    def window(width: float) -> float:
        edges = params.mu + width * np.linspace(-1.0, 1.0, 33)
        return float(integrate_panels(lambda w: fermi(w, params) - n0, edges, cfg).real)

    if half_width is None:
        width = cfg.fermi_cutoff * params.temperature
        value = window(width)
        doubled = window(2.0 * width)
        if abs(doubled - value) > max(cfg.abs_tol, cfg.rel_tol * abs(value)) * 10.0:
            raise DivergentExpansion(
                f"window integral changes from {value:.6g} to {doubled:.6g} when W doubles; "
                f"pass half_width to fix the band cutoff"
            )
    else:
        if not half_width > 0:
            raise InvalidParameters(f"half_width must be > 0, got {half_width}")
        value = window(half_width)

    return float(n0 + t ** 2 * params.gamma / (2.0 * np.pi) * value)


def fdr_check(omega, params: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Both sides of the fluctuation-dissipation relation in the frequency
    domain: the noise spectrum C(omega) = 2 pi f(omega) Gamma(omega) and
    4 pi f(omega) Re chi(omega) with Re chi = Gamma(omega)/2.
    """
    density = params.bath.spectral_density(omega)
    f = fermi(omega, params)
    noise = 2.0 * np.pi * f * density
    dissipation = 4.0 * np.pi * f * (density / 2.0)
    return noise, dissipation


def _trajectory_point(t: float, params: ModelParams, method: str, cfg: QuadConfig) -> Tuple[float, float]:
    if method == "exact":
        return p1_exact_with_derivative(t, params, cfg)
    if method == "markovian":
        return p1_markovian(t, params), p1_markovian_dT(t, params)
    return p1_short_time(t, params, cfg, half_width=np.pi / t if t > 0 else None), np.nan


def build_trajectory(times: Sequence[float], params: ModelParams, method: str = "exact",
                     cfg: Optional[QuadConfig] = None,
                     executor: Optional[Executor] = None) -> Trajectory:
    """
    Evaluate the occupation on a time grid.

    Grid points are independent; with an executor they are mapped in
    parallel and collected in grid order.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    cfg = cfg or QuadConfig()
    times = np.asarray(times, dtype=float)
    point = partial(_trajectory_point, params=params, method=method, cfg=cfg)
    mapper = executor.map if executor is not None else map
    results = list(mapper(point, times))
    p1 = np.array([r[0] for r in results])
    dp1 = np.array([r[1] for r in results])
    return Trajectory(times=times, p1=p1, dp1_dT=dp1, method=method)
