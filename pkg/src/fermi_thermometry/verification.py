"""
Self-checks run by the `verify` command. Each check compares two
independent routes to the same quantity and reports the discrepancy.
"""

import logging
from typing import Callable, List, Optional

import numpy as np
import pandas as pd

from fermi_thermometry.metrology import (
    fi_rate,
    markovian_fi_rate_closed_form,
    qfi_markovian,
)
from fermi_thermometry.model import ModelParams, fermi, fermi_dT
from fermi_thermometry.multi_probe import evolve_correlations
from fermi_thermometry.quad import QuadConfig
from fermi_thermometry.single_probe import (
    fdr_check,
    p1_exact,
    p1_exact_dT,
    p1_steady,
    p1_steady_dT,
)

logger = logging.getLogger(__name__)

SEED = 20240101


def _row(check: str, value: float, reference: float, tolerance: float) -> dict:
    return {
        "check": check,
        "passed": bool(np.isfinite(value) and value <= tolerance),
        "value": float(value),
        "reference": float(reference),
        "tolerance": float(tolerance),
    }


def _relative(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(b), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b) / scale))


def _centred_difference(func: Callable[[float], float], x: float, h: float) -> float:
    return (func(x + h) - func(x - h)) / (2.0 * h)


def check_fdr(params: ModelParams) -> dict:
    """Noise spectrum against 4 pi f Re chi on 100 frequencies."""
    omega = params.mu + params.temperature * np.linspace(-20.0, 20.0, 100)
    noise, dissipation = fdr_check(omega, params)
    mask = noise != 0
    return _row("fdr", _relative(dissipation[mask], noise[mask]), float(np.max(noise)), 1e-12)


def check_single_mode_reduction(cfg: QuadConfig, samples: int = 20) -> dict:
    """One-mode correlation evolution against p1_exact on random (Gamma, T, t)."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for gamma, temperature, t in zip(10 ** rng.uniform(-1, 0.5, samples),
                                     10 ** rng.uniform(-1, 1, samples),
                                     rng.uniform(0.1, 10.0, samples)):
        params = ModelParams.single(gamma=gamma, temperature=temperature)
        direct = p1_exact(t, params, cfg)
        correlated = evolve_correlations(t, params, cfg).c[0, 0].real
        worst = max(worst, abs(correlated - direct))
    return _row("n1_reduction", worst, 0.0, 1e-8)


def check_fermi_derivative(params: ModelParams) -> dict:
    omega = params.mu + params.temperature * np.linspace(-8.0, 8.0, 41)
    omega = omega[omega != params.mu]
    h = 1e-5 * params.temperature

    def at(temperature):
        return fermi(omega, params.replace(temperature=temperature))

    numeric = (at(params.temperature + h) - at(params.temperature - h)) / (2.0 * h)
    analytic = fermi_dT(omega, params)
    return _row("fermi_dT", _relative(analytic, numeric), float(np.max(np.abs(numeric))), 1e-5)


def check_population_derivatives(params: ModelParams, t: float, cfg: QuadConfig) -> List[dict]:
    h = 1e-3 * params.temperature

    def exact(temperature):
        return p1_exact(t, params.replace(temperature=temperature), cfg)

    def steady(temperature):
        return p1_steady(params.replace(temperature=temperature), cfg)

    fd_exact = _centred_difference(exact, params.temperature, h)
    fd_steady = _centred_difference(steady, params.temperature, h)
    return [
        _row("p1_exact_dT", _relative(p1_exact_dT(t, params, cfg), fd_exact), fd_exact, 1e-4),
        _row("p1_steady_dT", _relative(p1_steady_dT(params, cfg), fd_steady), fd_steady, 1e-4),
    ]


def check_steady_limit(params: ModelParams, cfg: QuadConfig) -> dict:
    """p1_exact at t = 50/Gamma against the steady state."""
    late = p1_exact(50.0 / params.gamma, params, cfg)
    steady = p1_steady(params, cfg)
    return _row("steady_limit", abs(late - steady), steady, 1e-4)


def check_weak_coupling(cfg: QuadConfig) -> dict:
    """Steady state at Gamma = 1e-4 against the Fermi function at the probe energy."""
    worst = 0.0
    for temperature in (0.1, 1.0, 10.0):
        params = ModelParams.single(gamma=1e-4, temperature=temperature)
        worst = max(worst, abs(p1_steady(params, cfg) - float(fermi(params.epsilon, params))))
    return _row("weak_coupling", worst, 0.0, 1e-3)


def check_markovian_closed_form(params: ModelParams) -> dict:
    empty = params.replace(initial_occupations=(0.0,))
    times = np.geomspace(1e-2, 50.0, 25) / empty.gamma
    composed = [fi_rate(t, qfi_markovian(t, empty)) for t in times]
    closed = [markovian_fi_rate_closed_form(t, empty) for t in times]
    return _row("markovian_closed_form", _relative(closed, composed), float(np.max(composed)), 1e-10)


def run_checks(params: Optional[ModelParams] = None, cfg: Optional[QuadConfig] = None) -> pd.DataFrame:
    """
    Run every check.

    Returns:
        DataFrame with columns check, passed, value (discrepancy),
        reference (scale of the compared quantity) and tolerance
    """
    cfg = cfg or QuadConfig()
    params = params or ModelParams.single(gamma=1.0, temperature=0.5)
    rows = [
        check_fdr(params),
        check_single_mode_reduction(cfg),
        check_fermi_derivative(params),
        *check_population_derivatives(params, 2.0 / params.gamma, cfg),
        check_steady_limit(params, cfg),
        check_weak_coupling(cfg),
        check_markovian_closed_form(params),
    ]
    for row in rows:
        logger.debug("check %(check)s: value=%(value).3e tol=%(tolerance).1e", row)
    return pd.DataFrame(rows, columns=["check", "passed", "value", "reference", "tolerance"])
