"""
Module for temperature-estimation figures of merit: two-outcome Fisher
information, quantum Fisher information through the symmetric logarithmic
derivative, Fisher-information rates, noise-to-signal ratios, and the
scalar optimiser used for the optimal time, coupling and temperature.
"""

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit

from fermi_thermometry.errors import (
    DegenerateDistribution,
    FlatObjective,
    InvalidParameters,
    NotAState,
)
from fermi_thermometry.model import ModelParams
from fermi_thermometry.quad import QuadConfig
from fermi_thermometry.single_probe import (
    p1_exact_with_derivative,
    p1_markovian,
    p1_markovian_dT,
    p1_steady_with_derivative,
)

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2

STATE_TOL = 1e-10
EIGEN_THRESHOLD = 1e-12
T_STAR_WINDOW = (1e-4, 50.0)  # in units of 1/Gamma


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass
class Optimum:
    """Result of optimize_scalar."""

    argmax: float
    value: float
    boundary: Optional[str] = None
    converged: bool = True
    evaluations: int = 0

    @property
    def at_boundary(self) -> bool:
        return self.boundary is not None


@dataclass
class FisherCurve:
    """FI or QFI values along a time, coupling or temperature axis."""

    axis: np.ndarray
    values: np.ndarray
    axis_name: str = "t"
    method: str = "exact"
    optimum: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.axis.shape != self.values.shape:
            raise ValueError("axis and values must have equal length")
        if self.method not in ("exact", "markovian"):
            raise ValueError(f"method must be 'exact' or 'markovian', got {self.method!r}")
        if np.any(self.values < 0):
            raise ValueError("Fisher information values must be nonnegative")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({self.axis_name: self.axis, "fisher": self.values,
                             "method": self.method})


@dataclass
class SpectralDecomposition:
    """Eigenbasis of rho with the derivative expressed in it."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    d_eigen: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.any(self.eigenvalues < -STATE_TOL) or np.any(self.eigenvalues > 1 + STATE_TOL):
            raise NotAState(f"eigenvalues outside [0, 1]: {self.eigenvalues}")
        if abs(self.eigenvalues.sum() - 1.0) > STATE_TOL:
            raise NotAState(f"eigenvalues sum to {self.eigenvalues.sum()!r}")
        v = self.eigenvectors
        if not np.allclose(v.conj().T @ v, np.eye(v.shape[0]), rtol=0, atol=STATE_TOL):
            raise NotAState("eigenvector matrix is not unitary")


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------


def fi_two_outcome(p1: float, dp1_dT: float) -> float:
    """
    Fisher information of a population measurement, (dp1/dT)^2/(p1(1-p1)).

    Returns 0 whenever dp1_dT = 0, including at p1 in {0, 1}.

    Raises:
        DegenerateDistribution: if p1 is 0 or 1 with a nonzero derivative
    """
    if dp1_dT == 0:
        return 0.0
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1 must be a probability, got {p1}")
    if p1 in (0.0, 1.0):
        raise DegenerateDistribution(f"p1 = {p1} with dp1/dT = {dp1_dT}")
    return float(dp1_dT ** 2 / (p1 * (1.0 - p1)))


def _check_hermitian(m: np.ndarray, name: str) -> None:
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > STATE_TOL * scale:
        raise NotAState(f"{name} is not Hermitian")


def spectral_decomposition(rho, drho_dT) -> SpectralDecomposition:
    """Diagonalise rho and rotate its temperature derivative into the eigenbasis."""
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho_dT, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or drho.shape != rho.shape:
        raise NotAState(f"rho {rho.shape} and drho {drho.shape} must be equal square matrices")
    _check_hermitian(rho, "rho")
    _check_hermitian(drho, "drho_dT")
    if abs(np.trace(rho) - 1.0) > STATE_TOL:
        raise NotAState(f"trace of rho is {np.trace(rho)!r}")
    scale = max(1.0, float(np.max(np.abs(drho))))
    if abs(np.trace(drho)) > STATE_TOL * scale:
        raise NotAState(f"drho_dT is not traceless: {np.trace(drho)!r}")

    eigenvalues, eigenvectors = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if eigenvalues.min() < -STATE_TOL:
        raise NotAState(f"rho has a negative eigenvalue {eigenvalues.min():.3e}")
    d_eigen = eigenvectors.conj().T @ drho @ eigenvectors
    return SpectralDecomposition(eigenvalues, eigenvectors, d_eigen)


def qfi_sld(rho, drho_dT, threshold: float = EIGEN_THRESHOLD) -> float:
    """
    Quantum Fisher information sum_{p_i + p_j > threshold}
    2 |<i|drho|j>|^2 / (p_i + p_j).

    Raises:
        NotAState: if rho is not a density matrix or drho is not a valid derivative
    """
    decomposition = spectral_decomposition(rho, drho_dT)
    p = np.clip(decomposition.eigenvalues, 0.0, None)
    denominators = p[:, None] + p[None, :]
    keep = denominators > threshold
    weights = np.zeros_like(denominators)
    weights[keep] = 2.0 / denominators[keep]
    return float(np.sum(weights * np.abs(decomposition.d_eigen) ** 2))


def fi_rate(t: float, fi: float) -> float:
    """Fisher information per unit interrogation time."""
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    return fi / t


def accumulated_fisher(total_time: float, t: float, fi: float) -> float:
    """FI gathered in a time budget by repeating preparation, evolution and readout."""
    return total_time * fi_rate(t, fi)


def qfi_exact(t: float, params: ModelParams, cfg: Optional[QuadConfig] = None) -> float:
    """QFI of the exact single-probe state at time t (population FI)."""
    return fi_two_outcome(*p1_exact_with_derivative(t, params, cfg))


def qfi_markovian(t: float, params: ModelParams) -> float:
    return fi_two_outcome(p1_markovian(t, params), p1_markovian_dT(t, params))


def qfi_steady(params: ModelParams, cfg: Optional[QuadConfig] = None) -> float:
    return fi_two_outcome(*p1_steady_with_derivative(params, cfg))


def markovian_fi_rate_closed_form(t: float, params: ModelParams) -> float:
    """
    Markovian FI rate for an initially empty probe,

        (eps-mu)^2 beta^4 f(1-f)(1 - e^{-Gamma t}) / (t (1 + e^{-Gamma t} f/(1-f)))

    with f = f(eps).
    """
    if params.p0 != 0:
        raise InvalidParameters("closed form holds for an initially empty probe only")
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    x = params.gap / params.temperature
    f, one_minus_f = expit(-x), expit(x)
    decay = math.exp(-params.gamma * t)
    odds = math.exp(min(-x, 700.0))
    fi = (x / params.temperature) ** 2 * f * one_minus_f * (-math.expm1(-params.gamma * t))
    return float(fi / (t * (1.0 + decay * odds)))


def heat_capacity(params: ModelParams) -> float:
    """Two-level heat capacity x^2 f(1-f), x = (eps-mu)/T; equals T^2 FI of the Gibbs state."""
    x = params.gap / params.temperature
    return float(x ** 2 * expit(-x) * expit(x))


def weak_coupling_noise_to_signal(x):
    """Gibbs-state noise-to-signal ratio (1 + e^x)^2 / (x^2 e^x), x = (eps-mu)/T."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return 1.0 / (x ** 2 * expit(-x) * expit(x))


def markovian_noise_to_signal(params: ModelParams) -> float:
    return float(weak_coupling_noise_to_signal(params.gap / params.temperature))


def noise_to_signal(params: ModelParams, cfg: Optional[QuadConfig] = None) -> float:
    """Steady-state relative error bound 1/(T^2 FI) from the exact steady state."""
    fi = qfi_steady(params, cfg)
    if fi == 0:
        return math.inf
    return 1.0 / (params.temperature ** 2 * fi)


def power_law_exponent(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log|y| against log x."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if np.any(x <= 0) or np.any(y == 0):
        raise ValueError("power-law fit needs positive x and nonzero y")
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# Optimisation
# ---------------------------------------------------------------------------


def _golden_section_max(objective: Callable, a: float, b: float, tol: float,
                        log_scale: bool) -> dict:
    """
    Golden-section search for a maximum on [a, b], in log coordinates when
    `log_scale`. Ties move toward the smaller argument.
    """
    if log_scale:
        to_x, lo, hi = np.exp, math.log(a), math.log(b)
        tol_u = math.log1p(tol)
    else:
        to_x, lo, hi = (lambda u: u), a, b
        tol_u = tol * max(abs(a), abs(b), 1e-300)

    h = hi - lo
    if h <= tol_u:
        mid = to_x((lo + hi) / 2)
        return dict(argmax=float(mid), maximum=float(objective(mid)), iterations=0, converged=True)

    steps = int(math.ceil(math.log(tol_u / h) / math.log(INV_PHI)))
    c = lo + INV_PHI_SQUARE * h
    d = lo + INV_PHI * h
    yc = objective(to_x(c))
    yd = objective(to_x(d))

    for _ in range(steps - 1):
        if yc >= yd:
            hi = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = lo + INV_PHI_SQUARE * h
            yc = objective(to_x(c))
        else:
            lo = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = lo + INV_PHI * h
            yd = objective(to_x(d))

    argmax, maximum = (c, yc) if yc >= yd else (d, yd)
    return dict(
        argmax=float(to_x(argmax)),
        maximum=float(maximum),
        iterations=steps,
        converged=bool(np.isfinite(yc) and np.isfinite(yd)),
    )


def optimize_scalar(objective: Callable[[float], float], lower: float, upper: float,
                    refine_tol: float = 1e-4, grid_points: int = 64, log_grid: bool = True,
                    flat_tol: float = 1e-12, executor: Optional[Executor] = None) -> Optimum:
    """
    Maximise a scalar objective on [lower, upper].

    A coarse grid scan (log-spaced by default) locates the best grid point;
    golden-section search then refines between its neighbours to relative
    `refine_tol`. Ties go to the smaller argument. A best grid point at
    either end is reported through `boundary` ('lower' or 'upper').

    Args:
        objective: Function to maximise
        lower: Lower bound (finite, > 0 for a log grid)
        upper: Upper bound
        refine_tol: Relative tolerance of the refined argmax
        grid_points: Number of scan points (>= 3)
        log_grid: Scan a log-spaced grid
        flat_tol: Minimum spread of the scanned values
        executor: Optional executor used to evaluate the scan in parallel

    Returns:
        Optimum with argmax, value and boundary flag

    Raises:
        FlatObjective: if max - min over the grid is below flat_tol
    """
    if not (np.isfinite(lower) and np.isfinite(upper) and lower < upper):
        raise ValueError(f"invalid interval [{lower}, {upper}]")
    if log_grid and lower <= 0:
        raise ValueError("a log grid needs lower > 0")
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")

    grid = np.geomspace(lower, upper, grid_points) if log_grid else np.linspace(lower, upper, grid_points)
    mapper = executor.map if executor is not None else map
    values = np.array(list(mapper(objective, grid)), dtype=float)
    if not np.all(np.isfinite(values)):
        bad = grid[~np.isfinite(values)]
        raise ValueError(f"objective is not finite at {bad[:3]}")
    if values.max() - values.min() < flat_tol:
        raise FlatObjective(f"objective varies by {values.max() - values.min():.3e} < {flat_tol}")

    best = int(np.argmax(values))
    boundary = None
    if best == 0:
        boundary = "lower"
    elif best == grid_points - 1:
        boundary = "upper"

    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid_points - 1)]
    refined = _golden_section_max(objective, a, b, refine_tol, log_grid)
    evaluations = grid_points + refined["iterations"] + 1

    if refined["maximum"] > values[best]:
        return Optimum(refined["argmax"], refined["maximum"], boundary,
                       refined["converged"], evaluations)
    logger.debug("golden-section refinement did not improve on grid point %s", grid[best])
    return Optimum(float(grid[best]), float(values[best]), boundary,
                   refined["converged"], evaluations)


def fisher_at_time(t: float, params: ModelParams, method: str = "exact",
                   cfg: Optional[QuadConfig] = None) -> float:
    if method == "exact":
        return qfi_exact(t, params, cfg)
    if method == "markovian":
        return qfi_markovian(t, params)
    raise ValueError(f"method must be 'exact' or 'markovian', got {method!r}")


def fi_rate_at_time(t: float, params: ModelParams, method: str = "exact",
                    cfg: Optional[QuadConfig] = None) -> float:
    return fi_rate(t, fisher_at_time(t, params, method, cfg))


def fisher_curve(axis: Sequence[float], params: ModelParams, axis_name: str = "t",
                 method: str = "exact", cfg: Optional[QuadConfig] = None,
                 executor: Optional[Executor] = None) -> FisherCurve:
    """
    FI along a time axis ('t') or steady-state FI along a coupling
    ('gamma') or temperature ('temperature') axis.
    """
    axis = np.asarray(axis, dtype=float)
    if axis_name == "t":
        point = partial(fisher_at_time, params=params, method=method, cfg=cfg)
    elif axis_name in ("gamma", "temperature"):
        point = partial(_steady_fisher_along, params=params, field_name=axis_name,
                        method=method, cfg=cfg)
    else:
        raise ValueError(f"axis_name must be 't', 'gamma' or 'temperature', got {axis_name!r}")
    mapper = executor.map if executor is not None else map
    values = np.array(list(mapper(point, axis)), dtype=float)
    optimum = None
    if values.size:
        best = int(np.argmax(values))
        optimum = (float(axis[best]), float(values[best]))
    return FisherCurve(axis, values, axis_name, method, optimum)


def _steady_fisher_along(value: float, params: ModelParams, field_name: str,
                         method: str, cfg: Optional[QuadConfig]) -> float:
    shifted = params.replace(**{field_name: float(value)})
    if method == "markovian":
        return heat_capacity(shifted) / shifted.temperature ** 2
    return qfi_steady(shifted, cfg)


def optimal_time(params: ModelParams, method: str = "exact", cfg: Optional[QuadConfig] = None,
                 grid_points: int = 64, refine_tol: float = 1e-4,
                 executor: Optional[Executor] = None) -> Optimum:
    """Interrogation time t* maximising the FI rate on [1e-4/Gamma, 50/Gamma]."""
    lower, upper = (w / params.gamma for w in T_STAR_WINDOW)
    objective = partial(fi_rate_at_time, params=params, method=method, cfg=cfg)
    return optimize_scalar(objective, lower, upper, refine_tol=refine_tol,
                           grid_points=grid_points, executor=executor)


def _gamma_objective(gamma: float, params: ModelParams, objective: str,
                     cfg: Optional[QuadConfig], grid_points: int) -> float:
    shifted = params.replace(gamma=float(gamma))
    if objective == "qfi_steady":
        return qfi_steady(shifted, cfg)
    return optimal_time(shifted, "exact", cfg, grid_points=grid_points).value


def optimal_gamma(params: ModelParams, cfg: Optional[QuadConfig] = None, lower: float = 0.01,
                  upper: float = 10.0, objective: str = "qfi_steady", grid_points: int = 64,
                  executor: Optional[Executor] = None) -> Optimum:
    """
    Coupling Gamma* maximising the steady-state QFI ('qfi_steady') or the
    maximal exact FI rate ('max_fi_rate').
    """
    if objective not in ("qfi_steady", "max_fi_rate"):
        raise ValueError(f"unknown objective {objective!r}")
    func = partial(_gamma_objective, params=params, objective=objective, cfg=cfg,
                   grid_points=grid_points)
    return optimize_scalar(func, lower, upper, grid_points=grid_points, executor=executor)


def _temperature_objective(temperature: float, params: ModelParams, method: str,
                           cfg: Optional[QuadConfig]) -> float:
    shifted = params.replace(temperature=float(temperature))
    if method == "markovian":
        return heat_capacity(shifted)
    return shifted.temperature ** 2 * qfi_steady(shifted, cfg)


def optimal_temperature(params: ModelParams, method: str = "markovian",
                        cfg: Optional[QuadConfig] = None, lower: float = 0.01,
                        upper: float = 10.0, grid_points: int = 64,
                        executor: Optional[Executor] = None) -> Optimum:
    """Temperature T* minimising the noise-to-signal ratio (maximising T^2 FI)."""
    if method not in ("exact", "markovian"):
        raise ValueError(f"method must be 'exact' or 'markovian', got {method!r}")
    func = partial(_temperature_objective, params=params, method=method, cfg=cfg)
    return optimize_scalar(func, lower, upper, grid_points=grid_points, executor=executor)
