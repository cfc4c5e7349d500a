"""
Grid sweeps behind the CLI commands.

Each command has a cell function that evaluates one grid point and returns
a row. Cells are module-level so they can be shipped to worker processes;
rows are collected in grid order whatever the scheduling.
"""

import itertools
import logging
from concurrent.futures import Executor
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fermi_thermometry.config import RunConfig
from fermi_thermometry.errors import (
    DegenerateDistribution,
    DivergentExpansion,
    FlatObjective,
    NonConvergence,
    OutOfRange,
    SingularDecomposition,
)
from fermi_thermometry.metrology import (
    fi_rate,
    fi_two_outcome,
    markovian_fi_rate_closed_form,
    markovian_noise_to_signal,
    noise_to_signal,
    optimal_time,
    qfi_markovian,
    qfi_steady,
)
from fermi_thermometry.multi_probe import qfi_common_vs_independent
from fermi_thermometry.single_probe import (
    p1_exact_with_derivative,
    p1_markovian,
    p1_steady,
)

logger = logging.getLogger(__name__)

# Failures recorded per row instead of aborting the sweep.
CELL_FAILURES = (
    (NonConvergence, "nonconvergence"),
    (SingularDecomposition, "singular"),
    (DivergentExpansion, "divergent"),
    (OutOfRange, "out_of_range"),
    (FlatObjective, "flat_objective"),
    (DegenerateDistribution, "degenerate"),
)

COLUMNS: Dict[str, List[str]] = {
    "equilibrium-sweep": ["T", "gamma", "p1_steady", "noise_to_signal",
                          "markovian_noise_to_signal", "status"],
    "transient-fi": ["t", "gamma", "T", "gamma_t", "p1_exact", "p1_markovian",
                     "qfi_exact", "qfi_markovian", "status"],
    "fi-rate": ["t", "gamma", "T", "gamma_t", "fi_rate_exact", "fi_rate_markovian",
                "fi_rate_closed_form", "status"],
    "tstar-contour": ["gamma", "T", "t_star", "gamma_t_star", "max_fi_rate",
                      "boundary_flag", "converged", "status"],
    "gamma-opt": ["gamma", "T", "qfi_steady", "max_fi_rate", "gamma_t_star",
                  "boundary_flag", "status"],
    "multi-additivity": ["t", "gamma", "T", "gamma_t", "qfi_common", "qfi_independent",
                         "ratio", "status"],
}


def _status_of(exc: Exception) -> str:
    for kind, name in CELL_FAILURES:
        if isinstance(exc, kind):
            return name
    raise exc


def _run_cell(point: Tuple[float, ...], cell: Callable, names: Sequence[str],
              config: RunConfig) -> Dict[str, object]:
    row: Dict[str, object] = dict(zip(names, (float(v) for v in point)))
    try:
        row.update(cell(*point, config=config))
        row["status"] = "ok"
    except tuple(kind for kind, _ in CELL_FAILURES) as exc:
        row["status"] = _status_of(exc)
        logger.warning("cell %s failed: %s", row, exc)
    return row


def equilibrium_cell(temperature: float, gamma: float, config: RunConfig) -> Dict[str, float]:
    params = config.probe(gamma=gamma, temperature=temperature)
    return {
        "p1_steady": p1_steady(params, config.quad),
        "noise_to_signal": noise_to_signal(params, config.quad),
        "markovian_noise_to_signal": markovian_noise_to_signal(params),
    }


def transient_cell(t: float, gamma: float, temperature: float,
                   config: RunConfig) -> Dict[str, float]:
    params = config.probe(gamma=gamma, temperature=temperature)
    p1, dp1 = p1_exact_with_derivative(t, params, config.quad)
    return {
        "gamma_t": gamma * t,
        "p1_exact": p1,
        "p1_markovian": p1_markovian(t, params),
        "qfi_exact": fi_two_outcome(p1, dp1),
        "qfi_markovian": qfi_markovian(t, params),
    }


def fi_rate_cell(t: float, gamma: float, temperature: float,
                 config: RunConfig) -> Dict[str, float]:
    params = config.probe(gamma=gamma, temperature=temperature)
    exact = fi_two_outcome(*p1_exact_with_derivative(t, params, config.quad))
    closed = markovian_fi_rate_closed_form(t, params) if params.p0 == 0 else np.nan
    return {
        "gamma_t": gamma * t,
        "fi_rate_exact": fi_rate(t, exact),
        "fi_rate_markovian": fi_rate(t, qfi_markovian(t, params)),
        "fi_rate_closed_form": closed,
    }


def tstar_cell(gamma: float, temperature: float, config: RunConfig) -> Dict[str, object]:
    params = config.probe(gamma=gamma, temperature=temperature)
    best = optimal_time(params, "exact", config.quad)
    return {
        "t_star": best.argmax,
        "gamma_t_star": gamma * best.argmax,
        "max_fi_rate": best.value,
        "boundary_flag": best.boundary or "",
        "converged": best.converged,
    }


def gamma_opt_cell(gamma: float, temperature: float, config: RunConfig) -> Dict[str, object]:
    params = config.probe(gamma=gamma, temperature=temperature)
    best = optimal_time(params, "exact", config.quad)
    return {
        "qfi_steady": qfi_steady(params, config.quad),
        "max_fi_rate": best.value,
        "gamma_t_star": gamma * best.argmax,
        "boundary_flag": best.boundary or "",
    }


def additivity_cell(t: float, gamma: float, temperature: float,
                    config: RunConfig) -> Dict[str, float]:
    params = config.two_probes(gamma=gamma, temperature=temperature)
    common, independent, ratio = qfi_common_vs_independent(
        None if np.isinf(t) else t, params, config.quad
    )
    return {
        "gamma_t": gamma * t,
        "qfi_common": common,
        "qfi_independent": independent,
        "ratio": ratio,
    }


def _axes(config: RunConfig) -> Tuple[Callable, List[str], List[np.ndarray]]:
    command = config.command
    t = config.t_grid.values() if config.t_grid is not None else None
    gamma = config.gamma_grid.values()
    temperature = config.T_grid.values()
    if command == "equilibrium-sweep":
        return equilibrium_cell, ["T", "gamma"], [temperature, gamma]
    if command == "transient-fi":
        return transient_cell, ["t", "gamma", "T"], [t, gamma, temperature]
    if command == "fi-rate":
        return fi_rate_cell, ["t", "gamma", "T"], [t, gamma, temperature]
    if command == "tstar-contour":
        return tstar_cell, ["gamma", "T"], [gamma, temperature]
    if command == "gamma-opt":
        return gamma_opt_cell, ["gamma", "T"], [gamma, temperature]
    if command == "multi-additivity":
        times = np.array([np.inf]) if config.steady else t
        return additivity_cell, ["t", "gamma", "T"], [times, gamma, temperature]
    raise ValueError(f"no sweep for command {command!r}")


def grid_points(config: RunConfig) -> List[Tuple[float, ...]]:
    """Cartesian product of the command's axes; the first axis varies slowest."""
    _, _, axes = _axes(config)
    return list(itertools.product(*axes))


def run_sweep(config: RunConfig, executor: Optional[Executor] = None) -> pd.DataFrame:
    """
    Evaluate every grid cell of the configured command.

    Returns:
        DataFrame with the command's columns, one row per cell in grid order
    """
    cell, names, _ = _axes(config)
    points = grid_points(config)
    worker = partial(_run_cell, cell=cell, names=names, config=config)
    mapper = executor.map if executor is not None else map
    rows = list(mapper(worker, points))
    df = pd.DataFrame(rows)
    return df.reindex(columns=COLUMNS[config.command])


def optimum_per_temperature(df: pd.DataFrame, column: str) -> Dict[str, float]:
    """Grid argmax of `column` over gamma, one entry per temperature."""
    ok = df[df["status"] == "ok"]
    optima = {}
    for temperature, group in ok.groupby("T", sort=True):
        if group[column].notna().any():
            optima[repr(float(temperature))] = float(group.loc[group[column].idxmax(), "gamma"])
    return optima


def additivity_sensitivity(config: RunConfig, shift_fraction: float = 0.1) -> Dict[str, float]:
    """
    Ratio at the first grid cell with eps1 moved by shift_fraction*(eps2 - eps1),
    next to the unshifted value.
    """
    base = config.two_probes(gamma=config.gamma_grid.values()[0],
                             temperature=config.T_grid.values()[0])
    e1, e2 = base.epsilons
    shifted = base.replace(epsilons=(e1 + shift_fraction * (e2 - e1), e2))
    t = None if config.steady else float(config.t_grid.values()[-1])
    _, _, ratio = qfi_common_vs_independent(t, base, config.quad)
    _, _, moved = qfi_common_vs_independent(t, shifted, config.quad)
    return {"epsilon1": e1, "epsilon1_shifted": e1 + shift_fraction * (e2 - e1),
            "ratio": ratio, "ratio_shifted": moved, "t": t if t is not None else "steady"}
