"""
Run configuration for the command-line runner.

Values are resolved in the order: command-line flags, then an optional
key=value config file, then the per-command defaults below.
"""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from fermi_thermometry.errors import ConfigError
from fermi_thermometry.model import ModelParams
from fermi_thermometry.quad import QuadConfig

COMMANDS = (
    "equilibrium-sweep",
    "transient-fi",
    "fi-rate",
    "tstar-contour",
    "gamma-opt",
    "multi-additivity",
    "verify",
)
FORMATS = ("csv", "json")
SCALES = ("lin", "log")


@dataclass(frozen=True)
class GridSpec:
    """One sweep axis: a lin/log range or an explicit list of values."""

    minimum: float
    maximum: float
    points: int
    scale: str = "lin"
    explicit: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.explicit is not None:
            if not self.explicit:
                raise ConfigError("grid list is empty")
            if not all(np.isfinite(self.explicit)):
                raise ConfigError(f"grid values must be finite: {self.explicit}")
            return
        if self.scale not in SCALES:
            raise ConfigError(f"grid scale must be 'lin' or 'log', got {self.scale!r}")
        if self.points < 2:
            raise ConfigError(f"grid needs at least 2 points, got {self.points}")
        if not (np.isfinite(self.minimum) and np.isfinite(self.maximum)):
            raise ConfigError("grid bounds must be finite")
        if not self.minimum < self.maximum:
            raise ConfigError(f"grid min {self.minimum} must be < max {self.maximum}")
        if self.scale == "log" and self.minimum <= 0:
            raise ConfigError(f"log grid needs min > 0, got {self.minimum}")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """
        Parse 'min:max:n[:lin|log]' or a comma-separated list such as
        '0.1,0.5,1'. A single number is a one-value list.
        """
        text = str(text).strip()
        try:
            if ":" in text:
                parts = text.split(":")
                if len(parts) not in (3, 4):
                    raise ConfigError(f"expected min:max:n[:lin|log], got {text!r}")
                scale = parts[3].strip() if len(parts) == 4 else "lin"
                return cls(float(parts[0]), float(parts[1]), int(parts[2]), scale)
            values = tuple(float(v) for v in text.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"cannot parse grid {text!r}: {exc}") from None
        if not values:
            raise ConfigError(f"cannot parse grid {text!r}")
        return cls(min(values), max(values), len(values), "lin", values)

    def values(self) -> np.ndarray:
        if self.explicit is not None:
            return np.asarray(self.explicit, dtype=float)
        if self.scale == "log":
            return np.geomspace(self.minimum, self.maximum, self.points)
        return np.linspace(self.minimum, self.maximum, self.points)

    def __str__(self) -> str:
        if self.explicit is not None:
            return ",".join(repr(v) for v in self.explicit)
        return f"{self.minimum!r}:{self.maximum!r}:{self.points}:{self.scale}"


# Defaults per command; these reproduce the published sweep ranges.
BASE_DEFAULTS: Dict[str, str] = {
    "epsilon": "1.0",
    "mu": "0.0",
    "gamma": "1.0",
    "temperature": "1.0",
    "p0": "0.0",
    "format": "csv",
    "rel_tol": "1e-9",
    "abs_tol": "1e-12",
}

COMMAND_DEFAULTS: Dict[str, Dict[str, str]] = {
    "equilibrium-sweep": {"T_grid": "1e-3:10:60:log", "gamma_grid": "0.1,0.5,1,5"},
    "transient-fi": {"t_grid": "0.1:50:200:lin", "gamma_grid": "0.5,1", "T_grid": "0.05"},
    "fi-rate": {"t_grid": "0.01:50:200:log", "gamma_grid": "1", "T_grid": "0.1"},
    "tstar-contour": {"gamma_grid": "0.01:1:8:log", "T_grid": "0.05:1:8:log"},
    "gamma-opt": {"gamma_grid": "0.01:10:40:log", "T_grid": "0.1"},
    "multi-additivity": {"t_grid": "0.1:50:100:lin", "gamma_grid": "0.5", "T_grid": "1"},
    "verify": {},
}

GRID_KEYS = ("t_grid", "gamma_grid", "T_grid")
FLOAT_KEYS = ("epsilon", "mu", "gamma", "temperature", "p0", "rel_tol", "abs_tol")


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI run."""

    command: str
    epsilon: float = 1.0
    mu: float = 0.0
    gamma: float = 1.0
    temperature: float = 1.0
    p0: float = 0.0
    epsilons: Optional[Tuple[float, ...]] = None
    t_grid: Optional[GridSpec] = None
    gamma_grid: Optional[GridSpec] = None
    T_grid: Optional[GridSpec] = None
    out: Path = Path("output/result.csv")
    format: str = "csv"
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    steady: bool = False
    verbose: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be 'csv' or 'json', got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.epsilons is not None and len(self.epsilons) != 2:
            raise ConfigError(f"--epsilons takes two energies, got {self.epsilons}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError(f"tolerances must be > 0, got rel={self.rel_tol}, abs={self.abs_tol}")

    @property
    def quad(self) -> QuadConfig:
        try:
            return QuadConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def probe(self, gamma: Optional[float] = None, temperature: Optional[float] = None) -> ModelParams:
        """Single-probe parameters, optionally at another gamma or temperature."""
        return ModelParams.single(
            epsilon=self.epsilon,
            mu=self.mu,
            gamma=self.gamma if gamma is None else float(gamma),
            temperature=self.temperature if temperature is None else float(temperature),
            p0=self.p0,
        )

    def two_probes(self, gamma: Optional[float] = None,
                   temperature: Optional[float] = None) -> ModelParams:
        """Two probes; default energies mu and mu + epsilon."""
        energies = self.epsilons or (self.mu, self.mu + self.epsilon)
        return ModelParams(
            epsilons=energies,
            mu=self.mu,
            gamma=self.gamma if gamma is None else float(gamma),
            temperature=self.temperature if temperature is None else float(temperature),
            initial_occupations=(self.p0, self.p0),
        )

    def to_dict(self) -> Dict[str, object]:
        resolved = asdict(self)
        for key in GRID_KEYS:
            grid = getattr(self, key)
            resolved[key] = None if grid is None else str(grid)
        resolved["out"] = str(self.out)
        resolved["epsilons"] = None if self.epsilons is None else list(self.epsilons)
        return resolved


def load_config_file(path) -> Dict[str, str]:
    """
    Read key=value lines. '#' starts a comment; blank lines are skipped.
    Dashes in keys are accepted ('t-grid' is 't_grid').
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None

    settings = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key.replace("-", "_")] = value
    return settings


def _to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def resolve_config(command: str, flags: Mapping[str, object],
                   config_file: Optional[str] = None) -> RunConfig:
    """
    Merge command-line flags (None means 'not given'), the optional config
    file and the defaults for `command` into a RunConfig.

    Raises:
        ConfigError: on unknown keys, unparsable values or invalid grids
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")

    merged: Dict[str, object] = dict(BASE_DEFAULTS)
    merged.update(COMMAND_DEFAULTS[command])
    if config_file is not None:
        merged.update(load_config_file(config_file))
    merged.update({k: v for k, v in flags.items() if v is not None})

    known = set(FLOAT_KEYS) | set(GRID_KEYS) | {"epsilons", "out", "format", "jobs",
                                                 "steady", "verbose"}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")

    try:
        values = {key: float(merged[key]) for key in FLOAT_KEYS}
        if "jobs" in merged:
            values["jobs"] = int(merged["jobs"])
    except ValueError as exc:
        raise ConfigError(f"invalid numeric setting: {exc}") from None

    for key in GRID_KEYS:
        if key in merged:
            grid = merged[key]
            values[key] = grid if isinstance(grid, GridSpec) else GridSpec.parse(grid)

    if merged.get("epsilons") is not None:
        raw = merged["epsilons"]
        try:
            energies = tuple(float(e) for e in (raw.split(",") if isinstance(raw, str) else raw))
        except ValueError:
            raise ConfigError(f"cannot parse --epsilons {raw!r}") from None
        values["epsilons"] = energies

    fmt = str(merged["format"])
    out = merged.get("out") or Path("output") / f"{command}.{fmt}"
    return RunConfig(
        command=command,
        out=Path(out),
        format=fmt,
        steady=_to_bool(merged.get("steady", False)),
        verbose=_to_bool(merged.get("verbose", False)),
        **values,
    )
