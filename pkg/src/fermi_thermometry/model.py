"""
Module for the physical model: parameter records, Fermi statistics and the
wide-band bath.

Units: hbar = k_B = 1, energies in units of the probe gap (epsilon - mu = 1
in every default).
"""

from dataclasses import dataclass, field, replace as dc_replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from fermi_thermometry.errors import InvalidParameters


@dataclass(frozen=True)
class BathSpec:
    """Bath spectral density. Only the flat (wide-band) case exists."""

    gamma: float
    kind: str = "flat"

    def __post_init__(self):
        if self.kind != "flat":
            raise ValueError(f"Unsupported spectral density kind: {self.kind!r}")
        if not self.gamma > 0:
            raise InvalidParameters(f"gamma must be > 0, got {self.gamma}")

    def spectral_density(self, omega):
        """Gamma(omega); constant for the flat band."""
        return np.full_like(np.asarray(omega, dtype=float), self.gamma)


@dataclass(frozen=True)
class ModelParams:
    """
    Probe energies, bath chemical potential, coupling, temperature and the
    initial occupations of the probe modes.

    Args:
        epsilons: Mode energies, one per probe fermion
        mu: Bath chemical potential
        gamma: Wide-band coupling rate (> 0)
        temperature: Bath temperature (> 0)
        initial_occupations: p(0) per mode, defaults to the ground state
    """

    epsilons: Tuple[float, ...] = (1.0,)
    mu: float = 0.0
    gamma: float = 1.0
    temperature: float = 1.0
    initial_occupations: Optional[Tuple[float, ...]] = field(default=None)

    def __post_init__(self):
        epsilons = tuple(float(e) for e in np.atleast_1d(self.epsilons))
        if not epsilons:
            raise InvalidParameters("epsilons must be nonempty")
        object.__setattr__(self, "epsilons", epsilons)

        if self.initial_occupations is None:
            occupations = (0.0,) * len(epsilons)
        else:
            occupations = tuple(float(p) for p in np.atleast_1d(self.initial_occupations))
        object.__setattr__(self, "initial_occupations", occupations)

        if len(occupations) != len(epsilons):
            raise InvalidParameters(
                f"{len(occupations)} initial occupations for {len(epsilons)} modes"
            )
        if any(not 0.0 <= p <= 1.0 for p in occupations):
            raise InvalidParameters(f"initial occupations must lie in [0, 1], got {occupations}")
        if not np.all(np.isfinite(epsilons)) or not np.isfinite(self.mu):
            raise InvalidParameters("energies must be finite")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameters(f"gamma must be > 0, got {self.gamma}")
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise InvalidParameters(f"temperature must be > 0, got {self.temperature}")

    @classmethod
    def single(cls, epsilon: float = 1.0, mu: float = 0.0, gamma: float = 1.0,
               temperature: float = 1.0, p0: float = 0.0) -> "ModelParams":
        """One probe fermion."""
        return cls(epsilons=(epsilon,), mu=mu, gamma=gamma,
                   temperature=temperature, initial_occupations=(p0,))

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature

    @property
    def n_modes(self) -> int:
        return len(self.epsilons)

    @property
    def epsilon(self) -> float:
        """Energy of a single-mode probe."""
        if self.n_modes != 1:
            raise InvalidParameters(f"expected a single-mode probe, got {self.n_modes} modes")
        return self.epsilons[0]

    @property
    def p0(self) -> float:
        if self.n_modes != 1:
            raise InvalidParameters(f"expected a single-mode probe, got {self.n_modes} modes")
        return self.initial_occupations[0]

    @property
    def gap(self) -> float:
        """epsilon - mu of a single-mode probe."""
        return self.epsilon - self.mu

    @property
    def bath(self) -> BathSpec:
        return BathSpec(gamma=self.gamma)

    def single_mode(self, index: int) -> "ModelParams":
        """Mode `index` alone, coupled to the same bath."""
        return ModelParams.single(
            epsilon=self.epsilons[index],
            mu=self.mu,
            gamma=self.gamma,
            temperature=self.temperature,
            p0=self.initial_occupations[index],
        )

    def replace(self, **changes) -> "ModelParams":
        return dc_replace(self, **changes)


def fermi(omega, params: ModelParams):
    """
    Fermi distribution 1/(e^{(omega-mu)/T} + 1).

    Saturates to exactly 0 or 1 far from mu instead of overflowing.
    """
    x = (np.asarray(omega, dtype=float) - params.mu) / params.temperature
    return expit(-x)


def fermi_dT(omega, params: ModelParams):
    """
    Temperature derivative of the Fermi distribution,
    ((omega-mu)/T^2) f (1-f). Exactly zero at omega = mu.
    """
    x = (np.asarray(omega, dtype=float) - params.mu) / params.temperature
    return (x / params.temperature) * expit(-x) * expit(x)


def fermi_values(omega, params: ModelParams, numerators: Sequence[str]) -> np.ndarray:
    """Stack of numerator kernels ('fermi' or 'fermi_dT') evaluated on omega."""
    kernels = {"fermi": fermi, "fermi_dT": fermi_dT}
    try:
        return np.stack([kernels[name](omega, params) for name in numerators])
    except KeyError as exc:
        raise ValueError(f"Unknown numerator kernel: {exc.args[0]!r}") from None
