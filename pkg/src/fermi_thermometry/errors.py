"""
Exception hierarchy for fermi_thermometry.

Input problems derive from ValueError, numerical failures from
ArithmeticError, and everything from ThermometryError.
"""

from typing import Optional


class ThermometryError(Exception):
    """Base class for all package errors."""


class InvalidParameters(ThermometryError, ValueError):
    """Physical parameters violate their invariants."""


class ConfigError(ThermometryError, ValueError):
    """Run configuration or a grid string is invalid."""


class DegenerateDistribution(ThermometryError, ValueError):
    """Two-outcome distribution at an endpoint with nonzero derivative."""


class NotAState(ThermometryError, ValueError):
    """Matrix is not a density matrix (or its derivative is malformed)."""


class NotPSD(ThermometryError, ValueError):
    """Reconstructed density matrix has a negative eigenvalue."""


class FlatObjective(ThermometryError, ValueError):
    """Objective is constant over the scan grid."""


class NonConvergence(ThermometryError, ArithmeticError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate=None, error: Optional[float] = None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SingularDecomposition(ThermometryError, ArithmeticError):
    """Neither the eigendecomposition nor the Pade path produced e^{At}."""


class DivergentExpansion(ThermometryError, ArithmeticError):
    """Short-time expansion depends on the integration window."""


class OutOfRange(ThermometryError, ArithmeticError):
    """Computed probability left [0, 1] by more than the tolerance."""
