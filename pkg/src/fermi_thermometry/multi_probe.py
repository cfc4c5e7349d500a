"""
Module for several probe fermions sharing one bath.

The mode operators obey d(t) = e^{At} d(0) + noise, so the state is fixed by
the correlation matrix C_ij = <d_i^dag d_j>. For up to two modes the density
matrix is rebuilt from C with Wick's theorem and its QFI is compared with
independent baths.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from fermi_thermometry.errors import InvalidParameters, NotPSD
from fermi_thermometry.metrology import fi_two_outcome, qfi_sld
from fermi_thermometry.model import ModelParams
from fermi_thermometry.quad import (
    LangevinResponse,
    QuadConfig,
    as_complex_matrix,
    expm,
    integrate_response,
)
from fermi_thermometry.single_probe import (
    p1_exact,
    p1_exact_with_derivative,
    p1_steady_with_derivative,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
SPECTRUM_TOL = 1e-8
PSD_TOL = 1e-8
STABILITY_TOL = 1e-12
MATCH_TOL = 1e-8
MAX_RECONSTRUCTED_MODES = 2


@dataclass
class LangevinGenerator:
    """Drift matrix A of the mode operators, d(t) = e^{At} d(0) + noise."""

    a: np.ndarray

    def __post_init__(self):
        self.a = as_complex_matrix(self.a)
        if not np.all(np.isfinite(self.a)):
            raise InvalidParameters("generator entries must be finite")
        if np.max(self.eigenvalues.real) > self._tol:
            raise InvalidParameters(f"generator has growing modes: {self.eigenvalues}")

    @property
    def _tol(self) -> float:
        return STABILITY_TOL * max(1.0, float(np.max(np.abs(self.a))))

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.a)

    @property
    def is_stable(self) -> bool:
        """Every mode decays; otherwise some mode never reaches the bath."""
        return bool(np.all(self.eigenvalues.real < -self._tol))


@dataclass
class CorrelationMatrix:
    """C_ij = <d_i^dag d_j> and its temperature derivative."""

    c: np.ndarray
    c_dT: np.ndarray

    def __post_init__(self):
        self.c = as_complex_matrix(self.c)
        self.c_dT = as_complex_matrix(self.c_dT)
        if self.c.shape != self.c_dT.shape:
            raise ValueError("c and c_dT must have the same shape")
        if np.max(np.abs(self.c - self.c.conj().T)) > HERMITIAN_TOL:
            raise ValueError("correlation matrix is not Hermitian")
        scale = max(1.0, float(np.max(np.abs(self.c_dT))))
        if np.max(np.abs(self.c_dT - self.c_dT.conj().T)) > HERMITIAN_TOL * scale:
            raise ValueError("correlation derivative is not Hermitian")
        spectrum = np.linalg.eigvalsh(self.c)
        if spectrum.min() < -SPECTRUM_TOL or spectrum.max() > 1.0 + SPECTRUM_TOL:
            raise ValueError(f"correlation spectrum outside [0, 1]: {spectrum}")

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    @property
    def occupations(self) -> np.ndarray:
        return self.c.diagonal().real.copy()


def _particle_number(index: int) -> int:
    return bin(index).count("1")


@dataclass
class ProbeDensityMatrix:
    """Density matrix in the occupation basis (index 2*n1 + n2) and its derivative."""

    rho: np.ndarray
    rho_dT: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.rho = as_complex_matrix(self.rho)
        self.rho_dT = as_complex_matrix(self.rho_dT)
        dim = self.rho.shape[0]
        if dim & (dim - 1) or self.rho_dT.shape != self.rho.shape:
            raise ValueError(f"expected matching 2^n x 2^n matrices, got {self.rho.shape}")
        if abs(np.trace(self.rho) - 1.0) > HERMITIAN_TOL:
            raise ValueError(f"trace of rho is {np.trace(self.rho)!r}")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("rho is not Hermitian")
        scale = max(1.0, float(np.max(np.abs(self.rho_dT))))
        if abs(np.trace(self.rho_dT)) > HERMITIAN_TOL * scale:
            raise ValueError("rho_dT is not traceless")
        numbers = np.array([_particle_number(i) for i in range(dim)])
        mixed = numbers[:, None] != numbers[None, :]
        if np.any(self.rho[mixed] != 0) or np.any(self.rho_dT[mixed] != 0):
            raise ValueError("coherence between particle-number sectors")
        lowest = np.linalg.eigvalsh(self.rho).min()
        if lowest < -PSD_TOL:
            raise NotPSD(f"rho has eigenvalue {lowest:.3e}")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def build_generator(params: ModelParams) -> LangevinGenerator:
    """A_jj = -i E_j - Gamma/2, A_jk = -Gamma/2 for j != k."""
    energies = np.asarray(params.epsilons, dtype=float)
    n = energies.size
    a = np.full((n, n), -params.gamma / 2.0, dtype=complex)
    a[np.diag_indices(n)] = -1j * energies - params.gamma / 2.0
    return LangevinGenerator(a)


def _initial_correlations(params: ModelParams) -> np.ndarray:
    return np.diag(np.asarray(params.initial_occupations, dtype=complex))


def evolve_correlations(t: float, params: ModelParams,
                        cfg: Optional[QuadConfig] = None) -> CorrelationMatrix:
    """
    C(t) = conj(P) C(0) P^T + (Gamma/2pi) int f conj(g) g^T d omega with
    P = e^{At} and g the response of the generator; the derivative uses
    df/dT in the same integral.
    """
    cfg = cfg or QuadConfig()
    if not (np.isfinite(t) and t >= 0):
        raise InvalidParameters(f"t must be finite and >= 0, got {t}")
    generator = build_generator(params)
    c0 = _initial_correlations(params)
    if t == 0:
        return CorrelationMatrix(c0, np.zeros_like(c0))

    propagator = expm(generator.a, t)
    response = LangevinResponse(generator.a, t)
    noise = integrate_response(response, params, cfg, ("fermi", "fermi_dT"))
    scale = params.gamma / (2.0 * np.pi)
    c = np.conj(propagator) @ c0 @ propagator.T + scale * noise[0]
    return CorrelationMatrix(c, scale * noise[1])


def steady_correlations(params: ModelParams, cfg: Optional[QuadConfig] = None) -> CorrelationMatrix:
    """
    Long-time correlation matrix (Gamma/2pi) int f conj(R1) (R1)^T.

    Raises:
        InvalidParameters: if a mode never decays (the steady state then
            depends on the initial state)
    """
    cfg = cfg or QuadConfig()
    generator = build_generator(params)
    if not generator.is_stable:
        raise InvalidParameters(
            f"steady state not unique: undamped modes in {generator.eigenvalues}"
        )
    response = LangevinResponse(generator.a, None)
    noise = integrate_response(response, params, cfg, ("fermi", "fermi_dT"))
    scale = params.gamma / (2.0 * np.pi)
    return CorrelationMatrix(scale * noise[0], scale * noise[1])


def gaussian_to_density(correlations: CorrelationMatrix) -> ProbeDensityMatrix:
    """
    Rebuild rho (and drho/dT) of one or two modes from C with Wick's theorem.

    Basis index 2*n1 + n2: <n1 n2> = C11 C22 - |C12|^2 and the
    single-particle coherence <10|rho|01> = <d2^dag d1> = C21.

    Raises:
        NotPSD: if the reconstruction has an eigenvalue below -1e-8
    """
    c, dc = correlations.c, correlations.c_dT
    n = correlations.dim
    if n > MAX_RECONSTRUCTED_MODES:
        raise InvalidParameters(f"density reconstruction supports n <= 2, got {n}")

    if n == 1:
        p, dp = c[0, 0].real, dc[0, 0].real
        rho = np.diag([1.0 - p, p]).astype(complex)
        drho = np.diag([-dp, dp]).astype(complex)
    else:
        c11, c22, c12 = c[0, 0].real, c[1, 1].real, c[0, 1]
        d11, d22, d12 = dc[0, 0].real, dc[1, 1].real, dc[0, 1]
        n12 = c11 * c22 - abs(c12) ** 2
        dn12 = d11 * c22 + c11 * d22 - 2.0 * (np.conj(c12) * d12).real

        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0 - c11 - c22 + n12
        rho[1, 1] = c22 - n12
        rho[2, 2] = c11 - n12
        rho[3, 3] = n12
        rho[1, 2] = c12
        rho[2, 1] = np.conj(c12)

        drho = np.zeros((4, 4), dtype=complex)
        drho[0, 0] = -d11 - d22 + dn12
        drho[1, 1] = d22 - dn12
        drho[2, 2] = d11 - dn12
        drho[3, 3] = dn12
        drho[1, 2] = d12
        drho[2, 1] = np.conj(d12)

    lowest = np.linalg.eigvalsh(rho).min()
    if lowest < -PSD_TOL:
        raise NotPSD(f"Wick reconstruction has eigenvalue {lowest:.3e}; C is inconsistent")
    return ProbeDensityMatrix(rho, drho)


def two_mode_qfi(correlations: CorrelationMatrix) -> float:
    """QFI of the state rebuilt from the correlation matrix."""
    state = gaussian_to_density(correlations)
    return qfi_sld(state.rho, state.rho_dT)


def _single_mode_fisher(params: ModelParams, t: Optional[float], cfg: QuadConfig) -> float:
    if t is None:
        return fi_two_outcome(*p1_steady_with_derivative(params, cfg))
    return fi_two_outcome(*p1_exact_with_derivative(t, params, cfg))


def qfi_common_vs_independent(t: Optional[float], params: ModelParams,
                              cfg: Optional[QuadConfig] = None) -> Tuple[float, float, float]:
    """
    QFI of two fermions sharing one bath against the sum of single-fermion
    QFIs with one bath each (same Gamma and T). t=None compares steady states.

    Returns:
        (qfi_common, qfi_independent, ratio)
    """
    cfg = cfg or QuadConfig()
    if params.n_modes != 2:
        raise InvalidParameters(f"additivity comparison needs two modes, got {params.n_modes}")
    correlations = steady_correlations(params, cfg) if t is None else evolve_correlations(t, params, cfg)
    common = two_mode_qfi(correlations)
    independent = sum(_single_mode_fisher(params.single_mode(j), t, cfg) for j in range(2))
    if independent > 0:
        ratio = common / independent
    else:
        ratio = np.inf if common > 0 else np.nan
    return common, independent, float(ratio)


@dataclass
class SymmetricReduction:
    """Bright/dark decomposition of n identical probes and the matching rescaling."""

    n_modes: int
    correlations: CorrelationMatrix
    bright_occupation: float
    dark_occupations: np.ndarray
    initial_dark_occupations: np.ndarray
    predictions: Dict[str, float]
    matched: Optional[str]

    @property
    def dark_frozen(self) -> bool:
        return bool(np.allclose(self.dark_occupations, self.initial_dark_occupations,
                                rtol=0, atol=MATCH_TOL))


def _bright_dark_basis(n: int) -> np.ndarray:
    """Real orthonormal basis whose first column is (1,...,1)/sqrt(n)."""
    seed = np.eye(n)
    seed[:, 0] = 1.0
    q, _ = np.linalg.qr(seed)
    if q[0, 0] < 0:
        q = -q
    return q


def symmetric_reduction(n: int, params: ModelParams, t: float,
                        cfg: Optional[QuadConfig] = None) -> SymmetricReduction:
    """
    Compare n identical probes with a single probe of rescaled coupling.

    The bright mode sum_i d_i/sqrt(n) couples with amplitude sqrt(n), the
    other n-1 modes are dark. The bright occupation is matched against a
    single probe with coupling n*Gamma and with sqrt(n)*Gamma, both
    starting from the mean initial occupation.
    """
    cfg = cfg or QuadConfig()
    if n < 1:
        raise InvalidParameters(f"n must be >= 1, got {n}")
    if len(set(params.epsilons)) != 1:
        raise InvalidParameters("symmetric reduction needs equal mode energies")
    if params.n_modes == 1:
        params = params.replace(epsilons=params.epsilons * n,
                                initial_occupations=params.initial_occupations * n)
    elif params.n_modes != n:
        raise InvalidParameters(f"params describe {params.n_modes} modes, expected {n}")

    correlations = evolve_correlations(t, params, cfg)
    basis = _bright_dark_basis(n)
    rotated = basis.T @ correlations.c @ basis
    initial = basis.T @ _initial_correlations(params) @ basis
    bright = float(rotated[0, 0].real)

    mean_p0 = float(np.mean(params.initial_occupations))
    predictions = {}
    for label, factor in (("n*gamma", n), ("sqrt(n)*gamma", np.sqrt(n))):
        single = ModelParams.single(epsilon=params.epsilons[0], mu=params.mu,
                                    gamma=factor * params.gamma,
                                    temperature=params.temperature, p0=mean_p0)
        predictions[label] = p1_exact(t, single, cfg)

    matched = None
    for label, value in predictions.items():
        if abs(value - bright) <= MATCH_TOL:
            matched = label
            break
    logger.debug("symmetric reduction n=%d t=%g: bright=%.12g predictions=%s matched=%s",
                 n, t, bright, predictions, matched)

    return SymmetricReduction(
        n_modes=n,
        correlations=correlations,
        bright_occupation=bright,
        dark_occupations=rotated.diagonal()[1:].real.copy(),
        initial_dark_occupations=initial.diagonal()[1:].real.copy(),
        predictions=predictions,
        matched=matched,
    )
