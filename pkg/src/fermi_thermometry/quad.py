"""
Numerical kernels: matrix exponentials of the small Langevin generator and
frequency integrals of Fermi-weighted response functions.

The central quantity is the response vector of an n-mode generator A driven
by a bath that couples uniformly to every mode,

    g(omega, t) = int_0^t e^{A(t-s)} 1 e^{-i omega s} ds,

and the matrix integral N = int F(omega) conj(g) g^T d omega with F the
Fermi function or its temperature derivative. The single-probe Lorentzian
integrals are the 1x1 case.

Integration is split in three zones:
- near zone around mu and the resonances: adaptive Gauss-Legendre panels
  whose width never exceeds pi/(4 max(t, 1)),
- far zones inside the Fermi window (only when the near zone would need too
  many panels): QUADPACK with cos/sin weights on the non-oscillatory
  amplitudes,
- lower tail below the Fermi window, where f = 1 to e^-50: QUADPACK's
  Fourier-integral routine after reflecting omega -> -omega.
"""

import cmath
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, linalg

from fermi_thermometry.errors import (
    InvalidParameters,
    NonConvergence,
    SingularDecomposition,
)
from fermi_thermometry.model import ModelParams, fermi_values

logger = logging.getLogger(__name__)

MAX_DIM = 8
EIGEN_COND_LIMIT = 1e8
# eigenbasis rounding in g(omega, t) must stay below rel_tol
RESPONSE_COND_LIMIT = 1e4
# flagged QUADPACK results are kept up to this error for any requested tolerance
QUADPACK_FAILURE_FLOOR = 1e-8
FOURIER_CYCLES = 200
GL_ORDER = 15
CHUNK_PANELS = 4096
RESONANCE_REACH = 64.0

_GL_NODES, _GL_WEIGHTS = leggauss(GL_ORDER)

# Square complex array, dim >= 1.
ComplexMatrix = np.ndarray


@dataclass(frozen=True)
class QuadConfig:
    """
    Tolerances for every frequency integral.

    Args:
        rel_tol: Relative tolerance
        abs_tol: Absolute tolerance
        max_panels: Gauss-Legendre panel budget before NonConvergence
        fermi_cutoff: |omega - mu|/T beyond which the Fermi factor is saturated
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_panels: int = 2 ** 20
    fermi_cutoff: float = 50.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidParameters("tolerances must be > 0")
        if self.max_panels < 16:
            raise InvalidParameters(f"max_panels must be >= 16, got {self.max_panels}")
        if not self.fermi_cutoff > 0:
            raise InvalidParameters("fermi_cutoff must be > 0")

    @property
    def failure_tol(self) -> float:
        """QUADPACK error estimate above which a flagged integral is rejected."""
        return max(10.0 * max(self.abs_tol, self.rel_tol), QUADPACK_FAILURE_FLOOR)


def as_complex_matrix(a) -> ComplexMatrix:
    """Coerce to a square complex matrix (scalars become 1x1)."""
    m = np.atleast_2d(np.asarray(a, dtype=complex))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class EigenBasis:
    values: np.ndarray
    vectors: np.ndarray
    inverse: np.ndarray
    condition: float


def eigen_basis(a: np.ndarray) -> Optional[EigenBasis]:
    """Eigendecomposition of a, or None when the eigenvector basis is ill-conditioned."""
    try:
        values, vectors = np.linalg.eig(a)
        condition = np.linalg.cond(vectors)
        if not np.isfinite(condition) or condition >= EIGEN_COND_LIMIT:
            return None
        return EigenBasis(values, vectors, np.linalg.inv(vectors), float(condition))
    except np.linalg.LinAlgError:
        return None


def expm(a, t: float = 1.0) -> ComplexMatrix:
    """
    Matrix exponential e^{At} for dim(A) <= 8.

    Uses the eigendecomposition when the eigenvector matrix is well
    conditioned, otherwise Pade scaling-and-squaring.

    Raises:
        SingularDecomposition: if neither path gives a finite result
    """
    a = as_complex_matrix(a)
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"expm supports dim <= {MAX_DIM}, got {a.shape[0]}")

    basis = eigen_basis(a)
    if basis is not None:
        with np.errstate(over="ignore", invalid="ignore"):
            result = (basis.vectors * np.exp(basis.values * t)) @ basis.inverse
        if np.all(np.isfinite(result)):
            return result
    logger.warning("expm: eigenvector basis unusable, falling back to Pade")

    try:
        result = linalg.expm(a * t)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularDecomposition(f"e^(At) failed for t={t}: {exc}") from exc
    if not np.all(np.isfinite(result)):
        raise SingularDecomposition(f"e^(At) is not finite for t={t}")
    return result


def cexpm1(z):
    """e^z - 1 for complex z without cancellation near 0."""
    z = np.asarray(z, dtype=complex)
    a, b = z.real, z.imag
    with np.errstate(over="ignore", invalid="ignore"):
        real = np.expm1(a) * np.cos(b) - 2.0 * np.sin(b / 2.0) ** 2
        imag = np.exp(a) * np.sin(b)
    return real + 1j * imag


def phi1(z):
    """(e^z - 1)/z, equal to 1 at z = 0."""
    z = np.asarray(z, dtype=complex)
    safe = np.where(z == 0, 1.0, z)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(z == 0, 1.0 + 0j, cexpm1(z) / safe)


class LangevinResponse:
    """
    Response g(omega, t) of the generator `a` to a uniformly coupled bath.

    With t=None the steady-state response (-i omega - A)^{-1} 1 is used.
    Near-defective generators (eigenvector condition >= RESPONSE_COND_LIMIT,
    e.g. eps2 - eps1 = Gamma for two probes) are evaluated without the
    eigenbasis: by resolvent solves away from the poles and by the
    exponential of the augmented matrix [[A, 1], [0, -i omega]] near them.
    """

    def __init__(self, a, t: Optional[float] = None):
        self.a = as_complex_matrix(a)
        if self.a.shape[0] > MAX_DIM:
            raise ValueError(f"response supports dim <= {MAX_DIM}, got {self.a.shape[0]}")
        if t is not None and t < 0:
            raise InvalidParameters(f"t must be >= 0, got {t}")
        self.t = None if t is None else float(t)
        self.dim = self.a.shape[0]
        self.ones = np.ones(self.dim, dtype=complex)
        self.eigenvalues = np.linalg.eigvals(self.a)
        self.basis = eigen_basis(self.a)
        if self.basis is not None and self.basis.condition >= RESPONSE_COND_LIMIT:
            self.basis = None
        if self.basis is not None:
            self._u = self.basis.inverse @ self.ones
        else:
            logger.warning("response: near-defective generator, evaluating without eigenbasis")
        if self.t is not None:
            if self.basis is not None:
                propagator = expm(self.a, self.t)
            else:
                propagator = linalg.expm(self.a * self.t)
            self._driven = propagator @ self.ones

    @property
    def steady(self) -> bool:
        return self.t is None

    def resonances(self) -> Tuple[np.ndarray, np.ndarray]:
        """Centres -Im(lambda) and half-widths -Re(lambda) of the generator poles."""
        return -self.eigenvalues.imag, np.maximum(-self.eigenvalues.real, 0.0)

    def _resolvent_solve(self, omega: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        eye = np.eye(self.dim)
        m = -1j * omega[:, None, None] * eye - self.a
        return np.linalg.solve(m, rhs[..., None])[..., 0]

    def _augmented_exponential(self, omega: np.ndarray) -> np.ndarray:
        # top-right block of e^{Bt}, B = [[A, 1], [0, -i omega]], is g(omega, t)
        n = self.dim
        block = np.zeros((omega.size, n + 1, n + 1), dtype=complex)
        block[:, :n, :n] = self.a * self.t
        block[:, :n, n] = self.t
        block[:, n, n] = -1j * omega * self.t
        return linalg.expm(block)[:, :n, n]

    def _jordan_safe_values(self, omega: np.ndarray) -> np.ndarray:
        out = np.empty((omega.size, self.dim), dtype=complex)
        # |(-i omega - lambda) t| >= 1: e^{-i omega t} 1 - e^{At} 1 does not cancel
        gap = np.min(np.abs(-1j * omega[:, None] - self.eigenvalues[None, :]), axis=1) * self.t
        far = gap >= 1.0
        if np.any(far):
            w = omega[far]
            rhs = np.exp(-1j * w * self.t)[:, None] * self.ones - self._driven
            out[far] = self._resolvent_solve(w, rhs)
        if not np.all(far):
            out[~far] = self._augmented_exponential(omega[~far])
        return out

    def values(self, omega) -> np.ndarray:
        """g(omega, t) for an array of frequencies, shape (m, n)."""
        omega = np.asarray(omega, dtype=float).ravel()
        if self.basis is None:
            if self.steady:
                rhs = np.broadcast_to(self.ones, (omega.size, self.dim))
                return self._resolvent_solve(omega, rhs)
            return self._jordan_safe_values(omega)

        lam = self.basis.values
        z = -1j * omega[:, None] - lam[None, :]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.steady:
                psi = 1.0 / z
            else:
                t = self.t
                zt = z * t
                near = t * np.exp(lam * t)[None, :] * phi1(zt)
                far = (np.exp(-1j * omega * t)[:, None] - np.exp(lam * t)[None, :]) / z
                psi = np.where(np.abs(zt) < 1.0, near, far)
        # dark modes carry u_k = 0
        psi = np.where(self._u == 0, 0.0, psi)
        return (psi * self._u) @ self.basis.vectors.T

    def amplitudes(self, omega) -> Tuple[np.ndarray, np.ndarray]:
        """
        Non-oscillatory pieces r1 = R 1 and rh = R e^{At} 1 with
        R = (-i omega - A)^{-1}, so that g = e^{-i omega t} r1 - rh.
        """
        omega = np.asarray(omega, dtype=float).ravel()
        driven = np.zeros(self.dim, dtype=complex) if self.steady else self._driven
        if self.basis is None:
            r1 = self._resolvent_solve(omega, np.broadcast_to(self.ones, (omega.size, self.dim)))
            rh = self._resolvent_solve(omega, np.broadcast_to(driven, (omega.size, self.dim)))
            return r1, rh

        lam = self.basis.values
        z = -1j * omega[:, None] - lam[None, :]
        r1 = (self._u / z) @ self.basis.vectors.T
        if self.steady:
            return r1, np.zeros_like(r1)
        decay = np.exp(lam * self.t)
        rh = ((self._u * decay) / z) @ self.basis.vectors.T
        return r1, rh


# --- adaptive Gauss-Legendre panels -------------------------------------------------


def _gauss_legendre(func, left: np.ndarray, right: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """15-point rule on every panel; returns (sums, sums of |integrand|), shape (p, k)."""
    half = (right - left) / 2.0
    mid = (right + left) / 2.0
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = func(nodes.ravel())
    vals = vals.reshape(left.size, GL_ORDER, -1)
    weights = _GL_WEIGHTS[None, :, None] * half[:, None, None]
    return (vals * weights).sum(axis=1), (np.abs(vals) * weights).sum(axis=1)


def _panel_estimates(func, left, right):
    coarse, _ = _gauss_legendre(func, left, right)
    mid = (left + right) / 2.0
    lhs, lhs_abs = _gauss_legendre(func, left, mid)
    rhs, rhs_abs = _gauss_legendre(func, mid, right)
    return lhs + rhs, coarse, lhs_abs + rhs_abs


def _group_max(x: np.ndarray, groups: int) -> np.ndarray:
    """max |x| over each of `groups` equal blocks of the last axis."""
    x = np.abs(x)
    return x.reshape(x.shape[:-1] + (groups, -1)).max(axis=-1)


def _adaptive_panels(func, left: np.ndarray, right: np.ndarray, cfg: QuadConfig,
                     groups: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate a vectorised (m,) -> (m, k) function over the union of panels.

    The k components form `groups` equal blocks (one per kernel) measured in
    the max norm, so each block shares the tolerance
    max(abs_tol, rel_tol * max|block total|). A panel's error is the
    15-point rule against the sum of its two halves, or zero when that is
    below the roundoff floor of the panel. Each round the block totals are
    checked against the global budget; where they fail, the largest-error
    panels are bisected until the rest fits in half the remaining budget,
    and the rest are accepted.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if left.size == 0 or float(np.sum(right - left)) <= 0:
        return np.zeros(0), np.zeros(0)

    accepted = None
    accepted_err = None
    spent = np.zeros(groups)
    panels_used = left.size
    floor_factor = 50.0 * np.finfo(float).eps

    while left.size:
        fine_parts, coarse_parts, mag_parts = [], [], []
        for start in range(0, left.size, CHUNK_PANELS):
            sl = slice(start, start + CHUNK_PANELS)
            fine, coarse, mag = _panel_estimates(func, left[sl], right[sl])
            fine_parts.append(fine)
            coarse_parts.append(coarse)
            mag_parts.append(mag)
        fine = np.concatenate(fine_parts)
        coarse = np.concatenate(coarse_parts)
        magnitude = np.concatenate(mag_parts)

        if accepted is None:
            accepted = np.zeros(fine.shape[1], dtype=fine.dtype)
            accepted_err = np.zeros(fine.shape[1])

        error = np.abs(fine - coarse)
        panel_err = _group_max(error, groups)
        panel_err = np.where(panel_err <= floor_factor * _group_max(magnitude, groups), 0.0, panel_err)

        estimate = accepted + fine.sum(axis=0)
        tol = np.maximum(cfg.abs_tol, cfg.rel_tol * _group_max(estimate, groups))
        budget = np.maximum(tol - spent, 0.25 * tol)

        split = np.zeros(left.size, dtype=bool)
        for g in range(groups):
            err_g = panel_err[:, g]
            if err_g.sum() <= budget[g]:
                continue
            order = np.argsort(err_g)
            kept = np.cumsum(err_g[order]) <= 0.5 * budget[g]
            split[order[~kept]] = True

        keep = ~split
        accepted = accepted + fine[keep].sum(axis=0)
        accepted_err = accepted_err + error[keep].sum(axis=0)
        spent = spent + panel_err[keep].sum(axis=0)

        left, right = left[split], right[split]
        if left.size == 0:
            break
        panels_used += left.size
        if panels_used > cfg.max_panels:
            best = accepted + fine[split].sum(axis=0)
            err = float(np.max(accepted_err + error[split].sum(axis=0)))
            raise NonConvergence(
                f"panel budget {cfg.max_panels} exhausted", estimate=best, error=err
            )
        mid = (left + right) / 2.0
        left, right = np.concatenate([left, mid]), np.concatenate([mid, right])

    return accepted, accepted_err


def integrate_panels(func: Callable, edges: Sequence[float], cfg: Optional[QuadConfig] = None) -> float:
    """
    Adaptive Gauss-Legendre integral of a vectorised scalar function over
    the window spanned by `edges` (the initial panel breakpoints).
    """
    cfg = cfg or QuadConfig()
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing with at least two points")

    def wrapped(omega):
        return np.asarray(func(omega)).reshape(omega.size, 1)

    value, _ = _adaptive_panels(wrapped, edges[:-1], edges[1:], cfg)
    return value[0]


# --- window partition ------------------------------------------------------------


def _ladder(centre: float, scale: float, lo: float, hi: float) -> np.ndarray:
    """Geometric breakpoints centre +- scale*4^j inside (lo, hi)."""
    points = [centre]
    if scale > 0:
        reach = max(abs(hi - centre), abs(centre - lo))
        j_max = int(np.ceil(np.log(max(reach / scale, 1.0)) / np.log(4.0))) + 1
        steps = scale * 4.0 ** np.arange(-2, j_max + 1)
        points.extend(centre + steps)
        points.extend(centre - steps)
    points = np.asarray(points)
    return points[(points > lo) & (points < hi)]


def _merge(intervals: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    merged = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def _partition(lo, hi, centres, scales, cap, budget):
    """
    Initial Gauss-Legendre panels plus far intervals left to QUADPACK.

    Panels never exceed `cap` in width. When the capped panel count would
    exceed `budget`, the near zone shrinks to equal-radius intervals around
    the centres and the remainder becomes far intervals.
    """
    near = [(lo, hi)]
    if cap is not None and (hi - lo) / cap > budget:
        radius = budget * cap / (2.0 * len(centres))
        near = _merge([(max(lo, c - radius), min(hi, c + radius))
                       for c in centres if c + radius > lo and c - radius < hi])
        logger.debug("near zone shrunk to radius %.3g around %d centres", radius, len(centres))

    far = []
    cursor = lo
    for a, b in near:
        if a > cursor:
            far.append((cursor, a))
        cursor = b
    if cursor < hi:
        far.append((cursor, hi))

    ladder = np.concatenate([_ladder(c, s, lo, hi) for c, s in zip(centres, scales)])
    lefts, rights = [], []
    for a, b in near:
        if b <= a:
            continue
        inside = ladder[(ladder > a) & (ladder < b)]
        points = np.unique(np.concatenate([[a, b], inside]))
        for p, q in zip(points[:-1], points[1:]):
            pieces = 1 if cap is None else max(1, int(np.ceil((q - p) / cap)))
            sub = np.linspace(p, q, pieces + 1)
            lefts.append(sub[:-1])
            rights.append(sub[1:])
    if not lefts:
        return np.zeros(0), np.zeros(0), far
    return np.concatenate(lefts), np.concatenate(rights), far


# --- QUADPACK pieces --------------------------------------------------------------


def _quad_real(func, a, b, cfg: QuadConfig, **kwargs) -> float:
    out = integrate.quad(
        func, a, b,
        epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=500,
        full_output=1, **kwargs,
    )
    value, error = out[0], out[1]
    if len(out) > 3:
        if error > cfg.failure_tol * max(1.0, abs(value)):
            raise NonConvergence(
                f"QUADPACK failed on [{a}, {b}]: {out[3]}", estimate=value, error=error
            )
        logger.warning("QUADPACK warning on [%s, %s] within tolerance (err=%.2e)", a, b, error)
    return value


def _fourier_integral(h: Callable[[float], complex], a: float, b: float, t: float, cfg: QuadConfig) -> complex:
    """int_a^b h(omega) e^{i omega t} d omega for complex h; a may be -inf."""
    extra = {}
    if np.isinf(a):
        # omega = -s maps (-inf, b] onto [-b, inf)
        start, stop, sign = -b, np.inf, -1.0
        re = lambda s: h(-s).real
        im = lambda s: h(-s).imag
        extra["limlst"] = FOURIER_CYCLES
    else:
        start, stop, sign = a, b, 1.0
        re = lambda w: h(w).real
        im = lambda w: h(w).imag
    c_re = _quad_real(re, start, stop, cfg, weight="cos", wvar=t, **extra)
    s_re = _quad_real(re, start, stop, cfg, weight="sin", wvar=t, **extra)
    c_im = _quad_real(im, start, stop, cfg, weight="cos", wvar=t, **extra)
    s_im = _quad_real(im, start, stop, cfg, weight="sin", wvar=t, **extra)
    return complex(c_re - sign * s_im, c_im + sign * s_re)


def _amplitude_integral(response: LangevinResponse, kernel: Callable, a: float, b: float,
                        cfg: QuadConfig) -> np.ndarray:
    """
    int_a^b F(omega) conj(g) g^T d omega through the decomposition
    conj(g) g^T = q0 + q e^{i omega t} + (q e^{i omega t})^dagger with
    q0 = conj(r1) r1^T + conj(rh) rh^T and q = -conj(r1) rh^T.
    """
    n = response.dim
    result = np.zeros((n, n), dtype=complex)
    if n == 1:
        lam = complex(response.a[0, 0])
        decay = 0j if response.steady else cmath.exp(lam * response.t)

    @lru_cache(maxsize=16384)
    def pieces(w):
        weight = float(kernel(w))
        if n == 1:
            z = -1j * w - lam
            r1 = 1.0 / z
            rh = decay / z
            q0 = abs(r1) ** 2 + abs(rh) ** 2
            q = -r1.conjugate() * rh
            return np.array([[weight * q0]]), np.array([[weight * q]])
        r1, rh = response.amplitudes(np.array([w]))
        r1, rh = r1[0], rh[0]
        q0 = np.outer(np.conj(r1), r1) + np.outer(np.conj(rh), rh)
        q = -np.outer(np.conj(r1), rh)
        return weight * q0, weight * q

    for i in range(n):
        for j in range(i, n):
            real = _quad_real(lambda w, i=i, j=j: pieces(w)[0][i, j].real, a, b, cfg)
            imag = 0.0
            if i != j:
                imag = _quad_real(lambda w, i=i, j=j: pieces(w)[0][i, j].imag, a, b, cfg)
            result[i, j] += complex(real, imag)
            if i != j:
                result[j, i] += complex(real, -imag)

    if not response.steady and response.t > 0:
        m = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                m[i, j] = _fourier_integral(lambda w, i=i, j=j: pieces(w)[1][i, j],
                                            a, b, response.t, cfg)
        result += m + m.conj().T
    return result


# --- public integrals -----------------------------------------------------------


def integrate_response(response: LangevinResponse, params: ModelParams,
                       cfg: Optional[QuadConfig] = None,
                       numerators: Sequence[str] = ("fermi", "fermi_dT")) -> np.ndarray:
    """
    N = int F(omega) conj(g(omega, t)) g(omega, t)^T d omega for every
    numerator kernel F, stacked into shape (len(numerators), n, n).

    Args:
        response: Response of the generator (transient or steady)
        params: Supplies mu and T for the Fermi kernels
        cfg: Tolerances
        numerators: Kernel names, 'fermi' and/or 'fermi_dT'

    Returns:
        Hermitian matrices, one per numerator

    Raises:
        NonConvergence: if any zone misses its tolerance
    """
    cfg = cfg or QuadConfig()
    numerators = tuple(numerators)
    n = response.dim
    out = np.zeros((len(numerators), n, n), dtype=complex)
    if not response.steady and response.t == 0:
        return out

    mu, temperature = params.mu, params.temperature
    cut = cfg.fermi_cutoff * temperature
    centres, widths = response.resonances()
    hi = mu + cut
    lo = mu - cut
    if "fermi" in numerators:
        lo = min(lo, float(np.min(centres - RESONANCE_REACH * widths)))

    cap = None if response.steady else np.pi / (4.0 * max(response.t, 1.0))
    all_centres = np.concatenate([[mu], centres])
    all_scales = np.concatenate([[temperature], widths])
    left, right, far = _partition(lo, hi, all_centres, all_scales, cap, cfg.max_panels // 4)

    def integrand(omega):
        g = response.values(omega)
        outer = np.conj(g)[:, :, None] * g[:, None, :]
        weights = fermi_values(omega, params, numerators)
        prod = weights[:, :, None, None] * outer[None, :, :, :]
        return np.moveaxis(prod, 1, 0).reshape(omega.size, -1)

    if left.size:
        near, _ = _adaptive_panels(integrand, left, right, cfg, groups=len(numerators))
        out += near.reshape(len(numerators), n, n)

    for k, name in enumerate(numerators):
        kernel = lambda w, name=name: fermi_values(np.array([w]), params, (name,))[0, 0]
        for a, b in far:
            out[k] += _amplitude_integral(response, kernel, a, b, cfg)
        if name == "fermi":
            out[k] += _amplitude_integral(response, kernel, -np.inf, lo, cfg)

    return 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))


def single_mode_response(params: ModelParams, t: Optional[float]) -> LangevinResponse:
    """Response of one probe, A = -i epsilon - Gamma/2."""
    a = np.array([[-1j * params.epsilon - params.gamma / 2.0]])
    return LangevinResponse(a, t)


def integrate_fermi_lorentzian(t: float, params: ModelParams, cfg: Optional[QuadConfig] = None,
                               weight: str = "transient", numerator: str = "fermi") -> float:
    """
    int F(omega) w(omega) d omega over the real line for one probe, with
    F = f or dF/dT and w the steady weight 1/(Gamma^2 + 4(omega-eps)^2)
    or the transient weight
    (1 - 2 e^{-Gamma t/2} cos((omega-eps) t) + e^{-Gamma t})/(Gamma^2 + 4(omega-eps)^2).

    For one mode |g|^2 is four times the transient weight (and |R 1|^2 four
    times the steady one), hence the division by 4.
    """
    if weight not in ("steady", "transient"):
        raise ValueError(f"weight must be 'steady' or 'transient', got {weight!r}")
    if t < 0:
        raise InvalidParameters(f"t must be >= 0, got {t}")
    response = single_mode_response(params, None if weight == "steady" else t)
    matrix = integrate_response(response, params, cfg, (numerator,))
    return float(matrix[0, 0, 0].real) / 4.0
