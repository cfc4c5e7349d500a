"""
Tests for Fisher information, noise-to-signal ratios and the optimisers.
"""

import unittest
import numpy as np
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from fermi_thermometry.errors import DegenerateDistribution, FlatObjective, NotAState
from fermi_thermometry.metrology import (
    accumulated_fisher,
    fi_rate,
    fi_rate_at_time,
    fi_two_outcome,
    fisher_curve,
    heat_capacity,
    markovian_fi_rate_closed_form,
    markovian_noise_to_signal,
    noise_to_signal,
    optimal_gamma,
    optimal_temperature,
    optimal_time,
    optimize_scalar,
    power_law_exponent,
    qfi_exact,
    qfi_markovian,
    qfi_sld,
    spectral_decomposition,
    weak_coupling_noise_to_signal,
)
from fermi_thermometry.model import ModelParams
from fermi_thermometry.multi_probe import evolve_correlations, gaussian_to_density
from fermi_thermometry.quad import QuadConfig
from fermi_thermometry.single_probe import p1_exact_with_derivative


class TestFisherInformation(unittest.TestCase):
    """Test cases for classical and quantum Fisher information."""

    def test_two_outcome(self):
        """Test (dp/dT)^2 / (p(1-p)) and its edge cases."""
        self.assertAlmostEqual(fi_two_outcome(0.2, 0.1), 0.01 / 0.16)
        self.assertEqual(fi_two_outcome(0.0, 0.0), 0.0)
        with self.assertRaises(DegenerateDistribution):
            fi_two_outcome(1.0, 0.3)
        with self.assertRaises(ValueError):
            fi_two_outcome(1.2, 0.3)

    def test_qfi_of_diagonal_state_is_classical(self):
        """Test that a diagonal qubit gives the population FI."""
        rho = np.diag([0.7, 0.3])
        drho = np.diag([-0.05, 0.05])
        self.assertAlmostEqual(qfi_sld(rho, drho), fi_two_outcome(0.3, 0.05), places=12)

    def test_qfi_of_rotating_pure_state(self):
        """Test QFI = 1 for (cos(x/2), sin(x/2)) rotated in x."""
        x = 0.8
        psi = np.array([np.cos(x / 2), np.sin(x / 2)])
        rho = np.outer(psi, psi)
        drho = 0.5 * np.array([[-np.sin(x), np.cos(x)], [np.cos(x), np.sin(x)]])
        self.assertAlmostEqual(qfi_sld(rho, drho), 1.0, places=10)

    def test_qfi_is_basis_independent(self):
        """Test that a joint unitary rotation of rho and drho leaves the QFI unchanged."""
        rng = np.random.default_rng(8)
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = x @ x.conj().T
        rho /= np.trace(rho).real
        h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        drho = h + h.conj().T
        drho -= np.trace(drho).real * np.eye(4) / 4
        drho *= 0.05
        u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        rotated = qfi_sld(u @ rho @ u.conj().T, u @ drho @ u.conj().T)
        self.assertAlmostEqual(rotated / qfi_sld(rho, drho), 1.0, delta=1e-8)

    def test_two_probe_qfi_matches_lyapunov_solution(self):
        """Test the SLD QFI against a vectorised solve of L rho + rho L = 2 drho."""
        params = ModelParams(epsilons=(0.0, 1.0), gamma=0.5, temperature=1.0)
        state = gaussian_to_density(evolve_correlations(2.0, params))
        rho, drho = state.rho, state.rho_dT
        eye = np.eye(4)
        system = np.kron(rho.T, eye) + np.kron(eye, rho)
        vec = np.linalg.lstsq(system, 2.0 * drho.reshape(-1, order="F"), rcond=None)[0]
        sld = vec.reshape(4, 4, order="F")
        expected = np.trace(rho @ sld @ sld).real
        self.assertGreater(expected, 0.0)
        self.assertAlmostEqual(qfi_sld(rho, drho) / expected, 1.0, delta=1e-8)

    def test_rejects_non_states(self):
        """Test NotAState for a wrong trace, a non-Hermitian rho and a traced derivative."""
        with self.assertRaises(NotAState):
            qfi_sld(np.diag([0.6, 0.6]), np.zeros((2, 2)))
        with self.assertRaises(NotAState):
            qfi_sld(np.array([[0.5, 0.1], [0.0, 0.5]]), np.zeros((2, 2)))
        with self.assertRaises(NotAState):
            qfi_sld(np.diag([0.5, 0.5]), np.diag([0.1, 0.1]))
        with self.assertRaises(NotAState):
            spectral_decomposition(np.diag([1.2, -0.2]), np.zeros((2, 2)))

    def test_single_probe_qfi(self):
        """Test that qfi_exact is the FI of the exact populations."""
        params = ModelParams.single(gamma=1.0, temperature=0.2)
        self.assertAlmostEqual(qfi_exact(2.0, params),
                               fi_two_outcome(*p1_exact_with_derivative(2.0, params)), places=12)

    def test_rates(self):
        """Test fi_rate and accumulated_fisher."""
        self.assertEqual(fi_rate(2.0, 3.0), 1.5)
        self.assertEqual(accumulated_fisher(10.0, 2.0, 3.0), 15.0)
        with self.assertRaises(ValueError):
            fi_rate(0.0, 1.0)


class TestMarkovianMetrology(unittest.TestCase):
    """Test cases for the weak-coupling closed forms."""

    def setUp(self):
        self.params = ModelParams.single(gamma=0.5, temperature=0.3)

    def test_closed_form_rate(self):
        """Test the closed-form Markovian FI rate against the composed expression."""
        for t in (0.01, 0.3, 2.0, 20.0):
            composed = fi_rate(t, qfi_markovian(t, self.params))
            self.assertAlmostEqual(markovian_fi_rate_closed_form(t, self.params) / composed, 1.0,
                                   places=10)

    def test_closed_form_needs_empty_start(self):
        """Test that the closed form refuses p0 != 0."""
        with self.assertRaises(ValueError):
            markovian_fi_rate_closed_form(1.0, self.params.replace(initial_occupations=(0.5,)))

    def test_gibbs_fisher_is_heat_capacity(self):
        """Test that the long-time Markovian FI equals C/T^2."""
        self.assertAlmostEqual(qfi_markovian(500.0, self.params),
                               heat_capacity(self.params) / 0.3 ** 2, places=10)
        self.assertAlmostEqual(markovian_noise_to_signal(self.params),
                               1.0 / heat_capacity(self.params), places=10)

    def test_weak_coupling_optimum(self):
        """Test that the Gibbs noise-to-signal ratio is minimal at T* = 0.42 (eps - mu)."""
        best = optimal_temperature(ModelParams.single(), method="markovian")
        self.assertIsNone(best.boundary)
        self.assertAlmostEqual(best.argmax, 0.42, delta=0.01)
        x = 1.0 / best.argmax
        self.assertAlmostEqual(x, 2.3994, delta=0.01)
        self.assertTrue(np.isinf(weak_coupling_noise_to_signal(0.0)))


class TestEquilibriumScaling(unittest.TestCase):
    """Test cases for the steady-state noise-to-signal ratio."""

    def test_weak_coupling_agrees_with_gibbs(self):
        """Test agreement with the Gibbs ratio to 0.1% at Gamma = 1e-4."""
        for temperature in (0.5, 1.0, 2.0):
            params = ModelParams.single(gamma=1e-4, temperature=temperature)
            ratio = noise_to_signal(params) / markovian_noise_to_signal(params)
            self.assertAlmostEqual(ratio, 1.0, delta=1e-3)

    def test_low_temperature_power_law(self):
        """Test that the ratio diverges like T^-4 at strong coupling and low T."""
        temperatures = np.geomspace(5e-3, 2e-2, 6)
        values = [noise_to_signal(ModelParams.single(gamma=1.0, temperature=T))
                  for T in temperatures]
        slope = power_law_exponent(temperatures, values)
        self.assertGreaterEqual(-slope, 3.9)
        self.assertLessEqual(-slope, 4.2)

    def test_high_temperature_power_law(self):
        """Test the T^2 growth at high temperature."""
        temperatures = np.geomspace(10.0, 100.0, 5)
        values = [noise_to_signal(ModelParams.single(gamma=1.0, temperature=T))
                  for T in temperatures]
        self.assertAlmostEqual(power_law_exponent(temperatures, values), 2.0, delta=0.05)

    def test_power_law_exponent(self):
        """Test the log-log fit on an exact power law."""
        x = np.array([1.0, 2.0, 4.0])
        self.assertAlmostEqual(power_law_exponent(x, 3.0 * x ** -1.5), -1.5, places=12)


class TestTransientFisher(unittest.TestCase):
    """Test cases for Fisher information versus interrogation time."""

    def test_exact_qfi_has_interior_peak(self):
        """Test a local maximum followed by a lower value for the exact QFI, monotone Markovian QFI."""
        times = np.linspace(0.1, 50.0, 80)
        for gamma in (0.5, 1.0):
            params = ModelParams.single(gamma=gamma, temperature=0.05)
            exact = fisher_curve(times, params).values
            interior = [i for i in range(1, len(times) - 1)
                        if exact[i] > exact[i - 1] and exact[i] > exact[i + 1]]
            self.assertTrue(interior)
            self.assertLess(exact[-1], exact[interior[0]])

            markovian = fisher_curve(times, params, method="markovian").values
            self.assertTrue(np.all(np.diff(markovian) >= 0))

    def test_short_time_rate_exponent(self):
        """Test that the exact FI rate grows like t^6 for a filled start."""
        params = ModelParams.single(gamma=1.0, temperature=1.0, p0=1.0)
        times = np.geomspace(1e-4, 1e-3, 5)
        rates = [fi_rate_at_time(t, params, "exact") for t in times]
        self.assertTrue(all(rate > 0 for rate in rates))
        self.assertAlmostEqual(power_law_exponent(times, rates), 6.0, delta=0.1)

    def test_tight_tolerances_keep_short_times(self):
        """Test that tolerances below QUADPACK's reach still give the short-time population."""
        params = ModelParams.single(gamma=1.0, temperature=1.0, p0=1.0)
        strict = QuadConfig(rel_tol=1e-10, abs_tol=1e-30)
        p_strict, _ = p1_exact_with_derivative(1e-4, params, strict)
        p_default, _ = p1_exact_with_derivative(1e-4, params)
        self.assertAlmostEqual(p_strict, p_default, delta=1e-8)
        self.assertAlmostEqual(1.0 - p_strict, 0.5e-4, delta=1e-6)

    def test_markovian_optimum_at_zero_time(self):
        """Test that the Markovian FI rate is always best at the shortest time."""
        for gamma, temperature in ((1.0, 0.1), (0.1, 1.0), (0.5, 0.3)):
            params = ModelParams.single(gamma=gamma, temperature=temperature)
            best = optimal_time(params, method="markovian", grid_points=24)
            self.assertEqual(best.boundary, "lower")

    def test_exact_optimum_is_interior(self):
        """Test an interior optimal time for Gamma = 1, T = 0.1."""
        params = ModelParams.single(gamma=1.0, temperature=0.1)
        best = optimal_time(params, grid_points=32)
        self.assertIsNone(best.boundary)
        self.assertGreater(best.argmax * params.gamma, 0.05)

    def test_optimal_time_shrinks_with_coupling(self):
        """Test that Gamma t* decreases as Gamma goes to zero at T = 0.1."""
        gamma_t = []
        for gamma in (1.0, 0.3, 0.1, 0.03):
            params = ModelParams.single(gamma=gamma, temperature=0.1)
            gamma_t.append(gamma * optimal_time(params, grid_points=32).argmax)
        self.assertTrue(np.all(np.diff(gamma_t) < 0))


class TestOptimisers(unittest.TestCase):
    """Test cases for the scalar optimiser and the optimal coupling."""

    def test_optimize_scalar_refines(self):
        """Test that golden-section refinement finds a smooth maximum."""
        best = optimize_scalar(lambda x: -(np.log(x) - np.log(2.0)) ** 2, 0.1, 10.0, grid_points=9)
        self.assertAlmostEqual(best.argmax, 2.0, delta=2e-4)
        self.assertFalse(best.at_boundary)

    def test_boundary_flag(self):
        """Test the boundary flag for a monotone objective."""
        best = optimize_scalar(lambda x: x, 1.0, 2.0, log_grid=False, grid_points=5)
        self.assertEqual(best.boundary, "upper")

    def test_flat_objective(self):
        """Test FlatObjective on a constant function."""
        with self.assertRaises(FlatObjective):
            optimize_scalar(lambda x: 1.0, 1.0, 2.0)

    def test_steady_qfi_has_optimal_coupling(self):
        """Test an interior maximum of the steady QFI over Gamma at T = 0.1."""
        best = optimal_gamma(ModelParams.single(temperature=0.1), grid_points=24)
        self.assertIsNone(best.boundary)
        self.assertTrue(0.01 < best.argmax < 10.0)

    def test_max_rate_has_optimal_coupling(self):
        """Test an interior maximum of the maximal FI rate over Gamma at T = 0.1."""
        best = optimal_gamma(ModelParams.single(temperature=0.1), objective="max_fi_rate",
                             grid_points=12)
        self.assertIsNone(best.boundary)

    def test_unknown_objective(self):
        """Test that optimal_gamma rejects unknown objectives."""
        with self.assertRaises(ValueError):
            optimal_gamma(ModelParams.single(), objective="entropy")


if __name__ == '__main__':
    unittest.main()
