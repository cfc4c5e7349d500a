"""
Independent reference values for the single-probe integrals.
"""

import numpy as np
from scipy.integrate import simpson
from scipy.special import expit, psi


def steady_digamma(epsilon, mu, gamma, temperature):
    """Steady occupation 1/2 - Im psi(1/2 + (Gamma/2 + i(eps-mu))/(2 pi T))/pi."""
    z = 0.5 + (gamma / 2.0 + 1j * (epsilon - mu)) / (2.0 * np.pi * temperature)
    return 0.5 - psi(z).imag / np.pi


def _fermi_complex(z, mu, temperature):
    return 1.0 / (np.exp((z - mu) / temperature) + 1.0)


def transient_matsubara(t, epsilon, mu, gamma, temperature, p0=0.0, terms=4000):
    """
    Exact occupation from the residue expansion of
    J = int f(omega) e^{i(omega-eps)t} / (Gamma^2 + 4(omega-eps)^2) d omega
    closed in the upper half plane. Converges quickly once T*t >= 0.1.
    """
    c = mu - epsilon
    nu = np.pi * temperature * (2 * np.arange(terms) + 1)
    x = c + 1j * nu
    lorentz = 1.0 / (gamma ** 2 + 4.0 * x ** 2)
    j = (np.pi / (2.0 * gamma)) * np.exp(-gamma * t / 2.0) * _fermi_complex(
        epsilon + 0.5j * gamma, mu, temperature)
    j -= 2j * np.pi * temperature * np.sum(lorentz * np.exp(1j * x * t))

    p_s = steady_digamma(epsilon, mu, gamma, temperature)
    steady_part = (1.0 + np.exp(-gamma * t)) * np.pi * p_s / (2.0 * gamma)
    integral = steady_part - 2.0 * np.exp(-gamma * t / 2.0) * j.real
    return np.exp(-gamma * t) * p0 + (2.0 * gamma / np.pi) * integral


def transient_dT_simpson(t, epsilon, mu, gamma, temperature, points=400001):
    """dp1/dT on a fixed grid over mu +- 50T (df/dT vanishes outside)."""
    omega = np.linspace(mu - 50.0 * temperature, mu + 50.0 * temperature, points)
    x = (omega - mu) / temperature
    dfdT = (x / temperature) * np.exp(-np.logaddexp(0.0, x) - np.logaddexp(0.0, -x))
    shift = omega - epsilon
    weight = (1.0 - 2.0 * np.exp(-gamma * t / 2.0) * np.cos(shift * t) + np.exp(-gamma * t)) \
        / (gamma ** 2 + 4.0 * shift ** 2)
    return (2.0 * gamma / np.pi) * simpson(dfdT * weight, x=omega)


def _simpson_segment(func, a, b, step):
    intervals = 2 * int(np.ceil((b - a) / (2.0 * step)))
    omega = np.linspace(a, b, intervals + 1)
    return simpson(func(omega), x=omega)


def transient_simpson(t, epsilon, mu, gamma, temperature, p0=0.0, far=4000.0):
    """
    Exact occupation on fixed Simpson grids: a fine grid over the thermal window
    and the Lorentzian peak, a coarser one down to eps - far, and the two leading
    integration-by-parts terms below that, where f = 1.
    """
    decay = np.exp(-gamma * t)
    ring = 2.0 * np.exp(-gamma * t / 2.0)

    def integrand(omega):
        shift = omega - epsilon
        weight = (1.0 - ring * np.cos(shift * t) + decay) / (gamma ** 2 + 4.0 * shift ** 2)
        return expit(-(omega - mu) / temperature) * weight

    inner_left = min(epsilon - 50.0, mu - 50.0 * temperature)
    inner_right = max(mu + 50.0 * temperature, epsilon + 50.0)
    total = _simpson_segment(integrand, inner_left, inner_right, 5e-4)
    total += _simpson_segment(integrand, epsilon - far, inner_left, 0.02 / max(t, 1.0))

    u = -far
    g = 1.0 / (gamma ** 2 + 4.0 * u ** 2)
    dg = -8.0 * u * g ** 2
    total += (1.0 + decay) * np.arctan(gamma / (2.0 * far)) / (2.0 * gamma)
    total -= ring * (np.sin(u * t) * g / t + np.cos(u * t) * dg / t ** 2)
    return decay * p0 + (2.0 * gamma / np.pi) * total
