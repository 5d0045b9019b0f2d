"""Independent reference computations used to check the library paths.

Nothing here calls into the code under test except for plain data access.
"""

import math

import numpy as np
import scipy.linalg as sla


def naive_sliced_product(h, observables, p, T, steps):
    """Time-ordered midpoint product built slice by slice with scipy expm."""
    dt = T / steps
    u = np.eye(h.shape[0], dtype=complex)
    for k in range(steps):
        t = (k + 0.5) * dt
        rot = sla.expm(1j * t * h)
        g = sum(pa * rot @ a @ rot.conj().T for pa, a in zip(p, observables)) / T
        u = sla.expm(-1j * dt * g) @ u
    return u


def interaction_picture_unitary(h, observables, p, T):
    """Exact time-ordered exponential: exp(iHT) exp(-i(HT + sum p A))."""
    k = sum(pa * a for pa, a in zip(p, observables))
    return sla.expm(1j * T * h) @ sla.expm(-1j * (T * h + k))


def gaussian_mixture_bruteforce(weights, centers, sigma, x):
    """Density of a 1-D mixture evaluated point by point with math.exp."""
    out = []
    for xi in x:
        total = 0.0
        for w, c in zip(weights, centers):
            total += w * math.exp(-0.5 * ((xi - c) / sigma) ** 2) / (math.sqrt(2 * math.pi) * sigma)
        out.append(total)
    return np.array(out)


def box_integral(f, lows, highs, n):
    """Tensor-product trapezoid integral of a vectorized f over a box."""
    axes = [np.linspace(lo, hi, n) for lo, hi in zip(lows, highs)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = f(mesh)
    for ax in reversed(axes):
        vals = np.trapezoid(vals, ax, axis=-1)
    return float(vals)


def momentum_density_by_fourier(delta_x, p, n=4001, span=12.0):
    """|phi(p)|^2 with phi(p) = (2 pi)^(-1/2) int psi(x) e^{-ipx} dx by quadrature."""
    x = np.linspace(-span * delta_x, span * delta_x, n)
    psi = (2 * math.pi * delta_x**2) ** -0.25 * np.exp(-(x**2) / (4 * delta_x**2))
    phase = np.exp(-1j * np.outer(p, x))
    phi = np.trapezoid(psi * phase, x, axis=1) / math.sqrt(2 * math.pi)
    return np.abs(phi) ** 2


def time_average_by_quadrature(elem, bohr, T, n=20001):
    """(1/T) int_0^T elem e^{i bohr t} dt by trapezoid."""
    t = np.linspace(0.0, T, n)
    return elem * np.trapezoid(np.exp(1j * bohr * t), t) / T
