"""Independent reference computations used only by the tests."""

import math

import numpy as np
from scipy import integrate, special
from scipy.linalg import expm


def legendre_coupling(J, M):
    """<J+1,M|cos theta|J,M> by quadrature over normalised associated Legendre functions."""

    def theta(l, x):
        return special.lpmv(M, l, x)

    def norm(l):
        val, _ = integrate.quad(lambda x: theta(l, x) ** 2, -1, 1, epsabs=1e-14, epsrel=1e-13)
        return math.sqrt(val)

    val, _ = integrate.quad(
        lambda x: theta(J + 1, x) * x * theta(J, x), -1, 1, epsabs=1e-14, epsrel=1e-13
    )
    # Condon-Shortley phases cancel in the product of equal-M functions
    return abs(val / (norm(J) * norm(J + 1)))


def _shape(tau, F, D):
    return np.where(np.abs(tau) <= D / 2, np.cos(np.pi * tau / D) ** 2 * np.sin(2 * np.pi * F * tau), 0.0)


def _dense_ops(Jmin, Jmax, M):
    J = np.arange(Jmin, Jmax + 1, dtype=float)
    K = np.diag(J * (J + 1))
    Jl = J[:-1]
    c = np.sqrt(((Jl + 1) ** 2 - M * M) / ((2 * Jl + 1) * (2 * Jl + 3)))
    return K, np.diag(c, 1) + np.diag(c, -1)


def magnus_propagate(psi0, M, Jmax, A, F, D, n_steps):
    """Fourth-order Magnus (two Gauss nodes) with dense matrix exponentials."""
    K, Cm = _dense_ops(abs(M), Jmax, M)
    h = D / n_steps
    psi = np.array(psi0, dtype=complex)
    g = math.sqrt(3) / 6
    for k in range(n_steps):
        tm = -D / 2 + (k + 0.5) * h
        H1 = K - A * _shape(tm - g * h, F, D) * Cm
        H2 = K - A * _shape(tm + g * h, F, D) * Cm
        omega = -0.5j * h * (H1 + H2) + (math.sqrt(3) / 12) * h * h * (H1 @ H2 - H2 @ H1)
        psi = expm(omega) @ psi
    return psi


def time_ordered_oracle(psi0, M, Jmax, A, F, D, n_steps=256, tol=1e-12, max_halvings=6):
    """Halve the Magnus step until two successive results agree to ``tol``."""
    prev = magnus_propagate(psi0, M, Jmax, A, F, D, n_steps)
    for _ in range(max_halvings):
        n_steps *= 2
        cur = magnus_propagate(psi0, M, Jmax, A, F, D, n_steps)
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur
    raise RuntimeError("oracle did not converge")


def analytic_spectrum(A, F, D, nu):
    """|FT| of A cos^2(pi t/D) sin(2 pi F t) on [-D/2, D/2] via the sinc decomposition."""
    nu = np.asarray(nu, dtype=float)
    L = D / 2

    def I(w):  # integral of cos(w t) over [0, L]
        return L * np.sinc(w * L / np.pi)

    k = 2 * np.pi / D
    u = 2 * np.pi * (F - nu)
    v = 2 * np.pi * (F + nu)
    half = 0.25 * (I(u) - I(v)) + 0.125 * (I(u + k) + I(u - k) - I(v + k) - I(v - k))
    return np.abs(2 * A * half)


def thermal_double_loop(values, T_tilde, J0max, Z):
    """Thermal sum written out over J0 and every M0 = -J0..J0 (values keyed by (J0, |M0|))."""
    total = 0.0
    for J0 in range(J0max + 1):
        c = math.exp(-J0 * (J0 + 1) / T_tilde) if T_tilde > 0 else float(J0 == 0)
        for M0 in range(-J0, J0 + 1):
            total += c * values[(J0, abs(M0))]
    return total / Z
