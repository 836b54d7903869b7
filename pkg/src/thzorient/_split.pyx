# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split-operator kernel; same contract as ``_split_py.split_propagate``."""

import numpy as np
from libc.math cimport cos, sin


cdef inline void _rotate(double[:, ::1] z, const double[::1] coupling,
                         Py_ssize_t parity, double theta_scale,
                         Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    # z holds interleaved (re, im) columns: row j is z[j, 0:2k]
    cdef Py_ssize_t j, c
    cdef double th, cs, sn, xr, xi, yr, yi
    j = parity
    while j + 1 < n:
        th = theta_scale * coupling[j]
        cs = cos(th)
        sn = sin(th)
        for c in range(k):
            xr = z[j, 2 * c]
            xi = z[j, 2 * c + 1]
            yr = z[j + 1, 2 * c]
            yi = z[j + 1, 2 * c + 1]
            z[j, 2 * c] = cs * xr - sn * yi
            z[j, 2 * c + 1] = cs * xi + sn * yr
            z[j + 1, 2 * c] = cs * yr - sn * xi
            z[j + 1, 2 * c + 1] = cs * yi + sn * xr
        j += 2


cdef inline void _phase(double[:, ::1] z, const double[::1] pr, const double[::1] pi,
                        Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t j, c
    cdef double xr, xi, a, b
    for j in range(n):
        a = pr[j]
        b = pi[j]
        for c in range(k):
            xr = z[j, 2 * c]
            xi = z[j, 2 * c + 1]
            z[j, 2 * c] = xr * a - xi * b
            z[j, 2 * c + 1] = xr * b + xi * a


def split_propagate(psi, kinetic, coupling, stage_dt, amps):
    """Advance the columns of ``psi`` (complex128, C-contiguous, shape (n, k)) in place."""
    if psi.dtype != np.complex128 or not psi.flags.c_contiguous:
        raise TypeError("psi must be a C-contiguous complex128 array")
    cdef double[:, ::1] z = psi.view(np.float64)
    cdef const double[::1] K = np.ascontiguousarray(kinetic, dtype=np.float64)
    cdef const double[::1] C = np.ascontiguousarray(coupling, dtype=np.float64)
    cdef const double[::1] h = np.ascontiguousarray(stage_dt, dtype=np.float64)
    cdef const double[:, ::1] a = np.ascontiguousarray(amps, dtype=np.float64)
    cdef Py_ssize_t n = psi.shape[0], k = psi.shape[1]
    cdef Py_ssize_t nsteps = a.shape[0], S = a.shape[1]
    cdef Py_ssize_t step, s
    cdef double ah
    if nsteps == 0:
        return psi
    if h.shape[0] != S:
        raise ValueError("stage_dt and amps disagree on the number of stages")

    # rows: 0 = first half, 1..S-1 = merged inner, S = wrap-around, S+1 = last half
    Karr = np.asarray(K)
    harr = np.asarray(h)
    widths = np.empty(S + 2)
    widths[0] = 0.5 * harr[0]
    for s in range(S - 1):
        widths[s + 1] = 0.5 * (harr[s] + harr[s + 1])
    widths[S] = 0.5 * (harr[S - 1] + harr[0])
    widths[S + 1] = 0.5 * harr[S - 1]
    ang = -np.outer(widths, Karr)
    cdef const double[:, ::1] pr = np.ascontiguousarray(np.cos(ang))
    cdef const double[:, ::1] pi = np.ascontiguousarray(np.sin(ang))

    with nogil:
        _phase(z, pr[0], pi[0], n, k)
        for step in range(nsteps):
            for s in range(S):
                ah = a[step, s] * h[s]
                _rotate(z, C, 0, 0.5 * ah, n, k)
                _rotate(z, C, 1, ah, n, k)
                _rotate(z, C, 0, 0.5 * ah, n, k)
                if s < S - 1:
                    _phase(z, pr[s + 1], pi[s + 1], n, k)
                elif step < nsteps - 1:
                    _phase(z, pr[S], pi[S], n, k)
        _phase(z, pr[S + 1], pi[S + 1], n, k)
    return psi
