"""Pure NumPy split-operator kernel (fallback for the compiled ``_split``).

Each composed stage of length ``h`` applies

    exp(-i K h/2) R_even(h/2) R_odd(h) R_even(h/2) exp(-i K h/2)

where ``K`` is the kinetic diagonal and ``R_even`` / ``R_odd`` are the exact
exponentials of the ``cos(theta)`` coupling restricted to the disjoint
``(J, J+1)`` pairs starting at even / odd basis index.  Every factor is
unitary, so the norm is preserved to rounding.  Adjacent kinetic half steps
are merged.
"""

import numpy as np


def kinetic_phases(kinetic, stage_dt):
    """Phase vectors for first, merged-inner, wrap-around and last kinetic steps."""
    h = np.asarray(stage_dt, dtype=np.float64)
    S = h.size
    first = np.exp(-0.5j * kinetic * h[0])
    inner = [np.exp(-0.5j * kinetic * (h[s] + h[s + 1])) for s in range(S - 1)]
    wrap = np.exp(-0.5j * kinetic * (h[-1] + h[0]))
    last = np.exp(-0.5j * kinetic * h[-1])
    return first, inner, wrap, last


def _rotate(psi, coupling, parity, theta_scale):
    # exp(+i a C h sigma_x) on the pairs (j, j+1), j = parity, parity+2, ...
    n = psi.shape[0]
    npairs = (n - parity) // 2
    if npairs == 0:
        return
    stop = parity + 2 * npairs
    theta = theta_scale * coupling[parity:stop:2]
    c = np.cos(theta)[:, None]
    s = 1j * np.sin(theta)[:, None]
    x = psi[parity:stop:2]
    y = psi[parity + 1 : stop : 2]
    x_new = c * x + s * y
    y *= c
    y += s * x
    x[...] = x_new


def split_propagate(psi, kinetic, coupling, stage_dt, amps):
    """Advance the columns of ``psi`` in place.

    Parameters
    ----------
    psi : complex128 array, shape (n, k)
        Column states, modified in place.
    kinetic : float64 array, shape (n,)
    coupling : float64 array, shape (n - 1,)
    stage_dt : float64 array, shape (S,)
        Lengths of the composed stages within one step.
    amps : float64 array, shape (nsteps, S)
        Field value ``a(tau)`` at the midpoint of each stage.
    """
    amps = np.asarray(amps, dtype=np.float64)
    nsteps, S = amps.shape
    if nsteps == 0:
        return psi
    first, inner, wrap, last = kinetic_phases(kinetic, stage_dt)
    psi *= first[:, None]
    for step in range(nsteps):
        for s in range(S):
            ah = amps[step, s] * stage_dt[s]
            _rotate(psi, coupling, 0, 0.5 * ah)
            _rotate(psi, coupling, 1, ah)
            _rotate(psi, coupling, 0, 0.5 * ah)
            if s < S - 1:
                psi *= inner[s][:, None]
            elif step < nsteps - 1:
                psi *= wrap[:, None]
    psi *= last[:, None]
    return psi
