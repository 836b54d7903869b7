import numpy as np
import pytest

from thzorient import kernels
from thzorient.propagator import SUZUKI4

BACKENDS = sorted(kernels.KERNELS)


def _problem(n=40, k=5, steps=50, seed=0):
    rng = np.random.default_rng(seed)
    J = np.arange(n, dtype=float)
    K = J * (J + 1)
    C = np.sqrt((J[:-1] + 1) ** 2 / ((2 * J[:-1] + 1) * (2 * J[:-1] + 3)))
    psi = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    psi /= np.linalg.norm(psi, axis=0)
    amps = rng.normal(scale=20.0, size=(steps, SUZUKI4.size))
    return psi, K, C, SUZUKI4 * 0.01, amps


@pytest.mark.parametrize("backend", BACKENDS)
def test_norm_preserved(backend):
    psi, K, C, dt, amps = _problem()
    kernels.split_propagate(psi, K, C, dt, amps, backend=backend)
    np.testing.assert_allclose(np.linalg.norm(psi, axis=0), 1.0, atol=1e-13)


@pytest.mark.skipif("cython" not in kernels.KERNELS, reason="extension not built")
@pytest.mark.parametrize("n", [1, 2, 3, 17, 64])
def test_backends_agree(n):
    psi, K, C, dt, amps = _problem(n=n, k=3, steps=30)
    a, b = psi.copy(), psi.copy()
    kernels.split_propagate(a, K, C, dt, amps, backend="python")
    kernels.split_propagate(b, K, C, dt, amps, backend="cython")
    np.testing.assert_allclose(a, b, atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_field_is_exact_free_phase(backend):
    psi, K, C, dt, amps = _problem(steps=20)
    start = psi.copy()
    kernels.split_propagate(psi, K, C, dt, np.zeros_like(amps), backend=backend)
    total = 20 * dt.sum()
    np.testing.assert_allclose(psi, np.exp(-1j * K * total)[:, None] * start, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_kinetic_gauge_shift_is_global_phase(backend):
    psi, K, C, dt, amps = _problem(steps=25)
    a, b = psi.copy(), psi.copy()
    shift = 7.3
    kernels.split_propagate(a, K, C, dt, amps, backend=backend)
    kernels.split_propagate(b, K + shift, C, dt, amps, backend=backend)
    phase = np.exp(-1j * shift * 25 * dt.sum())
    np.testing.assert_allclose(b, phase * a, atol=1e-12)
    # observables are gauge invariant
    qa = np.conj(a[:-1]) * a[1:]
    qb = np.conj(b[:-1]) * b[1:]
    np.testing.assert_allclose(qa, qb, atol=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError, match="not available"):
        kernels.get_kernel("fortran")



def test_environment_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, THZORIENT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from thzorient import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == "python"
