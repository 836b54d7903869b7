"""Time the compiled and NumPy split-step kernels on the same workload.

    python3 benchmarks/bench_kernels.py --dim 120 --columns 60 --steps 400
"""

import argparse
import time

import numpy as np

from thzorient import kernels
from thzorient.field import PulseShape
from thzorient.propagator import PropagationConfig, propagate_ensemble, stage_schedule
from thzorient.rotor import BasisSpec, coupling_vector, kinetic_diagonal
from thzorient.units import ReducedParams


def kernel_workload(dim, columns, steps):
    basis = BasisSpec(0, dim - 1)
    K, C = kinetic_diagonal(basis), coupling_vector(basis)
    stage_dt, amps = stage_schedule(PulseShape(20.0, 2.0, 1.0), steps)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=(dim, columns)) + 1j * rng.normal(size=(dim, columns))
    return psi / np.linalg.norm(psi, axis=0), K, C, stage_dt, amps


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=120)
    ap.add_argument("--columns", type=int, default=60)
    ap.add_argument("--steps", type=int, default=400)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--ensemble", action="store_true",
                    help="also time a full thermal ensemble (A=4, F=2, D=1, Ttilde=50)")
    args = ap.parse_args()

    psi0, K, C, dt, amps = kernel_workload(args.dim, args.columns, args.steps)
    results = {}
    for name in sorted(kernels.KERNELS):
        fn = kernels.KERNELS[name]
        out = psi0.copy()
        results[name] = best_of(lambda: fn(out, K, C, dt, amps), args.repeat)
        print(f"kernel {name:7s} {results[name] * 1e3:9.2f} ms  "
              f"({args.dim} levels x {args.columns} columns x {args.steps} steps)")
    if "cython" in results:
        a, b = psi0.copy(), psi0.copy()
        kernels.KERNELS["python"](a, K, C, dt, amps)
        kernels.KERNELS["cython"](b, K, C, dt, amps)
        print(f"speed-up {results['python'] / results['cython']:.1f}x, "
              f"max deviation {np.max(np.abs(a - b)):.1e}")

    if args.ensemble:
        p = ReducedParams(4.0, 2.0, 1.0, 50.0)
        for name in sorted(kernels.KERNELS):
            cfg = PropagationConfig(backend=name)
            t = best_of(lambda: propagate_ensemble(p, cfg), 1)
            print(f"ensemble {name:7s} {t:7.2f} s")


if __name__ == "__main__":
    main()
