#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the four hot kernels on representative workloads and prints a
table with per-backend wall times and the speedup.  The numba pass
includes an untimed warmup call so JIT compilation does not pollute the
numbers.
"""

import time

import numpy as np

from salz.kernels import load_backend
from salz.models import ThreeLevelModel

BACKENDS = ("numpy", "numba")


def timeit(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(200_000, 3, 3)) + 1j * rng.normal(size=(200_000, 3, 3))
    hs = np.ascontiguousarray((a + a.conj().transpose(0, 2, 1)) / 2.0)

    model = ThreeLevelModel(epsilon=15.0, alpha=1.0, delta=0.5)
    b0, b1 = model.sweep_matrices()
    taus = np.ascontiguousarray(np.linspace(-65.0, 65.0, 200_000))

    sweep = ThreeLevelModel(epsilon=50.0, alpha=1.0, delta=1.0)
    s0, s1 = sweep.sweep_matrices()
    z = np.zeros((3, 3), np.complex128)
    cp = np.array([sweep.epsilon, sweep.alpha, sweep.beta, sweep.delta, 0.0])
    w, v = np.linalg.eigh(s0 - 100.0 * s1)
    psi0 = np.ascontiguousarray(v[:, 0])
    nsteps = 500_000
    dt = 200.0 / nsteps

    states_grid = np.ascontiguousarray(
        (lambda r: r / np.linalg.norm(r, axis=1)[:, None])(
            rng.normal(size=(200_000, 3)) + 1j * rng.normal(size=(200_000, 3))))

    def make(backend):
        k = load_backend(backend)
        return {
            "eigh_grid (200k 3x3)": lambda: k.eigh_grid(hs),
            "cd_grid (200k points)": lambda: k.cd_grid(b0, b1, taus, 1e-9),
            "evolve (500k CF4 steps)": lambda: k.evolve_kernel(
                s0, s1, z, z, 0.0, 2, cp, psi0, -100.0, dt, nsteps, 125, 1e-9),
            "overlap series (200k)": lambda: k.overlap_deficit_kernel(
                b0, b1, taus, states_grid, 0),
        }

    return make


def main():
    make = workloads()
    rows = {}
    for backend in BACKENDS:
        try:
            jobs = make(backend)
        except ImportError:
            print(f"backend {backend} unavailable; skipping")
            continue
        for name, fn in jobs.items():
            fn()  # warmup (JIT compile on the numba path)
            rows.setdefault(name, {})[backend] = timeit(fn)

    width = max(len(n) for n in rows)
    print(f"{'kernel':<{width}}  {'numpy [s]':>10}  {'numba [s]':>10}  {'speedup':>8}")
    for name, t in rows.items():
        tnp = t.get("numpy", float("nan"))
        tnb = t.get("numba", float("nan"))
        print(f"{name:<{width}}  {tnp:>10.3f}  {tnb:>10.3f}  {tnp / tnb:>7.1f}x")


if __name__ == "__main__":
    main()
