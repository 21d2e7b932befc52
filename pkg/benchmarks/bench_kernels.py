#!/usr/bin/env python3
"""Throughput benchmark: numba vs numpy generator-application kernels.

The generator right-hand side is the innermost operation of every
Runge-Kutta isochore, so its throughput bounds the whole simulator when
the dense-exponential path is out of reach.  Run with

    python benchmarks/bench_kernels.py [--dims 18 32 50 162] [--repeats 200]

Both backends are timed in-process (the numba path is skipped when numba
is unavailable), and agreement between them is checked first.
"""

import argparse
import time

import numpy as np

from otto_rc import kernels


def make_problem(rng, d, n_lind=2):
    def cmat():
        return np.ascontiguousarray(
            rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        )

    x = cmat()
    rho = x @ x.conj().T
    rho /= np.trace(rho).real
    W = cmat()
    A = cmat()
    A = np.ascontiguousarray(A + A.conj().T)
    B1, B2 = cmat(), cmat()
    Ls = np.ascontiguousarray(np.stack([cmat() for _ in range(n_lind)]))
    cs = np.ascontiguousarray(rng.uniform(0.1, 1.0, n_lind))
    K = sum(c * L.conj().T @ L for c, L in zip(cs, Ls))
    K = np.ascontiguousarray(K)
    return rho, W, True, A, B1, B2, n_lind, Ls, cs, K


def bench(fn, args, repeats):
    fn(*args)  # warm up (numba compilation, caches)
    t0 = time.perf_counter()
    for _ in range(repeats):
        out = fn(*args)
    dt = (time.perf_counter() - t0) / repeats
    return dt, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dims", type=int, nargs="+", default=[18, 32, 50, 162])
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    backends = [("numpy", kernels._rhs_numpy)]
    if kernels._HAVE_NUMBA:
        backends.append(("numba", kernels._rhs_numba))
    else:
        print("numba unavailable; benchmarking the numpy fallback only")
    print(f"active backend for the package: {kernels.backend_name()}")

    rng = np.random.default_rng(args.seed)
    header = f"{'dim':>5} " + "".join(f"{name + ' us/call':>16}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for d in args.dims:
        problem = make_problem(rng, d)
        times, outs = [], []
        for _, fn in backends:
            dt, out = bench(fn, problem, args.repeats)
            times.append(dt)
            outs.append(out)
        if len(outs) == 2:
            gap = np.max(np.abs(outs[0] - outs[1])) / np.max(np.abs(outs[0]))
            assert gap < 1e-12, f"backends disagree at dim {d}: {gap:.2e}"
        line = f"{d:>5} " + "".join(f"{dt * 1e6:>16.1f}" for dt in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>10.2f}x"
        print(line)


if __name__ == "__main__":
    main()
