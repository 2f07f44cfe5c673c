#!/usr/bin/env python3
"""Benchmark the compiled integration kernel against the pure-Python fallback.

Both kernels implement the identical Dormand-Prince 5(4) stepper; this script
times them on the reference models and checks that they produce the same
trajectories.  Run after `pip install -e . --no-build-isolation`:

    python benchmarks/kernel_benchmark.py
"""

import time

import numpy as np

from hpaxis import integrate, reference
from hpaxis.dynamics import HAVE_COMPILED


def best_of(n, fn):
    times = []
    for _ in range(n):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    if not HAVE_COMPILED:
        print("compiled kernel not available; build the extension first")
        return

    cases = [
        ("classic 24h",
         reference.classic_model(), (0.001, 6.0, 2.0), 1440.0, 1e-9, 1e-12),
        ("extended 24h",
         reference.extended_model(), (0.001, 6.0, 2.0), 1440.0, 1e-9, 1e-12),
        ("extended 96h",
         reference.extended_model(), (0.001, 6.0, 2.0), 5760.0, 1e-9, 1e-12),
        ("extended 24h loose",
         reference.extended_model(), (0.001, 6.0, 2.0), 1440.0, 1e-6, 1e-9),
    ]
    print(f"{'case':22s} {'compiled':>10s} {'python':>10s} {'speedup':>8s} {'steps':>7s}  identical")
    for name, model, x0, t_end, rtol, atol in cases:
        run_c = lambda: integrate(model, x0, t_end, rtol=rtol, atol=atol, backend="compiled")
        run_p = lambda: integrate(model, x0, t_end, rtol=rtol, atol=atol, backend="python")
        tc = best_of(3, run_c)
        tp = best_of(3, run_p)
        a, b = run_c(), run_p()
        same = np.array_equal(a.times, b.times) and np.array_equal(a.states, b.states)
        print(f"{name:22s} {tc * 1e3:8.1f}ms {tp * 1e3:8.1f}ms {tp / tc:7.1f}x {a.accepted_steps:7d}  {same}")


if __name__ == "__main__":
    main()
