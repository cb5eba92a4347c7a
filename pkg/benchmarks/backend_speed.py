#!/usr/bin/env python3
"""Speed comparison: numba-jitted contraction kernels vs the numpy fallback.

Times the raw batched mode contraction and a short end-to-end solve under
each backend. Run from the repo root:

    python benchmarks/backend_speed.py
"""

import time

import numpy as np

import ml0
from ml0 import kernels
from ml0.model import grad_direction_batch, margin_batch


def time_call(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(backend, n=400, rows=60, cols=60):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((n, rows, cols))
    w1 = rng.standard_normal(rows)
    w2 = rng.standard_normal(cols)
    kernels.set_backend(backend)
    grad_direction_batch(X, [w1, w2], 0)  # warm up (JIT compile)
    return {
        "margins": time_call(lambda: margin_batch(X, [w1, w2], 0.0)),
        "grad_dir": time_call(lambda: grad_direction_batch(X, [w1, w2], 0)),
    }


def bench_solve(backend, iters=300):
    ds, _ = ml0.generate_synthetic(
        ml0.SyntheticConfig(rows=30, cols=30, block=5, per_class=100, margin=0.5, seed=0)
    )
    train, _ = ml0.split(ds, 0.8, seed=0)
    problem = ml0.Problem(ridge=(2e-4, 2e-4), sparsity=(9, 9), gamma=1.5)
    init = ml0.random_init(train.feature_dims, problem.sparsity, seed=0)
    config = ml0.SolverConfig(
        max_iters=iters, max_seconds=600.0, tol_obj=1e-300, tol_grad=1e-300
    )
    kernels.set_backend(backend)
    ml0.run(problem, train, init, ml0.SolverConfig(max_iters=2))  # warm up
    t0 = time.perf_counter()
    result = ml0.run(problem, train, init, config)
    dt = time.perf_counter() - t0
    return dt, len(result.trace)


def main():
    default = kernels.get_backend()
    backends = kernels.available_backends()
    print(f"available backends: {backends} (default: {default})")

    print("\nbatched contraction kernels, 400 samples of 60x60:")
    rows = {b: bench_kernels(b) for b in backends}
    for op in ("margins", "grad_dir"):
        parts = ", ".join(f"{b}: {rows[b][op] * 1e3:8.3f} ms" for b in backends)
        print(f"  {op:10s} {parts}")

    print("\nend-to-end solve, 160 train samples of 30x30, 300 iterations:")
    for b in backends:
        dt, iters = bench_solve(b)
        print(f"  {b:6s} {dt:6.2f} s  ({dt / iters * 1e3:.2f} ms/iter)")

    kernels.set_backend(default)


if __name__ == "__main__":
    main()
