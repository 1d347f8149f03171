#!/usr/bin/env python3
"""Benchmark the scorer kernels: numba @njit vs pure numpy.

Times the forward pass and the fused loss-gradient kernel on the batch
sizes that matter in practice: the training mini-batch (32) and a full
evaluation sweep (8192). The numba backend pays a one-off JIT cost on
first call (excluded by warmup), then wins on small batches where
per-call numpy dispatch overhead dominates.

Run: python benchmarks/bench_backends.py
"""

import time

import numpy as np

from poai.scorer import kernels_numba, kernels_numpy
from poai.scorer.model import init_model, kernel_params

BACKENDS = {"numpy": kernels_numpy, "numba": kernels_numba}
BATCH_SIZES = (32, 1024, 8192)
TARGET_SECONDS = 0.4


def _timeit(fn, *args) -> tuple[float, int]:
    fn(*args)  # warmup (includes JIT compilation for numba)
    reps = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        elapsed = time.perf_counter() - t0
        if elapsed > TARGET_SECONDS or reps >= 1 << 20:
            return elapsed / reps, reps
        reps *= 4


def main() -> None:
    rng = np.random.default_rng(0)
    params = kernel_params(init_model(0))

    print(f"{'kernel':<16} {'batch':>6} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for batch in BATCH_SIZES:
        x = rng.uniform(0.0, 1.0, (batch, 3, 3))
        t = rng.uniform(0.0, 1.0, batch)
        for label, args in (("forward", (x,) + params), ("mse_and_grads", (x, t) + params)):
            per_call = {}
            for name, mod in BACKENDS.items():
                per_call[name], _ = _timeit(getattr(mod, label), *args)
            speedup = per_call["numpy"] / per_call["numba"]
            print(
                f"{label:<16} {batch:>6} {per_call['numpy'] * 1e6:>10.1f}us "
                f"{per_call['numba'] * 1e6:>10.1f}us {speedup:>7.1f}x"
            )

    # agreement spot check: the backends must match to float64 round-off
    x = rng.uniform(0.0, 1.0, (256, 3, 3))
    t = rng.uniform(0.0, 1.0, 256)
    a = kernels_numpy.mse_and_grads(x, t, *params)
    b = kernels_numba.mse_and_grads(x, t, *params)
    worst = max(float(np.max(np.abs(np.asarray(u) - np.asarray(v)))) for u, v in zip(a, b))
    print(f"\nmax |numpy - numba| over loss and gradients: {worst:.3e}")


if __name__ == "__main__":
    main()
