"""Compare the numba and numpy training backends on the BC workload.

Usage: python3 benchmarks/bench_train.py [--epochs N] [--repeats K]

Times the raw SGD epoch loop (the hot kernel) on both domains' training
sets and reports per-backend wall time plus the numerical gap between the
resulting weights.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cfadapt.harness import gen_train_task
from cfadapt.policy import architecture_for, init
from cfadapt.policy.kernels import run_epochs
from cfadapt.policy.training import dataset_from_demos


def bench(domain: str, epochs: int, repeats: int) -> None:
    task = gen_train_task(domain, 0)
    x, y, _ = dataset_from_demos(task.demos)
    params = init(architecture_for(domain), 0)
    rng = np.random.default_rng(0)
    perms = np.ascontiguousarray(
        np.stack([rng.permutation(x.shape[0]) for _ in range(epochs)]).astype(np.int64)
    )

    print(f"\n{domain}: {x.shape[0]} samples x {x.shape[1]} features, {epochs} epochs")
    results = {}
    for backend in ("numpy", "numba"):
        # warm-up run compiles the numba kernels outside the timed region
        tensors = tuple(np.ascontiguousarray(t.copy()) for t in params.tensors())
        run_epochs(params.arch.head, x, y, tensors, perms[:1], 32, 0.02, backend=backend)
        times = []
        for _ in range(repeats):
            tensors = tuple(np.ascontiguousarray(t.copy()) for t in params.tensors())
            start = time.perf_counter()
            run_epochs(params.arch.head, x, y, tensors, perms, 32, 0.02, backend=backend)
            times.append(time.perf_counter() - start)
        results[backend] = (min(times), tensors)
        print(f"  {backend:>6}: best of {repeats}: {min(times) * 1e3:8.1f} ms")
    speedup = results["numpy"][0] / results["numba"][0]
    gap = max(
        float(np.abs(a - b).max())
        for a, b in zip(results["numpy"][1], results["numba"][1])
    )
    print(f"  numba speedup: {speedup:.1f}x; max weight gap: {gap:.2e}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    for domain in ("nav2d", "doorkey"):
        bench(domain, args.epochs, args.repeats)


if __name__ == "__main__":
    main()
