#!/usr/bin/env python3
"""Throughput comparison of the compiled and NumPy annealing kernels.

Runs identical pre-drawn workloads through both backends, checks the outputs
are bit-identical, and reports steps/second. Usage:

    python benchmarks/kernel_benchmark.py [--n 13] [--batch 100] [--steps 20000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from skbench import _kernels_py
from skbench.classical import AnnealSchedule
from skbench.model import bits_to_spins, generate_instance

try:
    from skbench import _kernels
except ImportError:
    _kernels = None


def make_workload(n: int, batch: int, steps: int, seed: int):
    inst = generate_instance(n, seed)
    rng = np.random.default_rng(seed)
    starts = rng.integers(0, 1 << n, size=batch, dtype=np.uint64)
    bit_draws = rng.integers(0, n, size=(batch, steps), dtype=np.int64)
    log_u = np.log(rng.random((batch, steps)))
    betas = AnnealSchedule(total_steps=steps).step_betas()
    return inst, starts, bit_draws, log_u, betas


def run_backend(impl, inst, starts, bit_draws, log_u, betas):
    w32 = inst.w.astype(np.int32)
    spins = bits_to_spins(starts, inst.n)
    fields = np.ascontiguousarray(spins.astype(np.int32) @ w32)
    energies = (spins.astype(np.int64) * fields).sum(axis=1)
    begin = time.perf_counter()
    impl.mh_steps(w32, spins, fields, energies, bit_draws, log_u, betas)
    elapsed = time.perf_counter() - begin
    return spins, energies, elapsed


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=13)
    parser.add_argument("--batch", type=int, default=100)
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    workload = make_workload(args.n, args.batch, args.steps, args.seed)
    total = args.batch * args.steps

    spins_py, energies_py, t_py = run_backend(_kernels_py, *workload)
    print(f"python   backend: {t_py:8.3f} s  ({total / t_py:12.0f} steps/s)")

    if _kernels is None:
        print("compiled backend: not built (pip install -e . rebuilds it)")
        return 0

    spins_c, energies_c, t_c = run_backend(_kernels, *workload)
    print(f"compiled backend: {t_c:8.3f} s  ({total / t_c:12.0f} steps/s)")
    identical = np.array_equal(spins_py, spins_c) and np.array_equal(
        energies_py, energies_c
    )
    print(f"outputs bit-identical: {identical}")
    print(f"speedup: {t_py / t_c:.1f}x")
    return 0 if identical else 1


if __name__ == "__main__":
    raise SystemExit(main())
