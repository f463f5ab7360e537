#!/usr/bin/env python3
"""Benchmark the JIT event-loop kernels against the numpy fallback.

Runs the bit-level coupling simulation on both backends over a few
workload shapes and prints events/second and the speedup.  The JIT
backend pays a one-time compilation cost (absorbed by a warmup run and
cached on disk afterwards); the numpy backend trades per-event cost for
O(replicas * n) memory.

Usage: python benchmarks/bench_backends.py [--replicas N]
"""

import argparse
import time

import numpy as np

from hqc.backend import get_kernels
from hqc.engine import _kernel_inputs, canonical_pair
from hqc.strategy import ParametricStrategy, params_from_rule

WORKLOADS = [
    # (label, n, k0, (u_odd, u_even, b), t_max)
    ("optimal n=10 k=10", 10, 10, (1.0, 0.0, 0.0), 10.0),
    ("optimal n=64 k=64", 64, 64, (1.0, 0.0, 0.0), 10.0),
    ("aldous n=10 k=9", 10, 9, (0.0, 0.0, 0.0), 10.0),
    ("independent n=6 k=3", 6, 3, (1.0, 1.0, 1.0), 10.0),
    ("mixed n=16 k=11", 16, 11, (0.5, 0.25, 0.5), 10.0),
]


def run_backend(backend, n, k0, rule, t_max, replicas, seed=2024):
    kern = get_kernels(backend)
    x0, y0 = canonical_pair(n, k0)
    k, perm0, x0w, y0w = _kernel_inputs(n, x0, y0)
    strat = ParametricStrategy(params_from_rule(n, *rule))
    u_eff, b_eff = strat.params.effective_tables()
    args = (n, k, perm0, x0w, y0w, u_eff, b_eff, t_max, seed, 0, replicas)
    kern.coupling_tau_batch(*args[:-1], min(replicas, 256))  # warmup/compile
    t0 = time.perf_counter()
    tau, events, _, _ = kern.coupling_tau_batch(*args)
    elapsed = time.perf_counter() - t0
    return elapsed, int(events.sum()), tau


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--replicas", type=int, default=100_000)
    args = parser.parse_args()

    backends = ["numpy"]
    try:
        get_kernels("numba")
        backends.insert(0, "numba")
    except ImportError:
        print("numba unavailable; benchmarking the numpy backend only")

    print(f"{'workload':<24} {'backend':<7} {'seconds':>8} "
          f"{'events':>12} {'Mev/s':>8} {'speedup':>8}")
    for label, n, k0, rule, t_max in WORKLOADS:
        base_rate = None
        rows = []
        for backend in backends:
            elapsed, events, tau = run_backend(
                backend, n, k0, rule, t_max, args.replicas)
            rate = events / elapsed / 1e6
            rows.append((backend, elapsed, events, rate, tau))
        slowest = min(r[3] for r in rows)
        for backend, elapsed, events, rate, tau in rows:
            print(f"{label:<24} {backend:<7} {elapsed:>8.3f} "
                  f"{events:>12} {rate:>8.2f} {rate / slowest:>7.1f}x")
        if len(rows) == 2:
            a, b = rows[0][4], rows[1][4]
            finite = np.isfinite(a) & np.isfinite(b)
            dev = float(np.max(np.abs(a[finite] - b[finite]), initial=0.0))
            agree = np.array_equal(np.isfinite(a), np.isfinite(b))
            print(f"{'':<24} agreement: max |tau diff| = {dev:.2e}, "
                  f"censoring identical: {agree}")


if __name__ == "__main__":
    main()
