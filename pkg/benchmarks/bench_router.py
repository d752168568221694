#!/usr/bin/env python3
"""Benchmark the compiled routing kernel against the pure-Python fallback.

Runs the same fully seeded simulation on each available backend, checks the
results agree bit-for-bit, and reports throughput.  Example::

    python benchmarks/bench_router.py --requests 5000
"""

import argparse
import sys
import time

from drwasim.ep_router import EpConfig, available_backends
from drwasim.sim_engine import run
from drwasim.topology import nsf14
from drwasim.traffic import Exponential, TrafficConfig


def bench(requests: int, load: float, wavelengths: int, strategy: str, seed: int):
    topology = nsf14()
    mean_holding = 10.0
    traffic = TrafficConfig(load / mean_holding, Exponential(mean_holding),
                            requests, seed=seed)
    ep = EpConfig(seed=seed)
    results = {}
    timings = {}
    for backend in available_backends():
        t0 = time.perf_counter()
        results[backend] = run(topology, traffic, ep, wavelengths, strategy,
                               backend=backend)
        timings[backend] = time.perf_counter() - t0

    print(f"NSF-14, W={wavelengths}, {load:g} Erlang, {requests} requests, "
          f"{strategy}, seed {seed}")
    print(f"{'backend':<10} {'time':>9} {'req/s':>10} {'blocking':>10}")
    for backend, dt in timings.items():
        m = results[backend]
        print(f"{backend:<10} {dt:>8.2f}s {requests / dt:>10.0f} "
              f"{m.blocking_probability:>10.5f}")
    if len(results) == 2:
        speedup = timings["python"] / timings["cython"]
        agree = results["python"] == results["cython"]
        print(f"speedup: {speedup:.1f}x   metrics identical: {agree}")
        return agree
    print("compiled kernel not installed; nothing to compare against")
    return True


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--requests", type=int, default=5000)
    p.add_argument("--load", type=float, default=60.0)
    p.add_argument("--wavelengths", type=int, default=8)
    p.add_argument("--strategy", default="first-fit",
                   choices=("first-fit", "random", "round-robin"))
    p.add_argument("--seed", type=int, default=12345)
    args = p.parse_args()
    ok = bench(args.requests, args.load, args.wavelengths, args.strategy, args.seed)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
