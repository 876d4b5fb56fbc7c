#!/usr/bin/env python3
"""Benchmark the compiled graph kernels against the pure-Python fallback.

Generates a synthetic ledger, builds the graph once, then times the three
hot kernels (taint BFS, hop BFS, co-spend union-find) on both backends and
verifies they return identical results.

Usage:
    python benchmarks/bench_kernels.py [--n-tx 200000] [--seed 7] [--repeat 3]
"""
from __future__ import annotations

import argparse
import random
import time

import numpy as np

from chaintrace._kernels import load_backend
from chaintrace.graph import build_graph
from chaintrace.synthgen import GenParams, gen_background


def time_call(fn, repeat: int) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-tx", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--max-d", type=int, default=6)
    parser.add_argument("--hops", type=int, default=3)
    args = parser.parse_args()

    window = (1_600_000_000, 1_600_000_000 + max(args.n_tx * 4, 1_000_000))
    print(f"generating ledger: n_tx={args.n_tx} seed={args.seed}")
    start = time.perf_counter()
    ledger, _ = gen_background(GenParams(seed=args.seed, n_background_tx=args.n_tx, window=window))
    print(f"  generated in {time.perf_counter() - start:.2f}s")
    start = time.perf_counter()
    graph = build_graph(ledger)
    print(f"  graph built in {time.perf_counter() - start:.2f}s "
          f"({graph.n_tx} txs, {graph.n_addresses} addresses)")

    rng = random.Random(args.seed)
    sources = np.asarray(sorted(rng.sample(range(graph.n_tx), 5)), dtype=np.int32)
    seeds = np.asarray(sorted(rng.sample(range(graph.n_addresses), 5)), dtype=np.int32)

    jobs = {
        "taint_bfs": lambda impl: impl.taint_bfs(
            graph.out_indptr, graph.out_aids, graph.spent_indptr, graph.spent_txs,
            sources, graph.n_addresses, args.max_d,
        ),
        "hop_bfs": lambda impl: impl.hop_bfs(
            graph.in_indptr, graph.in_aids, graph.out_indptr, graph.out_aids,
            graph.spent_indptr, graph.spent_txs, graph.prod_indptr, graph.prod_txs,
            seeds, args.hops,
        ),
        "cospend_union": lambda impl: impl.cospend_union(
            graph.in_indptr, graph.in_aids, graph.n_addresses,
        ),
    }

    backends = {"pure": load_backend("pure")}
    try:
        backends["native"] = load_backend("native")
    except ImportError:
        print("note: compiled backend not built; timing pure only")

    print(f"\n{'kernel':<14} " + " ".join(f"{name:>12}" for name in backends) +
          ("   speedup" if len(backends) == 2 else ""))
    for job_name, job in jobs.items():
        times = {}
        results = {}
        for name, impl in backends.items():
            times[name], results[name] = time_call(lambda impl=impl: job(impl), args.repeat)
        if len(backends) == 2:
            a, b = results["pure"], results["native"]
            if isinstance(a, tuple):
                for x, y in zip(a, b):
                    np.testing.assert_array_equal(x, y)
            else:
                np.testing.assert_array_equal(a, b)
        line = f"{job_name:<14} " + " ".join(f"{times[name] * 1e3:>10.1f}ms" for name in backends)
        if len(backends) == 2:
            line += f"   {times['pure'] / times['native']:>6.1f}x"
        print(line)
    if len(backends) == 2:
        print("\nresults identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
