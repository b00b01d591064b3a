#!/usr/bin/env python3
"""Benchmark the compiled kNN scan kernel against the numpy fallback.

Times exact top-k cosine search over random unit vectors and checks that
both backends return identical neighbor sets.

Usage:
  python benchmarks/bench_knn.py --n 2000 --dim 300 --k 33 --repeats 3
"""

import argparse
import time

import numpy as np

from regiolect.kernels import HAVE_COMPILED, available_backends, topk_neighbors


def bench(backend, vectors, k, threads, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = topk_neighbors(vectors, k, backend=backend, threads=threads)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000, help="number of vectors")
    ap.add_argument("--dim", type=int, default=300)
    ap.add_argument("--k", type=int, default=33)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    vectors = rng.normal(size=(args.n, args.dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)

    print(f"n={args.n} dim={args.dim} k={args.k} threads={args.threads} "
          f"(best of {args.repeats})")
    results = {}
    for backend in available_backends():
        elapsed, (idx, _) = bench(backend, vectors, args.k,
                                  args.threads, args.repeats)
        results[backend] = (elapsed, idx)
        pairs = args.n * (args.n - 1)
        print(f"  {backend:>6}: {elapsed:8.3f} s   "
              f"{pairs / elapsed / 1e6:8.1f} Mpairs/s")
    if HAVE_COMPILED:
        same = np.array_equal(results["c"][1], results["python"][1])
        print(f"  neighbor sets identical: {same}")
        if not same:
            raise SystemExit("backend mismatch")
        speedup = results["python"][0] / results["c"][0]
        print(f"  speedup (c vs python): {speedup:.2f}x")
    else:
        print("  compiled kernel not built; only the numpy path was timed")


if __name__ == "__main__":
    main()
