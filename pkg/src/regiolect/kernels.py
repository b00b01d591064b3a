"""Backend selection for the top-k cosine scan.

Distances for a block of queries come from one BLAS matmul in either
case; the per-row top-k selection runs in the compiled Cython kernel
when importable, or a numpy fallback with identical results. Force a
backend with the REGIOLECT_KERNEL environment variable ("c" or
"python") or the backend argument.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _kernels_c
except ImportError:  # pure-python install
    _kernels_c = None

HAVE_COMPILED = _kernels_c is not None


def available_backends() -> tuple[str, ...]:
    return ("c", "python") if HAVE_COMPILED else ("python",)


def resolve_backend(backend: str | None = None) -> str:
    if backend is None:
        backend = os.environ.get("REGIOLECT_KERNEL")
    if backend is None:
        return "c" if HAVE_COMPILED else "python"
    if backend not in ("c", "python"):
        raise ValueError(f"unknown kernel backend {backend!r}")
    if backend == "c" and not HAVE_COMPILED:
        raise RuntimeError("compiled kernel requested but not built")
    return backend


def topk_neighbors(
    vectors: np.ndarray,
    k: int,
    *,
    backend: str | None = None,
    block_size: int = 512,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest rows (excluding self) for every row, by cosine
    distance over unit-normalized rows.

    Returns (idx, dist) of shape (n, k), distance ascending, ties on the
    smaller index. Results are independent of backend and thread count;
    distances are bitwise reproducible for a fixed block size (per-query
    work is isolated) and agree across blockings to float rounding.
    """
    vectors = np.ascontiguousarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise ValueError("vectors must be a 2-d array")
    n = vectors.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must be in [1, {n - 1}]")
    impl = _kernels_c if resolve_backend(backend) == "c" else _kernels_py
    out_idx = np.empty((n, k), dtype=np.int64)
    out_dist = np.empty((n, k), dtype=np.float64)
    transposed = vectors.T
    blocks = [(lo, min(lo + block_size, n)) for lo in range(0, n, block_size)]

    def scan(block):
        lo, hi = block
        dists = vectors[lo:hi] @ transposed
        np.subtract(1.0, dists, out=dists)
        impl.select_block(dists, lo, k, out_idx, out_dist)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for fut in [pool.submit(scan, b) for b in blocks]:
                fut.result()
    else:
        for block in blocks:
            scan(block)
    return out_idx, out_dist
