"""Pure numpy top-k selection; fallback when the C kernel is absent.

Operates on a block of the cosine-distance matrix (queries x all rows).
The selection is exact and deterministic: ties on equal distance resolve
to the smaller row index, matching the compiled kernel and a full stable
sort.
"""

from __future__ import annotations

import numpy as np


def select_block(dists: np.ndarray, lo: int, k: int,
                 out_idx: np.ndarray, out_dist: np.ndarray) -> None:
    """For each row r of dists (queries lo, lo+1, ...), write the k
    smallest entries excluding column lo+r into out_idx/out_dist."""
    for r in range(dists.shape[0]):
        row = dists[r]
        row[lo + r] = np.inf  # exclude the query itself
        kth = np.partition(row, k - 1)[k - 1]
        cand = np.flatnonzero(row <= kth)
        # cand is index-ascending; stable sort keeps that order on ties
        cand = cand[np.argsort(row[cand], kind="stable")]
        chosen = cand[:k]
        out_idx[lo + r] = chosen
        out_dist[lo + r] = row[chosen]
