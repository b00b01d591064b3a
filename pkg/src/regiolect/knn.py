"""kNN graphs over embedding tables, sparse signatures, semantic affinity.

Independently trained embeddings cannot be compared vector-to-vector, so
each table is flattened into a sparse signature: for every common token
present, its k nearest common tokens (cosine distance on the dense
vectors), each pair weighted 0.5 + 1/(1 + d) — closer neighbors weigh
more. Signatures live in a shared (token, neighbor) key space and are
compared with the cosine distance, giving the semantic affinity matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .affinity import AffinityMatrix
from .embeddings import CommonTokenSet, EmbeddingTable
from .kernels import topk_neighbors


@dataclass
class KnnGraph:
    region: str
    k: int
    neighbors: dict[str, tuple[tuple[str, float], ...]]


@dataclass
class RegionSignature:
    region: str
    entries: dict[tuple[str, str], float]

    def __len__(self) -> int:
        return len(self.entries)


def knn_graph(table: EmbeddingTable, common: CommonTokenSet, k: int = 33,
              *, backend: str | None = None, threads: int = 1,
              block_size: int = 512) -> KnnGraph:
    """Exact k nearest neighbors among the common tokens present in the
    table, for each such token; candidates are restricted to the same
    set, the query token itself is excluded."""
    present = [t for t in common.tokens if t in table.vectors]
    if len(present) <= k:
        raise ValueError(
            f"region {table.region}: needs more than k={k} common tokens, "
            f"has {len(present)}")
    mat = np.stack([table.vectors[t] for t in present]).astype(np.float64)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    mat = mat / norms
    idx, dist = topk_neighbors(mat, k, backend=backend, threads=threads,
                               block_size=block_size)
    dist = np.clip(dist, 0.0, 2.0)
    neighbors = {}
    for row, token in enumerate(present):
        neighbors[token] = tuple(
            (present[idx[row, j]], float(dist[row, j])) for j in range(k))
    return KnnGraph(region=table.region, k=k, neighbors=neighbors)


def neighbor_weight(distance: float) -> float:
    """0.5 + 1/(1 + d); d in [0, 2] maps onto (5/6, 1.5]."""
    return 0.5 + 1.0 / (1.0 + distance)


def signature(graph: KnnGraph) -> RegionSignature:
    """One weighted entry per (token, neighbor) edge of the graph."""
    entries = {}
    for token, nbrs in graph.neighbors.items():
        for nb_token, d in nbrs:
            entries[(token, nb_token)] = neighbor_weight(d)
    return RegionSignature(region=graph.region, entries=entries)


def _packed_arrays(sig: RegionSignature, ids: dict[str, int]) -> tuple[np.ndarray, np.ndarray]:
    # one int64 key per (token, neighbor) pair of 32-bit token ids
    keys = np.fromiter(
        ((ids[t] << 32) | ids[nb] for t, nb in sig.entries),
        dtype=np.int64, count=len(sig.entries))
    vals = np.fromiter(sig.entries.values(), dtype=np.float64,
                       count=len(sig.entries))
    order = np.argsort(keys)
    return keys[order], vals[order]


def semantic_affinity(signatures: Sequence[RegionSignature]) -> AffinityMatrix:
    """Pairwise cosine distance between sparse signature vectors.

    Empty signatures are excluded with a warning. Symmetry and the zero
    diagonal are exact by construction; identical signatures give exactly
    zero distance.
    """
    usable = []
    for sig in signatures:
        if sig.entries:
            usable.append(sig)
        else:
            warnings.warn(f"excluding region {sig.region}: empty signature",
                          stacklevel=2)
    if len(usable) < 2:
        raise ValueError("need at least two non-empty signatures")
    tokens = sorted({t for sig in usable for pair in sig.entries for t in pair})
    if len(tokens) >= 1 << 31:
        raise ValueError("token universe exceeds 32-bit id space")
    ids = {t: i for i, t in enumerate(tokens)}
    packed = [_packed_arrays(sig, ids) for sig in usable]
    norms = [float(v @ v) for _, v in packed]
    m = len(usable)
    values = np.zeros((m, m), dtype=np.float64)
    for i in range(m):
        ki, vi = packed[i]
        for j in range(i + 1, m):
            kj, vj = packed[j]
            _, ia, ja = np.intersect1d(ki, kj, assume_unique=True,
                                       return_indices=True)
            dot = float(vi[ia] @ vj[ja]) if len(ia) else 0.0
            if dot <= 0.0:
                d = 1.0
            else:
                q = (dot * dot) / (norms[i] * norms[j])
                d = 1.0 - math.sqrt(min(q, 1.0))
            values[i, j] = d
            values[j, i] = d
    return AffinityMatrix(labels=tuple(s.region for s in usable), values=values)


def save_signature_tsv(sig: RegionSignature, path: str | Path) -> None:
    """token<TAB>neighbor<TAB>weight, sorted by (token, neighbor)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (token, nb), w in sorted(sig.entries.items()):
            fh.write(f"{token}\t{nb}\t{w!r}\n")


def load_signature_tsv(path: str | Path, region: str) -> RegionSignature:
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            token, nb, w = line.rstrip("\n").split("\t")
            entries[(token, nb)] = float(w)
    return RegionSignature(region=region, entries=entries)
