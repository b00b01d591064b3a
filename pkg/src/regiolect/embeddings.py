"""Word-embedding table I/O and cross-region common-token selection.

Files use the plain text vector convention: a "count dim" header line,
then one token per line followed by its components, space separated, so
published regional models load directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass
class EmbeddingTable:
    region: str
    dim: int
    vectors: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class CommonTokenSet:
    tokens: tuple[str, ...]  # lexicographic order
    min_regions: int

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._members

    @cached_property
    def _members(self) -> frozenset:
        return frozenset(self.tokens)


def load_embeddings(path: str | Path, region: str) -> EmbeddingTable:
    """Parse a text vector file; any malformed row is a fatal error
    reported with its line number."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}:1: header must be 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ValueError(f"{path}:1: header must be 'count dim'") from None
        if count < 1 or dim < 1:
            raise ValueError(f"{path}:1: count and dim must be positive")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} components, "
                    f"got {len(parts) - 1}")
            token = parts[0]
            if not token:
                raise ValueError(f"{path}:{lineno}: empty token")
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric component") from None
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"{path}:{lineno}: non-finite component")
            if not np.any(vec):
                raise ValueError(f"{path}:{lineno}: zero vector")
            if token in vectors:
                raise ValueError(f"{path}:{lineno}: duplicate token {token!r}")
            vectors[token] = vec
    if len(vectors) != count:
        raise ValueError(f"{path}: header declares {count} rows, "
                         f"found {len(vectors)}")
    return EmbeddingTable(region=region, dim=dim, vectors=vectors)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    """Write the text vector format; components use shortest round-trip
    decimals so save/load is bit-exact."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(table.vectors)} {table.dim}\n")
        for token, vec in table.vectors.items():
            if any(ch.isspace() for ch in token):
                raise ValueError(f"token {token!r} contains whitespace")
            comps = " ".join(repr(float(x)) for x in vec)
            fh.write(f"{token} {comps}\n")


def common_tokens(tables: Sequence[EmbeddingTable], min_regions: int = 5) -> CommonTokenSet:
    """Tokens present in at least min_regions of the given tables."""
    if not 1 <= min_regions <= len(tables):
        raise ValueError("min_regions must be in [1, number of tables]")
    membership: dict[str, int] = {}
    for table in tables:
        for token in table.vectors:
            membership[token] = membership.get(token, 0) + 1
    kept = sorted(t for t, m in membership.items() if m >= min_regions)
    if not kept:
        raise ValueError("no token reaches the membership threshold; "
                         "signatures would be empty")
    return CommonTokenSet(tokens=tuple(kept), min_regions=min_regions)
