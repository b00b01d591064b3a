"""Lexical affinity matrices and per-region emoji rankings.

Region vocabularies become sparse count vectors over the union
vocabulary; the affinity matrix holds pairwise cosine distances (zero
diagonal, symmetric). Count vectors are kept as exact integers and the
cosine is evaluated with one correctly-rounded division, so uniformly
scaling any region's counts cannot change a single output bit — raw
counts and relative frequencies are literally the same matrix.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ingest import TweetRecord
from .textnorm import codepoints, extract_emojis
from .vocab import RegionVocabulary


@dataclass(frozen=True)
class TokenIndex:
    """Dense token->column mapping over a union vocabulary, in
    lexicographic token order."""

    tokens: tuple[str, ...]
    ids: dict[str, int]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class FrequencyVector:
    region: str
    entries: dict[int, int]


@dataclass(frozen=True)
class AffinityMatrix:
    labels: tuple[str, ...]
    values: np.ndarray  # (len(labels), len(labels)) float64

    def __getitem__(self, pair: tuple[str, str]) -> float:
        i = self.labels.index(pair[0])
        j = self.labels.index(pair[1])
        return float(self.values[i, j])


@dataclass(frozen=True)
class EmojiRanking:
    region: str
    ranked: tuple[tuple[str, int], ...]  # (emoji base or modifier, count)


def union_vocabulary(vocabs: Sequence[RegionVocabulary]) -> TokenIndex:
    """Index over the union of all vocabularies, lexicographic order."""
    if not vocabs:
        raise ValueError("need at least one vocabulary")
    union: set[str] = set()
    for v in vocabs:
        union.update(v.counts)
    tokens = tuple(sorted(union))
    return TokenIndex(tokens=tokens, ids={t: i for i, t in enumerate(tokens)})


def frequency_vector(vocab: RegionVocabulary, index: TokenIndex) -> FrequencyVector:
    entries = {index.ids[t]: c for t, c in vocab.counts.items()}
    return FrequencyVector(region=vocab.region, entries=entries)


def _sparse_int_cosine(a: Mapping[int, int], b: Mapping[int, int]) -> float:
    # exact big-int dot products; iterate the smaller support
    if len(b) < len(a):
        a, b = b, a
    dot = 0
    for key, va in a.items():
        vb = b.get(key)
        if vb is not None:
            dot += va * vb
    if dot == 0:
        return 1.0
    na = sum(v * v for v in a.values())
    nb = sum(v * v for v in b.values())
    # single rounding: the integer ratio is exact, so any common scale
    # factor cancels before floating point enters
    return 1.0 - math.sqrt((dot * dot) / (na * nb))


def _dense_cosine(u: np.ndarray, v: np.ndarray) -> float:
    dot = float(u @ v)
    na = float(u @ u)
    nb = float(v @ v)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine distance undefined for zero vectors")
    q = (dot * dot) / (na * nb)
    s = math.sqrt(min(q, 1.0))
    if dot < 0.0:
        s = -s
    return 1.0 - s


def cosine_distance(u, v) -> float:
    """Cosine distance 1 - u.v/(|u||v|).

    Accepts FrequencyVector / sparse integer mappings (exact path) or
    dense real vectors. Zero vectors are a domain error.
    """
    if isinstance(u, FrequencyVector):
        u = u.entries
    if isinstance(v, FrequencyVector):
        v = v.entries
    if isinstance(u, Mapping) and isinstance(v, Mapping):
        if not u or not v:
            raise ValueError("cosine distance undefined for zero vectors")
        return _sparse_int_cosine(u, v)
    return _dense_cosine(np.asarray(u, dtype=np.float64),
                         np.asarray(v, dtype=np.float64))


def lexical_affinity(vocabs: Sequence[RegionVocabulary]) -> AffinityMatrix:
    """Pairwise cosine-distance matrix between region count vectors.

    Regions whose post-cutoff vocabulary is empty are excluded with a
    warning (an empty vector has no direction). Symmetry and the zero
    diagonal hold exactly by construction; row/column order follows the
    input order.
    """
    usable = []
    for v in vocabs:
        if v.counts:
            usable.append(v)
        else:
            warnings.warn(f"excluding region {v.region}: empty vocabulary "
                          "after cutoff", stacklevel=2)
    if len(usable) < 2:
        raise ValueError("need at least two non-empty vocabularies")
    index = union_vocabulary(usable)
    vectors = [frequency_vector(v, index) for v in usable]
    m = len(usable)
    values = np.zeros((m, m), dtype=np.float64)
    for i in range(m):
        for j in range(i + 1, m):
            d = _sparse_int_cosine(vectors[i].entries, vectors[j].entries)
            values[i, j] = d
            values[j, i] = d
    return AffinityMatrix(labels=tuple(v.region for v in usable), values=values)


def count_emojis(texts: Iterable[str]) -> Counter:
    """Count emoji bases (modifiers stripped) plus the five skin-tone
    modifiers as standalone aggregate entries."""
    counter: Counter = Counter()
    for text in texts:
        for occ in extract_emojis(text):
            counter[occ.base] += 1
            if occ.skin_tone is not None:
                counter[occ.skin_tone] += 1
    return counter


def ranking_from_counts(counter: Counter, region: str, top_k: int = 32) -> EmojiRanking:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    ordered = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
    return EmojiRanking(region=region, ranked=tuple(ordered[:top_k]))


def emoji_ranking(records: Iterable[TweetRecord], region: str, top_k: int = 32) -> EmojiRanking:
    """Top-k emoji usage for one region; ties break on codepoint order."""
    counter = count_emojis(r.text for r in records if r.region == region)
    return ranking_from_counts(counter, region, top_k)


def save_affinity_csv(matrix: AffinityMatrix, path: str | Path) -> None:
    """First row/column are region codes; cells carry six decimals."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("," + ",".join(matrix.labels) + "\n")
        for i, label in enumerate(matrix.labels):
            row = ",".join(f"{matrix.values[i, j]:.6f}"
                           for j in range(len(matrix.labels)))
            fh.write(f"{label},{row}\n")


def load_affinity_csv(path: str | Path) -> AffinityMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")[1:]
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append([float(x) for x in parts[1:]])
    return AffinityMatrix(labels=tuple(header),
                          values=np.asarray(rows, dtype=np.float64))


def save_emoji_rankings_csv(rankings: Sequence[EmojiRanking], path: str | Path) -> None:
    """region,rank,emoji (U+XXXX notation),count."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("region,rank,emoji,count\n")
        for ranking in rankings:
            for rank, (seq, count) in enumerate(ranking.ranked, start=1):
                fh.write(f"{ranking.region},{rank},{codepoints(seq)},{count}\n")
