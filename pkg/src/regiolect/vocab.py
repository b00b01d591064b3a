"""Per-region vocabularies, the minimum-frequency cutoff and power-law fits.

The cutoff comes from the confidence interval of a Bernoulli variable:
a token with frequency f out of N occurrences keeps the interval
p_hat +- alpha*se(p_hat) non-negative iff f >= N*alpha^2/(N + alpha^2),
which tends to alpha^2 (~4 at 95%) for large corpora.

Heaps' law V ~ n^alpha and Zipf's law f ~ 1/r^beta are both fitted by
ordinary least squares in log-log space.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass
class RegionVocabulary:
    region: str
    counts: dict[str, int]
    total_tokens: int
    min_count: int

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class LawFit:
    exponent: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class CutoffParams:
    N: int
    alpha: float
    f_min: float


def min_frequency_cutoff(N: int, alpha: float) -> float:
    """Minimum keepable frequency N*alpha^2/(N + alpha^2).

    alpha is the percent-point value of the confidence level (~2 for 95%);
    alpha = 0 yields a zero-width interval and cutoff 0.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    a2 = alpha * alpha
    return N * a2 / (N + a2)


def cutoff_params(N: int, alpha: float = 2.0) -> CutoffParams:
    return CutoffParams(N=N, alpha=alpha, f_min=min_frequency_cutoff(N, alpha))


def build_vocabulary(tokens: Iterable[str], region: str, min_count: int = 5) -> RegionVocabulary:
    """Count the stream and keep tokens with raw frequency >= min_count.

    total_tokens is the full stream length (before the cutoff). An empty
    stream yields a valid empty vocabulary.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counter = Counter()
    total = 0
    for tok in tokens:
        counter[tok] += 1
        total += 1
    counts = {t: c for t, c in counter.items() if c >= min_count}
    return RegionVocabulary(region=region, counts=counts,
                            total_tokens=total, min_count=min_count)


def vocabulary_from_counts(counter: Counter, region: str, min_count: int = 5) -> RegionVocabulary:
    """Same contract as build_vocabulary, from a pre-merged counter
    (sharded parallel counting merges Counters, which is associative and
    commutative, then applies the cutoff once)."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    total = sum(counter.values())
    counts = {t: c for t, c in counter.items() if c >= min_count}
    return RegionVocabulary(region=region, counts=counts,
                            total_tokens=total, min_count=min_count)


def heaps_curve(tokens: Iterable[str], samples: int = 64) -> list[tuple[int, int]]:
    """Vocabulary-growth curve: distinct-token count V at log-spaced
    prefix lengths n. Consumes the stream once."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    stream = tokens if isinstance(tokens, list) else list(tokens)
    n_total = len(stream)
    if n_total < 2:
        raise ValueError("stream must contain at least 2 tokens")
    grid = np.unique(np.round(
        np.logspace(0.0, np.log10(n_total), num=samples)).astype(np.int64))
    grid = grid[(grid >= 1) & (grid <= n_total)]
    seen: set[str] = set()
    curve: list[tuple[int, int]] = []
    prev = 0
    for n in grid:
        for tok in stream[prev:n]:
            seen.add(tok)
        curve.append((int(n), len(seen)))
        prev = int(n)
    return curve


def _loglog_fit(x: Sequence[float], y: Sequence[float]) -> LawFit:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2 or len(y) != len(x):
        raise ValueError("need at least two (x, y) points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit requires positive coordinates")
    lx, ly = np.log(x), np.log(y)
    if np.all(lx == lx[0]):
        raise ValueError("degenerate fit: all x equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return LawFit(exponent=float(slope), intercept=float(intercept),
                  r_squared=float(min(max(r2, 0.0), 1.0)))


def fit_heaps(curve: Sequence[tuple[int, int]]) -> LawFit:
    """OLS fit of log V = alpha*log n + c; exponent is alpha."""
    if len(curve) < 2:
        raise ValueError("need at least two curve points")
    n, v = zip(*curve)
    return _loglog_fit(n, v)


def zipf_ranks(vocab: RegionVocabulary) -> list[tuple[int, int]]:
    """(rank, frequency) pairs, frequency descending, ties in token
    lexicographic order, ranks starting at 1."""
    if not vocab.counts:
        raise ValueError("empty vocabulary")
    ordered = sorted(vocab.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(r, c) for r, (_, c) in enumerate(ordered, start=1)]


def fit_zipf(ranked: Sequence[tuple[int, int]],
             r_lo: int | None = None, r_hi: int | None = None) -> LawFit:
    """OLS fit of log f = -beta*log r + c over [r_lo, r_hi] (defaults to
    the full post-cutoff range); exponent is beta (>= 0 for descending
    frequencies)."""
    if len(ranked) < 2:
        raise ValueError("need at least two ranked points")
    lo = 1 if r_lo is None else r_lo
    hi = ranked[-1][0] if r_hi is None else r_hi
    window = [(r, f) for r, f in ranked if lo <= r <= hi]
    if len(window) < 2:
        raise ValueError("rank window selects fewer than two points")
    r, f = zip(*window)
    fit = _loglog_fit(r, f)
    return LawFit(exponent=-fit.exponent, intercept=fit.intercept,
                  r_squared=fit.r_squared)


def save_vocabulary_tsv(vocab: RegionVocabulary, path: str | Path) -> None:
    """token<TAB>frequency, descending frequency, lexicographic ties."""
    ordered = sorted(vocab.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    with open(path, "w", encoding="utf-8") as fh:
        for token, freq in ordered:
            fh.write(f"{token}\t{freq}\n")


def load_vocabulary_tsv(path: str | Path, region: str, min_count: int = 1) -> RegionVocabulary:
    counts: dict[str, int] = {}
    total = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            token, _, freq = line.rstrip("\n").partition("\t")
            counts[token] = int(freq)
            total += int(freq)
    return RegionVocabulary(region=region, counts=counts,
                            total_tokens=total, min_count=min_count)


def lawfit_as_dict(fit: LawFit, points: Sequence[tuple[int, int]]) -> dict:
    """JSON-ready form: {exponent, intercept, r_squared, points}."""
    return {
        "exponent": fit.exponent,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "points": [[int(a), int(b)] for a, b in points],
    }
