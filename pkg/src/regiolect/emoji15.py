"""Emoji-15 regional classification benchmark: builder and rank harness.

The builder keeps messages carrying exactly one of the 15 label emojis
(other emojis are fine), masks the emoji occurrences, and splits each
region 50-50 with per-label stratification. The harness scores
prediction files against gold labels and ranks models per region with
competition ranking (best rank 1, ties share the minimum).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingTable
from .ingest import TweetRecord
from .textnorm import (
    MASK_EMOJI,
    NormalizationConfig,
    codepoints,
    extract_emojis,
    iter_emoji_clusters,
    normalize,
    tokenize,
)

# A popular-but-diverse default: no skin tones, the top-ranked laughing
# face deliberately left out. Override per task via EmojiTaskConfig.
DEFAULT_LABEL_SET = (
    "\U0001F62D",  # loudly crying
    "\U0001F639",  # cat with tears of joy
    "\U0001F60D",  # heart eyes
    "\U0001F618",  # blowing kiss
    "❤",      # red heart
    "\U0001F495",  # two hearts
    "\U0001F64F",  # folded hands
    "\U0001F4AA",  # flexed biceps
    "\U0001F389",  # party popper
    "\U0001F60E",  # sunglasses
    "\U0001F621",  # pouting
    "\U0001F914",  # thinking
    "\U0001F605",  # sweat smile
    "\U0001F971",  # yawning
    "\U0001F525",  # fire
)

EMBEDDING_NORMALIZATION = NormalizationConfig()  # all masks on


def _label_base(emoji: str) -> str:
    occ = extract_emojis(emoji)
    if len(occ) != 1 or occ[0].skin_tone is not None:
        raise ValueError(f"label {emoji!r} must be a single tone-free emoji")
    return occ[0].base


@dataclass(frozen=True)
class EmojiTaskConfig:
    label_set: tuple[str, ...] = DEFAULT_LABEL_SET
    holdout_fraction: float = 0.5
    seed: int = 42
    min_examples_per_region: int = 50
    normalization: NormalizationConfig = EMBEDDING_NORMALIZATION

    def __post_init__(self):
        if len(self.label_set) != 15:
            raise ValueError("label_set must contain exactly 15 emojis")
        bases = [_label_base(e) for e in self.label_set]
        if len(set(bases)) != 15:
            raise ValueError("label_set emojis must be distinct")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must be in (0, 1)")

    @property
    def label_bases(self) -> tuple[str, ...]:
        return tuple(_label_base(e) for e in self.label_set)


@dataclass(frozen=True)
class LabeledExample:
    id: int
    text: str
    label: int
    region: str


@dataclass
class TaskSplit:
    label_set: tuple[str, ...]
    train: dict[str, list[LabeledExample]]
    test: dict[str, list[LabeledExample]]

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(sorted(self.train))


def _mask_label_emojis(text: str, bases: frozenset[str]) -> str:
    """Replace any remaining cluster whose base matches a label with the
    emoji mask literal (no-op when the normalizer already masked all
    emojis)."""
    occurrences = list(iter_emoji_clusters(text))
    if not occurrences:
        return text
    pieces, last = [], 0
    for (lo, hi), occ in zip(occurrences, extract_emojis(text)):
        if occ.base in bases:
            pieces.append(text[last:lo])
            pieces.append(f" {MASK_EMOJI} ")
            last = hi
    pieces.append(text[last:])
    return " ".join("".join(pieces).split())


def build_task(records: Iterable[TweetRecord], config: EmojiTaskConfig) -> TaskSplit:
    """Build per-region stratified train/test splits.

    A record is usable when its text contains exactly one distinct label
    emoji (matching on the tone-stripped base; other emojis permitted).
    Regions with fewer than min_examples_per_region usable records are
    dropped. Same seed, same records: byte-identical splits.
    """
    bases = config.label_bases
    base_to_label = {b: i for i, b in enumerate(bases)}
    base_set = frozenset(bases)
    buckets: dict[tuple[str, int], list[LabeledExample]] = {}
    seen_ids: set[int] = set()
    for record in records:
        present = {base_to_label[o.base] for o in extract_emojis(record.text)
                   if o.base in base_set}
        if len(present) != 1:
            continue
        label = present.pop()
        if record.id in seen_ids:
            raise ValueError(f"duplicate record id {record.id}")
        seen_ids.add(record.id)
        text = normalize(record.text, config.normalization)
        text = _mask_label_emojis(text, base_set)
        example = LabeledExample(id=record.id, text=text, label=label,
                                 region=record.region)
        buckets.setdefault((record.region, label), []).append(example)
    if not buckets:
        raise ValueError("no record contains a label-set emoji")

    per_region: dict[str, int] = {}
    for (region, _), examples in buckets.items():
        per_region[region] = per_region.get(region, 0) + len(examples)
    kept_regions = {r for r, n in per_region.items()
                    if n >= config.min_examples_per_region}

    rng = np.random.default_rng(config.seed)
    train: dict[str, list[LabeledExample]] = {r: [] for r in sorted(kept_regions)}
    test: dict[str, list[LabeledExample]] = {r: [] for r in sorted(kept_regions)}
    for (region, label) in sorted(buckets):
        if region not in kept_regions:
            continue
        examples = buckets[(region, label)]
        perm = rng.permutation(len(examples))
        n_train = int(len(examples) * config.holdout_fraction + 0.5)
        for pos in perm[:n_train]:
            train[region].append(examples[pos])
        for pos in perm[n_train:]:
            test[region].append(examples[pos])
    return TaskSplit(label_set=tuple(config.label_set), train=train, test=test)


def evaluate(predictions: Sequence[int], gold: Sequence[LabeledExample]) -> float:
    """Exact-match accuracy in [0, 1]."""
    if len(predictions) != len(gold):
        raise ValueError(f"{len(predictions)} predictions for {len(gold)} examples")
    if not gold:
        raise ValueError("empty gold sequence")
    hits = sum(1 for p, g in zip(predictions, gold) if p == g.label)
    return hits / len(gold)


@dataclass
class EvalReport:
    models: tuple[str, ...]
    regions: tuple[str, ...]
    accuracy: np.ndarray   # (models, regions)
    ranks: np.ndarray      # (models, regions) competition ranks
    local_rank: dict[str, int]
    top5: dict[str, tuple[str, ...]]
    avg_rank: dict[str, float]

    def as_dict(self) -> dict:
        return {
            "models": list(self.models),
            "regions": list(self.regions),
            "accuracy": {m: {r: float(self.accuracy[i, j])
                             for j, r in enumerate(self.regions)}
                         for i, m in enumerate(self.models)},
            "ranks": {m: {r: int(self.ranks[i, j])
                          for j, r in enumerate(self.regions)}
                      for i, m in enumerate(self.models)},
            "local_rank": dict(self.local_rank),
            "top5": {r: list(v) for r, v in self.top5.items()},
            "avg_rank": dict(self.avg_rank),
        }


def rank_models(models: Sequence[str], regions: Sequence[str],
                accuracy) -> EvalReport:
    """Per-region competition ranks from an accuracy matrix.

    Model and region codes share the region-code space plus the literal
    "ALL"; local_rank[r] is model r's rank on region r when present.
    Top-5 ties break on model code for reproducibility.
    """
    accuracy = np.asarray(accuracy, dtype=np.float64)
    if accuracy.shape != (len(models), len(regions)):
        raise ValueError("accuracy shape must be (models, regions)")
    models = tuple(models)
    regions = tuple(regions)
    m, r = accuracy.shape
    ranks = np.empty((m, r), dtype=np.int64)
    for j in range(r):
        col = accuracy[:, j]
        # competition rank: 1 + number of strictly better models
        ranks[:, j] = 1 + (col[None, :] > col[:, None]).sum(axis=1)
    top5 = {}
    for j, region in enumerate(regions):
        order = sorted(range(m), key=lambda i: (-accuracy[i, j], models[i]))
        top5[region] = tuple(models[i] for i in order[:5])
    local_rank = {}
    for j, region in enumerate(regions):
        if region in models:
            local_rank[region] = int(ranks[models.index(region), j])
    avg = average_rank(ranks)
    avg_rank = {model: float(avg[i]) for i, model in enumerate(models)}
    return EvalReport(models=models, regions=regions, accuracy=accuracy,
                      ranks=ranks, local_rank=local_rank, top5=top5,
                      avg_rank=avg_rank)


def average_rank(ranks) -> np.ndarray:
    """Arithmetic mean of each model's ranks across regions (row mean);
    lower is better."""
    ranks = np.asarray(ranks, dtype=np.float64)
    if ranks.ndim != 2 or ranks.size == 0:
        raise ValueError("ranks must be a non-empty (models, regions) matrix")
    if not np.all(np.isfinite(ranks)):
        raise ValueError("ranks must be complete (no missing entries)")
    return ranks.mean(axis=1)


def centroid_predictor(train: Sequence[LabeledExample],
                       embeddings: EmbeddingTable) -> Callable[[str], int]:
    """Nearest-centroid baseline over mean token vectors.

    A text is the mean embedding of its in-vocabulary tokens; each label's
    centroid is the mean of its training text vectors. Prediction is the
    cosine-nearest centroid; texts with no in-vocabulary tokens get the
    majority training label. Fully deterministic.
    """
    if not train:
        raise ValueError("empty training set")
    dim = embeddings.dim

    def text_vector(text: str) -> np.ndarray | None:
        vecs = [embeddings.vectors[tok.surface]
                for tok in tokenize(text) if tok.surface in embeddings.vectors]
        if not vecs:
            return None
        return np.mean(vecs, axis=0)

    sums: dict[int, np.ndarray] = {}
    counts: dict[int, int] = {}
    label_freq: dict[int, int] = {}
    for example in train:
        label_freq[example.label] = label_freq.get(example.label, 0) + 1
        vec = text_vector(example.text)
        if vec is None:
            continue
        if example.label not in sums:
            sums[example.label] = np.zeros(dim, dtype=np.float64)
            counts[example.label] = 0
        sums[example.label] += vec
        counts[example.label] += 1
    if not sums:
        raise ValueError("no training text has in-vocabulary tokens")
    labels = sorted(sums)
    centroids = np.stack([sums[l] / counts[l] for l in labels])
    norms = np.linalg.norm(centroids, axis=1)
    if np.any(norms == 0):
        raise ValueError("degenerate zero centroid")
    centroids = centroids / norms[:, None]
    majority = min(label_freq, key=lambda l: (-label_freq[l], l))

    def predict(text: str) -> int:
        vec = text_vector(text)
        if vec is None:
            return majority
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            return majority
        sims = centroids @ (vec / norm)
        best = int(np.argmax(sims))  # argmax takes first on ties
        return labels[best]

    return predict


def save_task(split: TaskSplit, out_dir: str | Path) -> list[Path]:
    """One NDJSON file per region per split plus labels.json; returns the
    written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    labels_path = out_dir / "labels.json"
    with open(labels_path, "w", encoding="utf-8") as fh:
        json.dump([codepoints(e) for e in split.label_set], fh,
                  ensure_ascii=False, indent=2)
        fh.write("\n")
    written.append(labels_path)
    for name, side in (("train", split.train), ("test", split.test)):
        for region in sorted(side):
            path = out_dir / f"{region}_{name}.ndjson"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for ex in side[region]:
                    fh.write(json.dumps(
                        {"text": ex.text, "label": ex.label, "id": ex.id},
                        ensure_ascii=False, sort_keys=True) + "\n")
            written.append(path)
    return written


def load_examples(path: str | Path, region: str) -> list[LabeledExample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(LabeledExample(id=obj["id"], text=obj["text"],
                                      label=obj["label"], region=region))
    return out


def load_predictions(path: str | Path) -> list[int]:
    """One integer label index per line."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer label") from None
    return out
