"""Command-line pipelines over the toolkit modules.

Every command prints a one-line JSON run summary (line accounting and
timing) to stdout and writes its artifacts atomically: files appear
complete under their final name or not at all. Re-running a command on
identical inputs and seed produces byte-identical artifacts, independent
of --threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

from . import affinity as aff
from . import emoji15 as e15
from . import ingest
from . import knn as knnmod
from . import vocab as vocabmod
from .embeddings import common_tokens, load_embeddings
from .textnorm import NormalizationConfig, normalize, parse_codepoints, tokenize

DEFAULT_SEED = 42


@contextmanager
def atomic_write(path: Path):
    """Write to a temp name, rename on success, unlink on failure."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _atomic_save(path: Path, saver) -> None:
    """Run a path-taking saver against a temp file, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    try:
        saver(tmp)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _load_config(path: str | None) -> dict[str, str]:
    """Flat key=value file; # starts a comment."""
    if path is None:
        return {}
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(args, key: str, default, cast=None):
    """Flag wins over config file wins over default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    cfg = getattr(args, "_config", {})
    if key in cfg:
        raw = cfg[key]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes")
        return cast(raw) if cast else raw
    return default


def _inputs(args) -> list[str]:
    paths = args.input or []
    if not paths:
        cfg = getattr(args, "_config", {})
        if "input" in cfg:
            paths = cfg["input"].split(",")
    if not paths:
        raise ValueError("no input files (use --input)")
    return paths


def _profile(args) -> ingest.FilterProfile:
    name = _resolve(args, "profile", "corpus")
    if name not in ingest.PROFILES:
        raise ValueError(f"unknown profile {name!r}")
    return ingest.PROFILES[name]


def _map_ordered(fn, items, threads: int) -> list:
    """Apply fn to items, results in item order regardless of threads."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _summary(command: str, started: float, stats: ingest.ReadStats | None,
             outputs: list, extra: dict | None = None) -> None:
    info: dict = {"command": command,
                  "elapsed_s": round(time.monotonic() - started, 3)}
    if stats is not None:
        info.update(stats.as_dict())
    info["outputs"] = [str(p) for p in outputs]
    if extra:
        info.update(extra)
    print(json.dumps(info, sort_keys=True))


def _count_file(path: str, profile: ingest.FilterProfile,
                norm_config: NormalizationConfig | None):
    """One file -> (region order, region->token Counter, stats)."""
    stats = ingest.ReadStats()
    counters: dict[str, Counter] = {}
    order: list[str] = []
    for record in ingest.read_corpus(path, profile, stats=stats):
        text = record.text if norm_config is None else \
            normalize(record.text, norm_config)
        if record.region not in counters:
            counters[record.region] = Counter()
            order.append(record.region)
        counters[record.region].update(t.surface for t in tokenize(text))
    return order, counters, stats


def _merge_counts(results) -> tuple[list[str], dict[str, Counter], ingest.ReadStats]:
    stats = ingest.ReadStats()
    merged: dict[str, Counter] = {}
    order: list[str] = []
    for file_order, counters, file_stats in results:
        stats.merge(file_stats)
        for region in file_order:
            if region not in merged:
                merged[region] = Counter()
                order.append(region)
            merged[region].update(counters[region])
    return order, merged, stats


# ---------------------------------------------------------------- commands

def cmd_cutoff(args) -> int:
    n = _resolve(args, "N", None, int)
    alpha = _resolve(args, "alpha", 2.0, float)
    if n is None:
        raise ValueError("--N is required")
    print(f"{vocabmod.min_frequency_cutoff(n, alpha):.6f}")
    return 0


def cmd_normalize(args) -> int:
    cfg = getattr(args, "_config", {})

    def switch(name):  # a flag or a config-file boolean turns it on
        if getattr(args, name):
            return True
        return cfg.get(name, "").lower() in ("1", "true", "yes")

    config = NormalizationConfig(
        lowercase=not switch("keep_case"),
        strip_diacritics=not switch("keep_diacritics"),
        mask_users=not switch("no_mask_users"),
        mask_numbers=not switch("no_mask_numbers"),
        mask_emojis=not switch("no_mask_emojis"),
        mask_urls=not switch("no_mask_urls"),
        drop_punct=switch("drop_punct"),
    )
    lines = [args.text] if args.text is not None else sys.stdin
    for line in lines:
        print(normalize(line.rstrip("\n"), config))
    return 0


def cmd_ingest_stats(args) -> int:
    started = time.monotonic()
    profile = _profile(args)
    threads = _resolve(args, "threads", 1, int)
    paths = _inputs(args)

    def one(path):
        stats = ingest.ReadStats()
        regions: Counter = Counter()
        for record in ingest.read_corpus(path, profile, stats=stats):
            regions[record.region] += 1
        return path, stats, regions

    results = _map_ordered(one, paths, threads)
    total = ingest.ReadStats()
    per_file = {}
    regions: Counter = Counter()
    for path, stats, file_regions in results:
        total.merge(stats)
        per_file[str(path)] = stats.as_dict()
        regions.update(file_regions)
    outputs = []
    out = _resolve(args, "out", None)
    if out is not None:
        payload = {"files": per_file, "total": total.as_dict(),
                   "kept_per_region": dict(sorted(regions.items()))}
        with atomic_write(Path(out)) as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
        outputs.append(out)
    _summary("ingest-stats", started, total, outputs,
             {"kept_per_region": dict(sorted(regions.items()))})
    return 0


def _counted_regions(args, norm_config):
    profile = _profile(args)
    threads = _resolve(args, "threads", 1, int)
    paths = _inputs(args)
    results = _map_ordered(
        lambda p: _count_file(p, profile, norm_config), paths, threads)
    return _merge_counts(results)


def cmd_vocab(args) -> int:
    started = time.monotonic()
    min_count = _resolve(args, "min_count", 5, int)
    norm_config = None if args.raw else NormalizationConfig()
    out_dir = Path(_resolve(args, "out", "."))
    order, merged, stats = _counted_regions(args, norm_config)
    outputs = []
    for region in order:
        vocab = vocabmod.vocabulary_from_counts(merged[region], region, min_count)
        path = out_dir / f"{region}_vocab.tsv"
        _atomic_save(path, lambda tmp, v=vocab: vocabmod.save_vocabulary_tsv(v, tmp))
        outputs.append(path)
    _summary("vocab", started, stats, outputs,
             {"regions": order, "min_count": min_count})
    return 0


def cmd_laws(args) -> int:
    started = time.monotonic()
    min_count = _resolve(args, "min_count", 5, int)
    samples = _resolve(args, "samples", 64, int)
    r_lo = _resolve(args, "r_lo", None, int)
    r_hi = _resolve(args, "r_hi", None, int)
    norm_config = None if args.raw else NormalizationConfig()
    profile = _profile(args)
    threads = _resolve(args, "threads", 1, int)
    paths = _inputs(args)

    def tokens_of(path):
        stats = ingest.ReadStats()
        streams: dict[str, list[str]] = {}
        order: list[str] = []
        for record in ingest.read_corpus(path, profile, stats=stats):
            text = record.text if norm_config is None else \
                normalize(record.text, norm_config)
            if record.region not in streams:
                streams[record.region] = []
                order.append(record.region)
            streams[record.region].extend(t.surface for t in tokenize(text))
        return order, streams, stats

    results = _map_ordered(tokens_of, paths, threads)
    stats = ingest.ReadStats()
    streams: dict[str, list[str]] = {}
    order: list[str] = []
    for file_order, file_streams, file_stats in results:
        stats.merge(file_stats)
        for region in file_order:
            if region not in streams:
                streams[region] = []
                order.append(region)
            streams[region].extend(file_streams[region])
    report = {}
    for region in order:
        tokens = streams[region]
        curve = vocabmod.heaps_curve(tokens, samples=samples)
        heaps = vocabmod.fit_heaps(curve)
        vocab = vocabmod.build_vocabulary(tokens, region, min_count)
        ranked = vocabmod.zipf_ranks(vocab)
        zipf = vocabmod.fit_zipf(ranked, r_lo=r_lo, r_hi=r_hi)
        report[region] = {
            "heaps": vocabmod.lawfit_as_dict(heaps, curve),
            "zipf": vocabmod.lawfit_as_dict(zipf, ranked),
            "total_tokens": vocab.total_tokens,
            "vocabulary_size": len(vocab),
        }
    out = Path(_resolve(args, "out", "laws.json"))
    with atomic_write(out) as fh:
        json.dump(report, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    _summary("laws", started, stats, [out], {"regions": order})
    return 0


def cmd_lexical_affinity(args) -> int:
    started = time.monotonic()
    min_count = _resolve(args, "min_count", 5, int)
    norm_config = None if args.raw else NormalizationConfig()
    order, merged, stats = _counted_regions(args, norm_config)
    vocabs = [vocabmod.vocabulary_from_counts(merged[r], r, min_count)
              for r in order]
    matrix = aff.lexical_affinity(vocabs)
    out = Path(_resolve(args, "out", "lexical_affinity.csv"))
    _atomic_save(out, lambda tmp: aff.save_affinity_csv(matrix, tmp))
    _summary("lexical-affinity", started, stats, [out],
             {"regions": list(matrix.labels)})
    return 0


def cmd_emoji_stats(args) -> int:
    started = time.monotonic()
    top_k = _resolve(args, "top_k", 32, int)
    profile = _profile(args)
    threads = _resolve(args, "threads", 1, int)
    paths = _inputs(args)

    def one(path):
        stats = ingest.ReadStats()
        counters: dict[str, Counter] = {}
        order: list[str] = []
        for record in ingest.read_corpus(path, profile, stats=stats):
            if record.region not in counters:
                counters[record.region] = Counter()
                order.append(record.region)
            counters[record.region].update(aff.count_emojis([record.text]))
        return order, counters, stats

    order, merged, stats = _merge_counts(_map_ordered(one, paths, threads))
    rankings = [aff.ranking_from_counts(merged[r], r, top_k) for r in order]
    out = Path(_resolve(args, "out", "emoji_rankings.csv"))
    _atomic_save(out, lambda tmp: aff.save_emoji_rankings_csv(rankings, tmp))
    _summary("emoji-stats", started, stats, [out], {"regions": order})
    return 0


def _parse_region_path(value: str) -> tuple[str, str]:
    label, sep, path = value.partition("=")
    if not sep or not label or not path:
        raise ValueError(f"expected REGION=path, got {value!r}")
    return label, path


def cmd_emb_affinity(args) -> int:
    started = time.monotonic()
    k = _resolve(args, "k", 33, int)
    min_regions = _resolve(args, "min_regions", 5, int)
    threads = _resolve(args, "threads", 1, int)
    backend = _resolve(args, "kernel", None)
    pairs = [_parse_region_path(v) for v in _inputs(args)]
    tables = [load_embeddings(path, region) for region, path in pairs]
    common = common_tokens(tables, min_regions=min_regions)
    graphs = _map_ordered(
        lambda t: knnmod.knn_graph(t, common, k=k, backend=backend, threads=1),
        tables, threads)
    signatures = [knnmod.signature(g) for g in graphs]
    outputs = []
    sig_dir = _resolve(args, "signatures_out", None)
    if sig_dir is not None:
        for sig in signatures:
            path = Path(sig_dir) / f"{sig.region}_signature.tsv"
            _atomic_save(path, lambda tmp, s=sig: knnmod.save_signature_tsv(s, tmp))
            outputs.append(path)
    matrix = knnmod.semantic_affinity(signatures)
    out = Path(_resolve(args, "out", "semantic_affinity.csv"))
    _atomic_save(out, lambda tmp: aff.save_affinity_csv(matrix, tmp))
    outputs.append(out)
    _summary("emb-affinity", started, None, outputs,
             {"regions": list(matrix.labels), "k": k,
              "common_tokens": len(common)})
    return 0


def _load_label_set(path: str | None) -> tuple[str, ...]:
    if path is None:
        return e15.DEFAULT_LABEL_SET
    with open(path, "r", encoding="utf-8") as fh:
        entries = json.load(fh)
    labels = []
    for entry in entries:
        labels.append(parse_codepoints(entry) if entry.startswith("U+") else entry)
    return tuple(labels)


def cmd_emoji15_build(args) -> int:
    started = time.monotonic()
    seed = _resolve(args, "seed", DEFAULT_SEED, int)
    holdout = _resolve(args, "holdout", 0.5, float)
    min_examples = _resolve(args, "min_examples", 50, int)
    label_set = _load_label_set(_resolve(args, "labels", None))
    config = e15.EmojiTaskConfig(
        label_set=label_set, holdout_fraction=holdout, seed=seed,
        min_examples_per_region=min_examples)
    profile = _profile(args)
    stats = ingest.ReadStats()
    records = ingest.read_many(_inputs(args), profile, stats=stats)
    split = e15.build_task(records, config)
    out_dir = Path(_resolve(args, "out", "emoji15"))
    outputs = e15.save_task(split, out_dir)
    sizes = {r: {"train": len(split.train[r]), "test": len(split.test[r])}
             for r in split.regions}
    _summary("emoji15-build", started, stats, outputs,
             {"regions": list(split.regions), "sizes": sizes, "seed": seed})
    return 0


def cmd_emoji15_eval(args) -> int:
    started = time.monotonic()
    task_dir = Path(args.task_dir)
    pred_dir = Path(args.pred_dir)
    gold = {}
    for path in sorted(task_dir.glob("*_test.ndjson")):
        region = path.name[:-len("_test.ndjson")]
        gold[region] = e15.load_examples(path, region)
    if not gold:
        raise ValueError(f"no *_test.ndjson files under {task_dir}")
    regions = sorted(gold)
    models = sorted({p.name.split("__", 1)[0]
                     for p in pred_dir.glob("*__*.txt")})
    if not models:
        raise ValueError(f"no MODEL__REGION.txt files under {pred_dir}")
    accuracy = []
    for model in models:
        row = []
        for region in regions:
            path = pred_dir / f"{model}__{region}.txt"
            if not path.exists():
                raise ValueError(f"missing predictions {path.name} "
                                 "(every model must cover every region)")
            preds = e15.load_predictions(path)
            row.append(e15.evaluate(preds, gold[region]))
        accuracy.append(row)
    report = e15.rank_models(models, regions, accuracy)
    out = Path(_resolve(args, "out", "emoji15_report.json"))
    with atomic_write(out) as fh:
        json.dump(report.as_dict(), fh, ensure_ascii=False, indent=2,
                  sort_keys=True)
        fh.write("\n")
    _summary("emoji15-eval", started, None, [out],
             {"models": list(models), "regions": list(regions)})
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regiolect",
        description="corpus dialectometry pipelines (vocabularies, law fits, "
                    "affinity matrices, emoji benchmark)")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append",
                        help="input file (repeatable)")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--profile", choices=("corpus", "embedding"),
                        help="filter profile (default corpus)")
    common.add_argument("--seed", type=int, help="RNG seed (default 42)")
    common.add_argument("--threads", type=int, help="worker threads (default 1)")
    common.add_argument("--config", help="flat key=value config file; "
                                         "flags override file values")

    p = sub.add_parser("ingest-stats", parents=[common],
                       help="count kept/filtered/malformed lines")
    p.set_defaults(func=cmd_ingest_stats)

    p = sub.add_parser("vocab", parents=[common],
                       help="per-region vocabulary TSVs")
    p.add_argument("--min-count", type=int, dest="min_count")
    p.add_argument("--raw", action="store_true",
                   help="skip text normalization")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("laws", parents=[common],
                       help="Heaps/Zipf exponents per region (JSON)")
    p.add_argument("--min-count", type=int, dest="min_count")
    p.add_argument("--samples", type=int)
    p.add_argument("--r-lo", type=int, dest="r_lo")
    p.add_argument("--r-hi", type=int, dest="r_hi")
    p.add_argument("--raw", action="store_true")
    p.set_defaults(func=cmd_laws)

    p = sub.add_parser("lexical-affinity", parents=[common],
                       help="region x region cosine distance CSV")
    p.add_argument("--min-count", type=int, dest="min_count")
    p.add_argument("--raw", action="store_true")
    p.set_defaults(func=cmd_lexical_affinity)

    p = sub.add_parser("emoji-stats", parents=[common],
                       help="top-k emoji ranking CSV per region")
    p.add_argument("--top-k", type=int, dest="top_k")
    p.set_defaults(func=cmd_emoji_stats)

    p = sub.add_parser("emb-affinity", parents=[common],
                       help="semantic affinity CSV from embedding tables "
                            "(--input REGION=path)")
    p.add_argument("--k", type=int)
    p.add_argument("--min-regions", type=int, dest="min_regions")
    p.add_argument("--kernel", choices=("c", "python"),
                   help="force a scan backend")
    p.add_argument("--signatures-out", dest="signatures_out",
                   help="directory for signature TSV dumps")
    p.set_defaults(func=cmd_emb_affinity)

    p = sub.add_parser("emoji15-build", parents=[common],
                       help="build the 15-emoji prediction task")
    p.add_argument("--labels", help="JSON list of 15 emojis (literals or "
                                    "U+XXXX notation); default built-in set")
    p.add_argument("--holdout", type=float)
    p.add_argument("--min-examples", type=int, dest="min_examples")
    p.set_defaults(func=cmd_emoji15_build)

    p = sub.add_parser("emoji15-eval", parents=[common],
                       help="score prediction files and rank models")
    p.add_argument("--task-dir", required=True, dest="task_dir")
    p.add_argument("--pred-dir", required=True, dest="pred_dir")
    p.set_defaults(func=cmd_emoji15_eval)

    p = sub.add_parser("cutoff", parents=[common],
                       help="minimum frequency cutoff N*a^2/(N+a^2)")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_cutoff)

    p = sub.add_parser("normalize", parents=[common],
                       help="normalize lines (debugging aid)")
    p.add_argument("--text", help="single line; otherwise reads stdin")
    p.add_argument("--keep-case", action="store_true")
    p.add_argument("--keep-diacritics", action="store_true")
    p.add_argument("--no-mask-users", action="store_true")
    p.add_argument("--no-mask-numbers", action="store_true")
    p.add_argument("--no-mask-emojis", action="store_true")
    p.add_argument("--no-mask-urls", action="store_true")
    p.add_argument("--drop-punct", action="store_true")
    p.set_defaults(func=cmd_normalize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = _load_config(getattr(args, "config", None))
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
