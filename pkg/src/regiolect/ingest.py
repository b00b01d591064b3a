"""Streaming reader for newline-delimited tweet corpora.

One JSON record per line: {"id", "text", "country", "retweet", "lang"};
files ending in .gz are transparently decompressed. Filtering follows the
two corpus profiles: the general one keeps messages with at least five
tokens and no retweets, the embedding one additionally requires seven
tokens and drops messages containing URLs.
"""

from __future__ import annotations

import gzip
import io
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .textnorm import count_tokens

# The 26 collection regions (21 countries with Spanish as an official
# language plus US, CA, GB, FR, BR).
DEFAULT_REGIONS = frozenset(
    "AR BO CL CO CR CU DO EC SV GQ GT HN MX NI PA PY PE PR ES UY VE "
    "BR CA FR GB US".split()
)

_REGION_RE = re.compile(r"^[A-Z]{2}$")
_LANG_RE = re.compile(r"^[a-z]{2}$")


@dataclass(frozen=True)
class TweetRecord:
    id: int
    text: str
    region: str
    is_retweet: bool
    lang: str


@dataclass(frozen=True)
class FilterProfile:
    min_tokens: int = 5
    drop_retweets: bool = True
    drop_urls: bool = False
    require_lang: str | None = None
    template_denylist: tuple[str, ...] = ()

    def __post_init__(self):
        if self.min_tokens < 1:
            raise ValueError("min_tokens must be >= 1")


CORPUS_PROFILE = FilterProfile(min_tokens=5, drop_retweets=True, drop_urls=False)
EMBEDDING_PROFILE = FilterProfile(min_tokens=7, drop_retweets=True, drop_urls=True)

PROFILES = {"corpus": CORPUS_PROFILE, "embedding": EMBEDDING_PROFILE}


@dataclass
class ReadStats:
    """Per-stream line accounting; lines == kept + filtered + malformed."""

    lines: int = 0
    kept: int = 0
    filtered: int = 0
    malformed: int = 0

    def merge(self, other: "ReadStats") -> None:
        self.lines += other.lines
        self.kept += other.kept
        self.filtered += other.filtered
        self.malformed += other.malformed

    def as_dict(self) -> dict:
        return {"lines": self.lines, "kept": self.kept,
                "filtered": self.filtered, "malformed": self.malformed}


def has_url(text: str) -> bool:
    """Substring URL check, robust to truncated shortener links."""
    lowered = text.lower()
    return "http://" in lowered or "https://" in lowered or "www." in lowered


def parse_record(line: str, regions: frozenset[str] = DEFAULT_REGIONS) -> TweetRecord:
    """Parse one corpus line; raises ValueError on any contract violation."""
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    try:
        rid = obj["id"]
        text = obj["text"]
        country = obj["country"]
        retweet = obj["retweet"]
        lang = obj["lang"]
    except KeyError as exc:
        raise ValueError(f"missing field {exc}") from None
    if not isinstance(rid, int) or isinstance(rid, bool) or rid < 0:
        raise ValueError("id must be an unsigned integer")
    if not isinstance(text, str) or not text:
        raise ValueError("text must be a non-empty string")
    if not isinstance(country, str) or not _REGION_RE.match(country):
        raise ValueError("country must be two uppercase ASCII letters")
    if country not in regions:
        raise ValueError(f"unknown region {country!r}")
    if not isinstance(retweet, bool):
        raise ValueError("retweet must be a boolean")
    if not isinstance(lang, str) or not _LANG_RE.match(lang):
        raise ValueError("lang must be a two-letter tag")
    return TweetRecord(id=rid, text=text, region=country,
                       is_retweet=retweet, lang=lang)


def filter_record(record: TweetRecord, profile: FilterProfile) -> bool:
    """True iff the record passes every enabled check. Token counts use
    the corpus tokenizer on the raw text (pre-masking), so words, emojis
    and punctuation all count."""
    if profile.drop_retweets and record.is_retweet:
        return False
    if profile.require_lang is not None and record.lang != profile.require_lang:
        return False
    if profile.drop_urls and has_url(record.text):
        return False
    for marker in profile.template_denylist:
        if marker in record.text:
            return False
    if count_tokens(record.text) < profile.min_tokens:
        return False
    return True


def _open_text(path: str | Path) -> io.TextIOBase:
    path = Path(path)
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def read_corpus(
    path: str | Path,
    profile: FilterProfile = CORPUS_PROFILE,
    *,
    stats: ReadStats | None = None,
    regions: frozenset[str] = DEFAULT_REGIONS,
) -> Iterator[TweetRecord]:
    """Stream kept records from one corpus file, in file order.

    Malformed lines (bad JSON, missing fields, contract violations) are
    tallied in stats.malformed and skipped; an unreadable file raises.
    """
    if stats is None:
        stats = ReadStats()
    with _open_text(path) as handle:
        for line in handle:
            stats.lines += 1
            if not line.strip():
                stats.malformed += 1
                continue
            try:
                record = parse_record(line, regions)
            except (ValueError, json.JSONDecodeError):
                stats.malformed += 1
                continue
            if filter_record(record, profile):
                stats.kept += 1
                yield record
            else:
                stats.filtered += 1


def read_many(
    paths: Iterable[str | Path],
    profile: FilterProfile = CORPUS_PROFILE,
    *,
    stats: ReadStats | None = None,
    regions: frozenset[str] = DEFAULT_REGIONS,
) -> Iterator[TweetRecord]:
    """Chain read_corpus over several files in the given order."""
    for path in paths:
        yield from read_corpus(path, profile, stats=stats, regions=regions)
