"""Shared fixture helpers: synthetic corpora and embedding files."""

import json

import numpy as np

from regiolect.embeddings import EmbeddingTable, save_embeddings


def write_ndjson(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def corpus_row(text, rid=0, country="MX", retweet=False, lang="es"):
    return {"id": rid, "text": text, "country": country,
            "retweet": retweet, "lang": lang}


def zipf_corpus(path, *, n_tokens, beta=1.9, vocab_size=5000, seed=0,
                region="MX", tokens_per_line=20):
    """Zipf-sampled token stream wrapped into corpus records; returns the
    sampled stream so tests can use the generator as oracle."""
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    p = ranks ** -beta
    p /= p.sum()
    # letter-only token names survive normalization unchanged
    names = []
    for i in range(vocab_size):
        digits = []
        x = i
        while True:
            digits.append(chr(ord("a") + x % 26))
            x //= 26
            if x == 0:
                break
        names.append("w" + "".join(reversed(digits)))
    draws = rng.choice(vocab_size, size=n_tokens, p=p)
    stream = [names[i] for i in draws]
    rows = []
    for start in range(0, n_tokens, tokens_per_line):
        chunk = stream[start:start + tokens_per_line]
        if len(chunk) < 5:
            break
        rows.append(corpus_row(" ".join(chunk), rid=start, country=region))
    write_ndjson(path, rows)
    return stream


def write_embedding_file(path, region, tokens, dim=8, seed=0):
    rng = np.random.default_rng(seed)
    table = EmbeddingTable(region=region, dim=dim, vectors={
        t: rng.normal(size=dim) for t in tokens})
    save_embeddings(table, path)
    return table
