"""Text normalization, tokenization and emoji extraction for tweet corpora.

The normalizer lowercases, strips diacritics (including n-tilde -> n) and
replaces user mentions, numbers, URLs and emojis with the fixed mask
literals "usr", "0", "_url" and "emo". The tokenizer splits text into
word, emoji and punctuation tokens; emoji grapheme clusters (ZWJ
sequences, flags, skin-tone modified emojis) stay single tokens.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

MASK_USER = "usr"
MASK_NUMBER = "0"
MASK_EMOJI = "emo"
MASK_URL = "_url"
MASK_LITERALS = frozenset({MASK_USER, MASK_NUMBER, MASK_EMOJI, MASK_URL})

# Fitzpatrick skin tone modifiers U+1F3FB..U+1F3FF
SKIN_TONE_MODIFIERS = tuple(chr(cp) for cp in range(0x1F3FB, 0x1F400))

_ZWJ = "‍"
_VS16 = "️"
_KEYCAP = "⃣"

# Pictographic codepoint ranges (Extended_Pictographic plus the emoji
# component blocks: regional indicators and skin tone modifiers).
_EMOJI_RANGES = (
    (0x00A9, 0x00A9), (0x00AE, 0x00AE),
    (0x203C, 0x203C), (0x2049, 0x2049), (0x2122, 0x2122), (0x2139, 0x2139),
    (0x2194, 0x2199), (0x21A9, 0x21AA),
    (0x231A, 0x231B), (0x2328, 0x2328), (0x23CF, 0x23CF), (0x23E9, 0x23FA),
    (0x24C2, 0x24C2), (0x25AA, 0x25AB), (0x25B6, 0x25B6), (0x25C0, 0x25C0),
    (0x25FB, 0x25FE), (0x2600, 0x27BF), (0x2934, 0x2935),
    (0x2B05, 0x2B07), (0x2B1B, 0x2B1C), (0x2B50, 0x2B50), (0x2B55, 0x2B55),
    (0x3030, 0x3030), (0x303D, 0x303D), (0x3297, 0x3297), (0x3299, 0x3299),
    (0x1F000, 0x1F0FF), (0x1F100, 0x1F1FF), (0x1F200, 0x1F2FF),
    (0x1F300, 0x1F5FF), (0x1F600, 0x1F64F), (0x1F680, 0x1F6FF),
    (0x1F700, 0x1F77F), (0x1F780, 0x1F7FF), (0x1F900, 0x1F9FF),
    (0x1FA00, 0x1FAFF),
)

_RI_LO, _RI_HI = 0x1F1E6, 0x1F1FF  # regional indicators (flag pairs)

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_USER_RE = re.compile(r"@\w+")
_NUMBER_RE = re.compile(r"\d+")


def _is_emoji_char(ch: str) -> bool:
    cp = ord(ch)
    for lo, hi in _EMOJI_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def _is_word_char(ch: str) -> bool:
    if ch == "_":
        return True
    return unicodedata.category(ch)[0] in ("L", "M", "N")


@dataclass(frozen=True)
class NormalizationConfig:
    """Switches for :func:`normalize`; all masks on reproduces the corpus
    preprocessing whose mask literals surface as ordinary vocabulary
    tokens (usr, 0, emo, _url)."""

    lowercase: bool = True
    strip_diacritics: bool = True
    mask_users: bool = True
    mask_numbers: bool = True
    mask_emojis: bool = True
    mask_urls: bool = True
    drop_punct: bool = False


RAW_CONFIG = NormalizationConfig(
    lowercase=False, strip_diacritics=False, mask_users=False,
    mask_numbers=False, mask_emojis=False, mask_urls=False,
)


@dataclass(frozen=True)
class Token:
    surface: str
    kind: str  # word | emoji | punct | mask


@dataclass(frozen=True)
class EmojiOccurrence:
    """One emoji grapheme; skin_tone holds the first Fitzpatrick modifier
    found in the cluster (clusters with several modifiers, e.g. couples
    with two tones, keep only the first; all are stripped from base).
    VS16 presentation selectors are stripped from base as well so both
    presentations of the same emoji count together."""

    base: str
    skin_tone: str | None = None


def _emoji_cluster(text: str, i: int) -> int:
    """Return the end index (exclusive) of the emoji cluster starting at i.

    Groups base + VS16 + skin tone modifiers + ZWJ continuations, and
    regional-indicator pairs. Assumes text[i] is a pictographic char.
    """
    n = len(text)
    cp = ord(text[i])
    j = i + 1
    if _RI_LO <= cp <= _RI_HI:
        if j < n and _RI_LO <= ord(text[j]) <= _RI_HI:
            return j + 1
        return j
    while j < n:
        ch = text[j]
        if ch == _VS16 or ch == _KEYCAP or ch in SKIN_TONE_MODIFIERS:
            j += 1
        elif ch == _ZWJ and j + 1 < n and _is_emoji_char(text[j + 1]):
            j += 2
        else:
            break
    return j


def iter_emoji_clusters(text: str):
    """Yield (start, end) spans of emoji grapheme clusters in text."""
    i, n = 0, len(text)
    while i < n:
        if _is_emoji_char(text[i]):
            j = _emoji_cluster(text, i)
            yield i, j
            i = j
        else:
            i += 1


def extract_emojis(text: str) -> list[EmojiOccurrence]:
    """One EmojiOccurrence per emoji grapheme, modifiers separated."""
    out = []
    for lo, hi in iter_emoji_clusters(text):
        cluster = text[lo:hi]
        tone = None
        base_chars = []
        for ch in cluster:
            if ch in SKIN_TONE_MODIFIERS:
                if tone is None:
                    tone = ch
            elif ch != _VS16:
                base_chars.append(ch)
        base = "".join(base_chars)
        if not base:  # lone modifier: count it under its own codepoint
            base, tone = cluster[0], None
        out.append(EmojiOccurrence(base=base, skin_tone=tone))
    return out


def tokenize(text: str) -> list[Token]:
    """Split into word/emoji/punct tokens; mask literals get kind "mask".

    Emoji grapheme clusters are single tokens; punctuation runs split into
    one token per character; concatenating all surfaces reproduces the
    input with whitespace removed.
    """
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if _is_emoji_char(ch):
            j = _emoji_cluster(text, i)
            tokens.append(Token(text[i:j], "emoji"))
            i = j
        elif _is_word_char(ch):
            j = i + 1
            while j < n and not text[j].isspace() \
                    and not _is_emoji_char(text[j]) and _is_word_char(text[j]):
                j += 1
            surface = text[i:j]
            kind = "mask" if surface in MASK_LITERALS else "word"
            tokens.append(Token(surface, kind))
            i = j
        else:
            tokens.append(Token(ch, "punct"))
            i += 1
    return tokens


def count_tokens(text: str) -> int:
    """Token count of raw text under the corpus tokenizer (words, emojis
    and punctuation all count)."""
    return len(tokenize(text))


def _strip_diacritics(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text)
    kept = [ch for ch in decomposed if unicodedata.category(ch) != "Mn"]
    return unicodedata.normalize("NFC", "".join(kept))


def _mask_emojis(text: str) -> str:
    pieces = []
    last = 0
    for lo, hi in iter_emoji_clusters(text):
        pieces.append(text[last:lo])
        pieces.append(f" {MASK_EMOJI} ")
        last = hi
    pieces.append(text[last:])
    return "".join(pieces)


def _drop_punct(text: str) -> str:
    kept = []
    for tok in tokenize(text):
        if tok.kind != "punct":
            kept.append(tok.surface)
    return " ".join(kept)


def normalize(text: str, config: NormalizationConfig = NormalizationConfig()) -> str:
    """Apply the configured normalizations; idempotent for every config."""
    if config.mask_urls:
        text = _URL_RE.sub(MASK_URL, text)
    if config.mask_users:
        text = _USER_RE.sub(MASK_USER, text)
    if config.mask_emojis:
        text = _mask_emojis(text)
    if config.lowercase:
        text = text.lower()
    if config.strip_diacritics:
        text = _strip_diacritics(text)
    if config.mask_numbers:
        text = _NUMBER_RE.sub(MASK_NUMBER, text)
    if config.drop_punct:
        text = _drop_punct(text)
    return " ".join(text.split())


def codepoints(seq: str) -> str:
    """U+XXXX notation for an emoji codepoint sequence."""
    return " ".join(f"U+{ord(ch):04X}" for ch in seq)


def parse_codepoints(notation: str) -> str:
    """Inverse of :func:`codepoints`."""
    return "".join(chr(int(part[2:], 16)) for part in notation.split())
