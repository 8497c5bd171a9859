"""Tweet text normalization, tokenization, and coarse part-of-speech tagging.

All functions here are pure over immutable inputs and therefore safe for
per-tweet data-parallel use. The tagger is a lightweight rule/lexicon
tagger over a fixed 13-symbol coarse tagset.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources as importlib_resources
from pathlib import Path

from .errors import ResourceError

# Coarse tagset: nominal, verb, adjective, adverb, determiner, preposition/
# conjunction, interjection, hashtag, mention, URL, emoticon, numeral,
# punctuation.
TAGSET = ("N", "V", "A", "R", "D", "P", "!", "#", "@", "U", "E", "$", ",")

_KIND_TAGS = {
    "url": "U",
    "hashtag": "#",
    "mention": "@",
    "emoticon": "E",
    "number": "$",
    "punctuation": ",",
}

_RESOURCE_PACKAGE = "tweetspam.resources"


@dataclass(frozen=True)
class NormalizedText:
    text: str
    original_length: int


@dataclass(frozen=True)
class Token:
    surface: str
    kind: str  # word | url | hashtag | mention | number | punctuation | emoticon | other
    start: int
    end: int

    @property
    def char_span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class TagSeq:
    tags: tuple[str, ...]
    tagset: tuple[str, ...] = field(default=TAGSET)


def resource_lines(name: str, directory: str | None = None) -> list[str]:
    """Read a resource file, skipping blank and '#'-comment lines.

    When `directory` is given and contains `name`, that file wins over the
    packaged default.
    """
    if directory is not None:
        candidate = Path(directory) / name
        if candidate.is_file():
            raw = candidate.read_text(encoding="utf-8")
        else:
            raise ResourceError(f"resource file not found: {candidate}")
    else:
        ref = importlib_resources.files(_RESOURCE_PACKAGE).joinpath(name)
        if not ref.is_file():
            raise ResourceError(f"packaged resource missing: {name}")
        raw = ref.read_text(encoding="utf-8")
    lines = []
    for line in raw.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        lines.append(line)
    return lines


def read_tsv_map(name: str, directory: str | None = None) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for line in resource_lines(name, directory):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ResourceError(f"{name}: expected 'key<TAB>value', got {line!r}")
        mapping[parts[0]] = parts[1]
    return mapping


@lru_cache(maxsize=1)
def _contractions() -> dict[str, str]:
    return {k.lower(): v for k, v in read_tsv_map("contractions.tsv").items()}


@lru_cache(maxsize=1)
def _contraction_pattern() -> re.Pattern:
    keys = sorted(_contractions(), key=len, reverse=True)
    body = "|".join(re.escape(k) for k in keys)
    return re.compile(rf"(?<!\w)(?:{body})(?!\w)", re.IGNORECASE)


def _match_case(expansion: str, original: str) -> str:
    letters = [c for c in original if c.isalpha()]
    if letters and all(c.isupper() for c in letters):
        return expansion.upper()
    if original[:1].isupper():
        return expansion[:1].upper() + expansion[1:]
    return expansion


def preprocess(raw: str) -> NormalizedText:
    """Decode HTML entities, expand contractions, collapse whitespace.

    Entity decoding runs to a fixpoint so double-encoded text such as
    "&amp;#39;" fully resolves; strings that are not standard entities pass
    through verbatim. The result never changes under a second pass.
    """
    text = raw
    for _ in range(8):  # nested encodings resolve in a few passes
        decoded = html.unescape(text)
        if decoded == text:
            break
        text = decoded
    table = _contractions()
    text = _contraction_pattern().sub(
        lambda m: _match_case(table[m.group(0).lower()], m.group(0)), text
    )
    text = " ".join(text.split())
    return NormalizedText(text=text, original_length=len(raw))


@lru_cache(maxsize=1)
def _token_pattern() -> re.Pattern:
    emoticons = sorted(
        set(resource_lines("emoticons.txt")), key=lambda e: (-len(e), e)
    )
    emoticon_body = "|".join(re.escape(e) for e in emoticons)
    return re.compile(
        "|".join(
            (
                r"(?P<url>(?:https?://|www\.)\S+)",
                rf"(?P<emoticon>{emoticon_body})",
                r"(?P<hashtag>\#\w+)",
                r"(?P<mention>@[A-Za-z0-9_]{1,15})",
                r"(?P<number>\d+(?:[.,]\d+)*)",
                r"(?P<word>[^\W\d_]\w*(?:['’][^\W\d_]+)*)",
                r"(?P<punctuation>[^\w\s])",
                r"(?P<other>\S)",
            )
        )
    )


def tokenize(normalized: NormalizedText | str) -> list[Token]:
    """Split normalized text into typed tokens with character spans.

    URLs, emoticons, hashtags and mentions are single tokens; punctuation
    comes out one character at a time; casing is preserved.
    """
    text = normalized.text if isinstance(normalized, NormalizedText) else normalized
    tokens = []
    for match in _token_pattern().finditer(text):
        tokens.append(
            Token(
                surface=match.group(),
                kind=match.lastgroup or "other",
                start=match.start(),
                end=match.end(),
            )
        )
    return tokens


def strip_for_sentiment(tokens: list[Token]) -> list[Token]:
    """Drop URL, hashtag, and mention tokens; keep everything else in order."""
    return [t for t in tokens if t.kind not in ("url", "hashtag", "mention")]


@lru_cache(maxsize=1)
def _pos_lexicon() -> dict[str, str]:
    lexicon = {}
    for token, tag in read_tsv_map("pos_lexicon.tsv").items():
        if tag not in TAGSET:
            raise ResourceError(f"pos_lexicon.tsv: unknown tag {tag!r}")
        lexicon[token.lower()] = tag
    return lexicon


_VOWELS = set("aeiou")


def _suffix_tag(word: str) -> str | None:
    if len(word) >= 4 and word.endswith("ly"):
        return "R"
    if len(word) >= 5 and word.endswith("ing"):
        return "V"
    if len(word) >= 4 and word.endswith("ed"):
        return "V"
    if len(word) >= 3 and word.endswith("s"):
        before = word[-2]
        if before.isalpha() and before not in _VOWELS:
            return "N"
    return None


def pos_tag(tokens: list[Token], lexicon: dict[str, str] | None = None) -> TagSeq:
    """Assign one coarse tag per token, deterministically.

    Token kinds carry fixed tags; words fall back to a case-insensitive
    lexicon lookup, then suffix rules (-ly adverb, -ing/-ed verb,
    consonant+s noun), then the nominal default.
    """
    if lexicon is None:
        lexicon = _pos_lexicon()
    tags = []
    for token in tokens:
        tag = _KIND_TAGS.get(token.kind)
        if tag is None:
            lowered = token.surface.lower()
            tag = lexicon.get(lowered) or _suffix_tag(lowered) or "N"
        tags.append(tag)
    return TagSeq(tags=tuple(tags))
