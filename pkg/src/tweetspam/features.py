"""Feature extraction: user/content/sentiment blocks, n-gram vocabulary,
min-max scaling, chi-square selection, and final vector assembly.

Per-tweet extraction is pure; fitting (vocabulary, scaler, mask) happens on
training data only and the fitted artifacts are immutable afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import text as text_mod
from .corpus import TweetRecord
from .errors import ConfigError, FeatureError
from .text import TAGSET, NormalizedText, TagSeq, Token, resource_lines

USER_FEATURE_NAMES = (
    "name_length",
    "description_length",
    "followings",
    "followers",
    "statuses",
    "account_age_hours",
    "follower_following_ratio",
    "reputation",
    "following_rate",
    "tweets_per_day",
    "tweets_per_week",
)

CONTENT_ATTR_NAMES = (
    "words",
    "characters",
    "white_spaces",
    "capitalization_words",
    "capitalization_words_per_word",
    "max_word_length",
    "mean_word_length",
    "exclamation_marks",
    "question_marks",
    "urls",
    "urls_per_word",
    "hashtags",
    "hashtags_per_word",
    "mentions",
    "mentions_per_word",
    "spam_words",
    "spam_words_per_word",
)

SENTIMENT_LEXICON_NAMES = ("afinn", "bingliu", "mpqa", "nrc_hashtag", "s140")
SENTIMENT_STAT_NAMES = (
    "positive_count",
    "negative_count",
    "net_score",
    "max_score",
    "last_score",
)

SKIP_DISTANCES = (1, 2, 3)  # 2-skip-bigram: ordered pairs at distance <= 3
N_TAGS = len(TAGSET)
POS_WIDTH = N_TAGS + N_TAGS * N_TAGS
USER_WIDTH = len(USER_FEATURE_NAMES)
CONTENT_WIDTH = len(CONTENT_ATTR_NAMES) + POS_WIDTH
SENTIMENT_WIDTH = len(SENTIMENT_LEXICON_NAMES) * len(SENTIMENT_STAT_NAMES)

URL_PLACEHOLDER = "<url>"
NGRAM_ORDER_NAMES = {"uni+bi": (1, 2), "bi+tri": (2, 3)}
NGRAM_WEIGHTINGS = ("binary", "tf", "tfidf")

DEFAULT_MIN_DF = 2
CHI2_FRACTION = 0.30


# ---------------------------------------------------------------------------
# feature-set configuration


@dataclass(frozen=True)
class NgramSettings:
    orders: tuple[int, ...]
    weighting: str

    def to_token(self) -> str:
        names = {v: k for k, v in NGRAM_ORDER_NAMES.items()}
        return f"ngram:{names[self.orders]}:{self.weighting}"


@dataclass(frozen=True)
class FeatureConfig:
    user: bool = False
    content: bool = False
    sentiment: bool = False
    ngram: NgramSettings | None = None

    def to_string(self) -> str:
        parts = []
        if self.user:
            parts.append("user")
        if self.content:
            parts.append("content")
        if self.sentiment:
            parts.append("sentiment")
        if self.ngram:
            parts.append(self.ngram.to_token())
        return ",".join(parts)


def parse_feature_config(value: str) -> FeatureConfig:
    """Parse a feature-set string such as "user,ngram:uni+bi:tf"."""
    user = content = sentiment = False
    ngram: NgramSettings | None = None
    tokens = [t.strip() for t in value.split(",") if t.strip()]
    if not tokens:
        raise ConfigError("feature configuration is empty")
    for token in tokens:
        if token == "user":
            if user:
                raise ConfigError("duplicate feature token 'user'")
            user = True
        elif token == "content":
            if content:
                raise ConfigError("duplicate feature token 'content'")
            content = True
        elif token == "sentiment":
            if sentiment:
                raise ConfigError("duplicate feature token 'sentiment'")
            sentiment = True
        elif token.startswith("ngram:"):
            if ngram is not None:
                raise ConfigError("duplicate feature token 'ngram'")
            parts = token.split(":")
            if len(parts) != 3:
                raise ConfigError(
                    f"invalid ngram token {token!r}; expected ngram:<orders>:<weighting>"
                )
            _, orders_name, weighting = parts
            if orders_name not in NGRAM_ORDER_NAMES:
                raise ConfigError(
                    f"invalid ngram order {orders_name!r}; expected one of "
                    + ", ".join(sorted(NGRAM_ORDER_NAMES))
                )
            if weighting not in NGRAM_WEIGHTINGS:
                raise ConfigError(
                    f"invalid ngram weighting {weighting!r}; expected one of "
                    + ", ".join(NGRAM_WEIGHTINGS)
                )
            ngram = NgramSettings(orders=NGRAM_ORDER_NAMES[orders_name], weighting=weighting)
        else:
            raise ConfigError(f"unknown feature token {token!r}")
    return FeatureConfig(user=user, content=content, sentiment=sentiment, ngram=ngram)


# ---------------------------------------------------------------------------
# shipped lexicons


@dataclass(frozen=True)
class ResourceBundle:
    """Score maps and spam phrases backing the sentiment/content features."""

    sentiment_lexicons: dict[str, dict[str, float]]
    spam_phrases: tuple[str, ...]

    @classmethod
    def load(cls, directory: str | None = None) -> "ResourceBundle":
        lexicons = {}
        for name in SENTIMENT_LEXICON_NAMES:
            mapping = {}
            for token, score in text_mod.read_tsv_map(f"{name}.tsv", directory).items():
                mapping[token.lower()] = float(score)
            lexicons[name] = mapping
        phrases = tuple(
            line.strip().lower() for line in resource_lines("spamwords.txt", directory)
        )
        return cls(sentiment_lexicons=lexicons, spam_phrases=phrases)


@lru_cache(maxsize=1)
def default_resources() -> ResourceBundle:
    return ResourceBundle.load()


# ---------------------------------------------------------------------------
# user features


@dataclass(frozen=True)
class UserFeatureBlock:
    name_length: float
    description_length: float
    followings: float
    followers: float
    statuses: float
    account_age_hours: float
    follower_following_ratio: float
    reputation: float
    following_rate: float
    tweets_per_day: float
    tweets_per_week: float

    def to_array(self) -> np.ndarray:
        return np.asarray(
            [getattr(self, name) for name in USER_FEATURE_NAMES], dtype=np.float64
        )


def user_features(record: TweetRecord) -> UserFeatureBlock:
    """Eleven metadata-derived reals; zero-denominator cases map to 0."""
    user = record.user
    age_hours = (record.created_at - user.account_created_at).total_seconds() / 3600.0
    if age_hours < 0:
        raise ValueError(
            f"tweet {record.tweet_id}: negative account age at tweet time"
        )
    followings = float(user.followings_count)
    followers = float(user.followers_count)
    statuses = float(user.statuses_count)
    ratio = followers / followings if followings > 0 else 0.0
    reputation = followers / (followings + followers) if followings + followers > 0 else 0.0
    if age_hours > 0:
        following_rate = followings / age_hours
        tweets_per_day = statuses / (age_hours / 24.0)
        tweets_per_week = statuses / (age_hours / 168.0)
    else:
        following_rate = tweets_per_day = tweets_per_week = 0.0
    return UserFeatureBlock(
        name_length=float(len(user.profile_name)),
        description_length=float(len(user.profile_description)),
        followings=followings,
        followers=followers,
        statuses=statuses,
        account_age_hours=age_hours,
        follower_following_ratio=ratio,
        reputation=reputation,
        following_rate=following_rate,
        tweets_per_day=tweets_per_day,
        tweets_per_week=tweets_per_week,
    )


# ---------------------------------------------------------------------------
# content features


class SpamPhraseMatcher:
    """Counts occurrences of lexicon phrases in a lowercased word stream.

    Phrases are matched as contiguous word-token subsequences, so a list
    entry can never fire inside another word.
    """

    def __init__(self, phrases):
        self._by_first: dict[str, list[tuple[str, ...]]] = {}
        for phrase in phrases:
            words = tuple(phrase.lower().split())
            if not words:
                continue
            self._by_first.setdefault(words[0], []).append(words)

    def count(self, words: list[str]) -> int:
        hits = 0
        by_first = self._by_first
        n = len(words)
        for i, word in enumerate(words):
            candidates = by_first.get(word)
            if not candidates:
                continue
            for phrase in candidates:
                end = i + len(phrase)
                if end <= n and tuple(words[i:end]) == phrase:
                    hits += 1
        return hits


@lru_cache(maxsize=8)
def _cached_matcher(phrases: tuple[str, ...]) -> SpamPhraseMatcher:
    return SpamPhraseMatcher(phrases)


_TAG_INDEX = {tag: i for i, tag in enumerate(TAGSET)}


def pos_counts(tags: TagSeq) -> np.ndarray:
    """13 tag-unigram counts followed by 169 skip-bigram pair counts.

    Pairs (t_i, t_{i+d}) are counted for d in {1, 2, 3} and stored row-major
    by (first tag, second tag) in tagset order.
    """
    counts = np.zeros(POS_WIDTH, dtype=np.float64)
    indices = [_TAG_INDEX[t] for t in tags.tags]
    for idx in indices:
        counts[idx] += 1.0
    n = len(indices)
    for d in SKIP_DISTANCES:
        for i in range(n - d):
            counts[N_TAGS + indices[i] * N_TAGS + indices[i + d]] += 1.0
    return counts


def _is_shouted(surface: str) -> bool:
    letters = [c for c in surface if c.isalpha()]
    return bool(letters) and all(c.isupper() for c in letters)


@dataclass(frozen=True)
class ContentFeatureBlock:
    words: float
    characters: float
    white_spaces: float
    capitalization_words: float
    capitalization_words_per_word: float
    max_word_length: float
    mean_word_length: float
    exclamation_marks: float
    question_marks: float
    urls: float
    urls_per_word: float
    hashtags: float
    hashtags_per_word: float
    mentions: float
    mentions_per_word: float
    spam_words: float
    spam_words_per_word: float
    pos: np.ndarray  # POS_WIDTH counts

    def to_array(self) -> np.ndarray:
        attrs = np.asarray(
            [getattr(self, name) for name in CONTENT_ATTR_NAMES], dtype=np.float64
        )
        return np.concatenate([attrs, self.pos])


def content_features(
    record: TweetRecord,
    tokens: list[Token],
    tags: TagSeq,
    spam_lexicon,
    normalized: NormalizedText | None = None,
    include_spam_words: bool = True,
    include_pos: bool = True,
) -> ContentFeatureBlock:
    """Seventeen content attributes plus the POS count sub-block.

    `include_spam_words` / `include_pos` exist for the timing benchmark's
    ablation rows; production extraction always uses both.
    """
    if len(tags.tags) != len(tokens):
        raise ValueError("tags are not aligned with tokens")
    if normalized is None:
        normalized = text_mod.preprocess(record.text)
    text = normalized.text

    word_tokens = [t for t in tokens if t.kind == "word"]
    n_words = len(word_tokens)
    lengths = [len(t.surface) for t in word_tokens]
    n_caps = sum(1 for t in word_tokens if _is_shouted(t.surface))
    n_urls = sum(1 for t in tokens if t.kind == "url")
    n_hashtags = sum(1 for t in tokens if t.kind == "hashtag")
    n_mentions = sum(1 for t in tokens if t.kind == "mention")

    if include_spam_words:
        if isinstance(spam_lexicon, SpamPhraseMatcher):
            matcher = spam_lexicon
        else:
            matcher = _cached_matcher(tuple(spam_lexicon))
        n_spam = matcher.count([t.surface.lower() for t in word_tokens])
    else:
        n_spam = 0

    def per_word(count: float) -> float:
        return count / n_words if n_words > 0 else 0.0

    pos = pos_counts(tags) if include_pos else np.zeros(POS_WIDTH, dtype=np.float64)
    return ContentFeatureBlock(
        words=float(n_words),
        characters=float(len(text)),
        white_spaces=float(text.count(" ")),
        capitalization_words=float(n_caps),
        capitalization_words_per_word=per_word(n_caps),
        max_word_length=float(max(lengths) if lengths else 0),
        mean_word_length=(sum(lengths) / n_words) if n_words > 0 else 0.0,
        exclamation_marks=float(text.count("!")),
        question_marks=float(text.count("?")),
        urls=float(n_urls),
        urls_per_word=per_word(n_urls),
        hashtags=float(n_hashtags),
        hashtags_per_word=per_word(n_hashtags),
        mentions=float(n_mentions),
        mentions_per_word=per_word(n_mentions),
        spam_words=float(n_spam),
        spam_words_per_word=per_word(n_spam),
        pos=pos,
    )


# ---------------------------------------------------------------------------
# sentiment features


@dataclass(frozen=True)
class SentimentFeatureBlock:
    values: tuple[float, ...]  # 5 stats per lexicon, lexicons in fixed order

    def for_lexicon(self, name: str) -> tuple[float, ...]:
        i = SENTIMENT_LEXICON_NAMES.index(name) * len(SENTIMENT_STAT_NAMES)
        return self.values[i : i + len(SENTIMENT_STAT_NAMES)]

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def sentiment_features(
    stripped_tokens: list[Token], lexicons: dict[str, dict[str, float]]
) -> SentimentFeatureBlock:
    """Per lexicon: positive count, negative count, net, max, last score.

    Tokens must already be stripped of URLs, hashtags, and mentions.
    Lookups are case-insensitive; unmatched tokens contribute nothing.
    """
    surfaces = [t.surface.lower() for t in stripped_tokens]
    values: list[float] = []
    for name in SENTIMENT_LEXICON_NAMES:
        try:
            table = lexicons[name]
        except KeyError:
            raise ValueError(f"missing sentiment lexicon '{name}'") from None
        positive = negative = 0
        net = 0.0
        max_score = 0.0
        last = 0.0
        matched = False
        for surface in surfaces:
            score = table.get(surface)
            if score is None:
                continue
            if score > 0:
                positive += 1
            elif score < 0:
                negative += 1
            net += score
            max_score = score if not matched else max(max_score, score)
            last = score
            matched = True
        values.extend((float(positive), float(negative), net, max_score, last))
    return SentimentFeatureBlock(values=tuple(values))


# ---------------------------------------------------------------------------
# n-gram vocabulary and vectorization


def ngram_tokens(tokens: list[Token]) -> list[str]:
    """Token stream feeding the n-gram features: lowercased words, hashtags
    and mentions, with URLs collapsed to a placeholder."""
    stream = []
    for token in tokens:
        if token.kind in ("word", "hashtag", "mention"):
            stream.append(token.surface.lower())
        elif token.kind == "url":
            stream.append(URL_PLACEHOLDER)
    return stream


def _terms(stream: list[str], orders: tuple[int, ...]):
    for order in orders:
        for i in range(len(stream) - order + 1):
            yield "_".join(stream[i : i + order])


@dataclass(frozen=True)
class Vocabulary:
    orders: tuple[int, ...]
    term_to_col: dict[str, int]
    doc_freq: np.ndarray  # int64 per column
    n_docs: int
    min_df: int

    @property
    def width(self) -> int:
        return len(self.term_to_col)

    def terms_in_order(self) -> list[str]:
        ordered = [""] * self.width
        for term, col in self.term_to_col.items():
            ordered[col] = term
        return ordered

    def to_dict(self) -> dict:
        terms = self.terms_in_order()
        return {
            "orders": list(self.orders),
            "min_df": self.min_df,
            "n_docs": self.n_docs,
            "terms": [[t, int(self.doc_freq[i])] for i, t in enumerate(terms)],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Vocabulary":
        terms = obj["terms"]
        return cls(
            orders=tuple(obj["orders"]),
            term_to_col={t: i for i, (t, _) in enumerate(terms)},
            doc_freq=np.asarray([df for _, df in terms], dtype=np.int64),
            n_docs=int(obj["n_docs"]),
            min_df=int(obj["min_df"]),
        )


def build_vocabulary(
    docs: list[list[str]], orders: tuple[int, ...], min_df: int = DEFAULT_MIN_DF
) -> Vocabulary:
    """Fit an n-gram vocabulary over token streams (training docs only).

    Terms below the document-frequency threshold are dropped; columns are
    assigned in lexicographic term order so fitted models are reproducible.
    """
    if not docs:
        raise FeatureError("cannot fit a vocabulary on an empty corpus")
    df_counts: dict[str, int] = {}
    for stream in docs:
        for term in set(_terms(stream, orders)):
            df_counts[term] = df_counts.get(term, 0) + 1
    kept = sorted(t for t, df in df_counts.items() if df >= min_df)
    if not kept:
        raise FeatureError(
            f"vocabulary is empty after pruning terms with df < {min_df}"
        )
    term_to_col = {term: i for i, term in enumerate(kept)}
    doc_freq = np.asarray([df_counts[t] for t in kept], dtype=np.int64)
    return Vocabulary(
        orders=tuple(orders),
        term_to_col=term_to_col,
        doc_freq=doc_freq,
        n_docs=len(docs),
        min_df=min_df,
    )


def _idf(vocab: Vocabulary) -> np.ndarray:
    return np.log((1.0 + vocab.n_docs) / (1.0 + vocab.doc_freq)) + 1.0


def ngram_vectorize(
    stream: list[str], vocab: Vocabulary, weighting: str
) -> list[tuple[int, float]]:
    """One document's sparse n-gram block as sorted (column, value) pairs.

    tf-idf uses idf = ln((1+N)/(1+df)) + 1 and L2-normalizes the document
    vector whenever at least one term matched. Unseen terms are ignored.
    """
    if weighting not in NGRAM_WEIGHTINGS:
        raise ConfigError(f"unknown weighting {weighting!r}")
    counts: dict[int, float] = {}
    term_to_col = vocab.term_to_col
    for term in _terms(stream, vocab.orders):
        col = term_to_col.get(term)
        if col is not None:
            counts[col] = counts.get(col, 0.0) + 1.0
    if not counts:
        return []
    cols = sorted(counts)
    if weighting == "binary":
        return [(c, 1.0) for c in cols]
    if weighting == "tf":
        return [(c, counts[c]) for c in cols]
    idf = _idf(vocab)
    weights = [counts[c] * idf[c] for c in cols]
    norm = math.sqrt(sum(w * w for w in weights))
    return [(c, w / norm) for c, w in zip(cols, weights)]


def gram_matrix(
    streams: list[list[str]], vocab: Vocabulary, weighting: str
) -> sp.csr_matrix:
    """Stack per-document sparse blocks into a CSR matrix."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for stream in streams:
        for col, value in ngram_vectorize(stream, vocab, weighting):
            indices.append(col)
            data.append(value)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int32)),
        shape=(len(streams), vocab.width),
    )


# ---------------------------------------------------------------------------
# scaling and selection


@dataclass(frozen=True)
class Scaler:
    mins: np.ndarray
    maxs: np.ndarray

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "Scaler":
        return cls(
            mins=np.asarray(obj["mins"], dtype=np.float64),
            maxs=np.asarray(obj["maxs"], dtype=np.float64),
        )


def fit_scaler(dense: np.ndarray) -> Scaler:
    if dense.ndim != 2 or dense.shape[0] < 1:
        raise FeatureError("scaler needs at least one training vector")
    return Scaler(mins=dense.min(axis=0), maxs=dense.max(axis=0))


def apply_scaler(scaler: Scaler, dense: np.ndarray) -> np.ndarray:
    """Map each column into [-1, 1]; constant columns become 0; values are
    clipped so out-of-range inputs at predict time stay bounded."""
    span = scaler.maxs - scaler.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = 2.0 * (dense - scaler.mins) / safe - 1.0
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, -1.0, 1.0)


@dataclass(frozen=True)
class FeatureMask:
    kept: np.ndarray  # sorted column indices
    scores: np.ndarray  # chi-square score per original column

    def to_dict(self) -> dict:
        return {"kept": self.kept.tolist(), "scores": self.scores.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "FeatureMask":
        return cls(
            kept=np.asarray(obj["kept"], dtype=np.int64),
            scores=np.asarray(obj["scores"], dtype=np.float64),
        )


def chi2_select(X, y: np.ndarray, fraction: float) -> FeatureMask:
    """Rank features by chi-square between per-class mass and class priors.

    Scores are computed on magnitudes of the unscaled values. Keeps the top
    ceil(fraction * d) columns, breaking score ties by lower column index.
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"selection fraction must be in (0, 1], got {fraction}")
    y = np.asarray(y)
    n = y.shape[0]
    A = abs(X)
    observed = []
    class_fractions = []
    for cls in (0, 1):
        rows = np.flatnonzero(y == cls)
        class_fractions.append(len(rows) / n)
        mass = np.asarray(A[rows].sum(axis=0)).reshape(-1)
        observed.append(mass)
    total = observed[0] + observed[1]
    scores = np.zeros(total.shape[0], dtype=np.float64)
    for cls in (0, 1):
        expected = total * class_fractions[cls]
        nonzero = expected > 0
        diff = observed[cls][nonzero] - expected[nonzero]
        scores[nonzero] += diff * diff / expected[nonzero]
    d = scores.shape[0]
    keep = math.ceil(fraction * d)
    order = np.lexsort((np.arange(d), -scores))
    kept = np.sort(order[:keep])
    return FeatureMask(kept=kept, scores=scores)


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class BlockLayout:
    dense_blocks: tuple[tuple[str, int], ...]  # (name, width), canonical order
    ngram_width: int

    @property
    def dense_width(self) -> int:
        return sum(width for _, width in self.dense_blocks)

    @property
    def total_width(self) -> int:
        return self.dense_width + self.ngram_width

    def offsets(self) -> dict[str, tuple[int, int]]:
        table = {}
        offset = 0
        for name, width in self.dense_blocks:
            table[name] = (offset, offset + width)
            offset += width
        if self.ngram_width:
            table["ngram"] = (offset, offset + self.ngram_width)
        return table


def layout_for(config: FeatureConfig, ngram_width: int = 0) -> BlockLayout:
    blocks = []
    if config.user:
        blocks.append(("user", USER_WIDTH))
    if config.content:
        blocks.append(("content", CONTENT_WIDTH))
    if config.sentiment:
        blocks.append(("sentiment", SENTIMENT_WIDTH))
    return BlockLayout(
        dense_blocks=tuple(blocks),
        ngram_width=ngram_width if config.ngram else 0,
    )


@dataclass(frozen=True)
class FeatureVector:
    layout: BlockLayout
    dense: np.ndarray
    sparse: tuple[tuple[int, float], ...]  # n-gram (column, value) pairs


def assemble(
    layout: BlockLayout,
    user: UserFeatureBlock | None = None,
    content: ContentFeatureBlock | None = None,
    sentiment: SentimentFeatureBlock | None = None,
    ngram: list[tuple[int, float]] | None = None,
) -> FeatureVector:
    """Concatenate blocks into the fixed layout; missing or surplus blocks
    relative to the layout are an error."""
    provided = {"user": user, "content": content, "sentiment": sentiment}
    parts = []
    expected = {name for name, _ in layout.dense_blocks}
    for name, block in provided.items():
        if name in expected:
            if block is None:
                raise ValueError(f"layout expects block '{name}' but none was given")
            parts.append(block.to_array())
        elif block is not None:
            raise ValueError(f"block '{name}' does not belong to this layout")
    if layout.ngram_width:
        pairs = tuple(ngram or [])
        for col, _ in pairs:
            if not 0 <= col < layout.ngram_width:
                raise ValueError(f"ngram column {col} outside layout width")
    else:
        if ngram:
            raise ValueError("ngram block does not belong to this layout")
        pairs = ()
    dense = np.concatenate(parts) if parts else np.zeros(0, dtype=np.float64)
    if dense.shape[0] != layout.dense_width:
        raise ValueError(
            f"dense width {dense.shape[0]} does not match layout {layout.dense_width}"
        )
    return FeatureVector(layout=layout, dense=dense, sparse=pairs)


# ---------------------------------------------------------------------------
# per-record preparation and the fitted pipeline


@dataclass(frozen=True)
class PreparedTweet:
    """Everything fitting-free that feature extraction needs, computed once."""

    user_block: UserFeatureBlock
    content_block: ContentFeatureBlock
    sentiment_block: SentimentFeatureBlock
    gram_stream: tuple[str, ...]


def prepare_record(record: TweetRecord, resources: ResourceBundle) -> PreparedTweet:
    normalized = text_mod.preprocess(record.text)
    tokens = text_mod.tokenize(normalized)
    tags = text_mod.pos_tag(tokens)
    stripped = text_mod.strip_for_sentiment(tokens)
    return PreparedTweet(
        user_block=user_features(record),
        content_block=content_features(
            record, tokens, tags, resources.spam_phrases, normalized=normalized
        ),
        sentiment_block=sentiment_features(stripped, resources.sentiment_lexicons),
        gram_stream=tuple(ngram_tokens(tokens)),
    )


def prepare_records(records, resources: ResourceBundle) -> list[PreparedTweet]:
    return [prepare_record(r, resources) for r in records]


@dataclass
class FittedPipeline:
    """Fitted featurization state bundled with a trained model."""

    config: FeatureConfig
    scaler: Scaler
    vocab: Vocabulary | None = None
    mask: FeatureMask | None = None

    @property
    def layout(self) -> BlockLayout:
        return layout_for(self.config, self.vocab.width if self.vocab else 0)

    def dense_matrix(self, prepared: list[PreparedTweet]) -> np.ndarray:
        width = self.layout.dense_width
        out = np.zeros((len(prepared), width), dtype=np.float64)
        for row, p in enumerate(prepared):
            parts = []
            if self.config.user:
                parts.append(p.user_block.to_array())
            if self.config.content:
                parts.append(p.content_block.to_array())
            if self.config.sentiment:
                parts.append(p.sentiment_block.to_array())
            if parts:
                out[row] = np.concatenate(parts)
        return out

    def matrices(self, prepared: list[PreparedTweet]):
        """Return (X_raw, X_scaled) CSR design matrices.

        Scaling touches only the dense block columns; the n-gram block is
        already bounded by its weighting scheme.
        """
        dense = self.dense_matrix(prepared)
        scaled = apply_scaler(self.scaler, dense) if dense.shape[1] else dense
        if self.config.ngram:
            grams = gram_matrix(
                [list(p.gram_stream) for p in prepared],
                self.vocab,
                self.config.ngram.weighting,
            )
            raw = sp.hstack([sp.csr_matrix(dense), grams], format="csr")
            out = sp.hstack([sp.csr_matrix(scaled), grams], format="csr")
        else:
            raw = sp.csr_matrix(dense)
            out = sp.csr_matrix(scaled)
        return raw, out

    def featurize(self, record: TweetRecord, resources: ResourceBundle) -> FeatureVector:
        prepared = prepare_record(record, resources)
        ngram_pairs = None
        if self.config.ngram:
            ngram_pairs = ngram_vectorize(
                list(prepared.gram_stream), self.vocab, self.config.ngram.weighting
            )
        return assemble(
            self.layout,
            user=prepared.user_block if self.config.user else None,
            content=prepared.content_block if self.config.content else None,
            sentiment=prepared.sentiment_block if self.config.sentiment else None,
            ngram=ngram_pairs,
        )

    def to_dict(self) -> dict:
        return {
            "feature_config": self.config.to_string(),
            "vocabulary": self.vocab.to_dict() if self.vocab else None,
            "scaler": self.scaler.to_dict(),
            "mask": self.mask.to_dict() if self.mask else None,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FittedPipeline":
        return cls(
            config=parse_feature_config(obj["feature_config"]),
            scaler=Scaler.from_dict(obj["scaler"]),
            vocab=Vocabulary.from_dict(obj["vocabulary"]) if obj.get("vocabulary") else None,
            mask=FeatureMask.from_dict(obj["mask"]) if obj.get("mask") else None,
        )


def fit_pipeline(
    prepared: list[PreparedTweet],
    labels: np.ndarray,
    config: FeatureConfig,
    min_df: int = DEFAULT_MIN_DF,
    select_fraction: float | None = None,
) -> FittedPipeline:
    """Fit vocabulary, scaler, and (optionally) the chi-square mask on
    training data only."""
    if not prepared:
        raise FeatureError("cannot fit a pipeline on an empty training set")
    vocab = None
    if config.ngram:
        vocab = build_vocabulary(
            [list(p.gram_stream) for p in prepared], config.ngram.orders, min_df
        )
    pipeline = FittedPipeline(config=config, scaler=Scaler(np.zeros(0), np.zeros(0)), vocab=vocab)
    dense = pipeline.dense_matrix(prepared)
    pipeline.scaler = fit_scaler(dense) if dense.shape[1] else Scaler(
        mins=np.zeros(0), maxs=np.zeros(0)
    )
    if select_fraction is not None:
        raw, _ = pipeline.matrices(prepared)
        pipeline.mask = chi2_select(raw, np.asarray(labels), select_fraction)
    return pipeline
