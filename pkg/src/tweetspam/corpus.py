"""Labeled tweet corpora: loading, validation, per-user sampling, fold plans.

Corpus files are JSON Lines (UTF-8), one tweet object per line. Records are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import CorpusError

SPAM = "spam"
HAM = "ham"
UNLABELED = "unlabeled"
LABELS = (HAM, SPAM)

MAX_TEXT_CHARS = 1000


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 UTC timestamp; naive values are taken as UTC."""
    if not isinstance(value, str):
        raise ValueError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def render_timestamp(value: datetime) -> str:
    text = value.astimezone(timezone.utc).isoformat()
    return text.replace("+00:00", "Z")


@dataclass(frozen=True)
class UserMetadata:
    profile_name: str
    profile_description: str
    followings_count: int
    followers_count: int
    statuses_count: int
    account_created_at: datetime


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    user_id: str
    text: str
    created_at: datetime
    label: str  # "spam" | "ham" | "unlabeled"
    user: UserMetadata


@dataclass(frozen=True)
class LabeledCorpus:
    records: tuple[TweetRecord, ...]
    skipped_count: int = 0

    def __len__(self) -> int:
        return len(self.records)

    @property
    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for record in self.records:
            counts[record.label] = counts.get(record.label, 0) + 1
        return counts

    def require_labeled(self) -> None:
        unlabeled = sum(1 for r in self.records if r.label == UNLABELED)
        if unlabeled:
            raise CorpusError(
                f"{unlabeled} unlabeled record(s); labels are required for "
                "training or evaluation"
            )


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple[int, ...]  # record index -> fold id
    seed: int

    def fold_indices(self, fold: int) -> tuple[list[int], list[int]]:
        """Return (train_indices, test_indices) for one fold."""
        train = [i for i, f in enumerate(self.assignments) if f != fold]
        test = [i for i, f in enumerate(self.assignments) if f == fold]
        return train, test


def _require(obj: dict, field: str, line_no: int):
    if field not in obj:
        raise CorpusError(f"line {line_no}: missing field '{field}'")
    return obj[field]


def _nonneg_int(value, field: str, line_no: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise CorpusError(f"line {line_no}: field '{field}' must be an integer")
    if value < 0:
        raise CorpusError(f"line {line_no}: field '{field}' must be >= 0")
    return value


def _parse_record(obj: dict, line_no: int, require_labels: bool) -> TweetRecord:
    tweet_id = _require(obj, "tweet_id", line_no)
    user_id = _require(obj, "user_id", line_no)
    if not isinstance(tweet_id, str) or not tweet_id:
        raise CorpusError(f"line {line_no}: tweet_id must be a non-empty string")
    if not isinstance(user_id, str) or not user_id:
        raise CorpusError(f"line {line_no}: user_id must be a non-empty string")

    text = _require(obj, "text", line_no)
    if not isinstance(text, str) or not text.strip():
        raise CorpusError(f"line {line_no}: text must be non-empty")
    if len(text) > MAX_TEXT_CHARS:
        raise CorpusError(
            f"line {line_no}: text longer than {MAX_TEXT_CHARS} characters"
        )

    try:
        created_at = parse_timestamp(_require(obj, "created_at", line_no))
    except (ValueError, TypeError) as exc:
        raise CorpusError(f"line {line_no}: malformed timestamp: {exc}") from exc

    label = obj.get("label")
    if label is None:
        if require_labels:
            raise CorpusError(f"line {line_no}: missing field 'label'")
        label = UNLABELED
    elif label not in LABELS:
        raise CorpusError(f"line {line_no}: unknown label {label!r}")

    user_obj = _require(obj, "user", line_no)
    if not isinstance(user_obj, dict):
        raise CorpusError(f"line {line_no}: field 'user' must be an object")
    name = _require(user_obj, "name", line_no)
    description = user_obj.get("description", "")
    if not isinstance(name, str):
        raise CorpusError(f"line {line_no}: user.name must be a string")
    if not isinstance(description, str):
        raise CorpusError(f"line {line_no}: user.description must be a string")
    try:
        account_created = parse_timestamp(_require(user_obj, "created_at", line_no))
    except (ValueError, TypeError) as exc:
        raise CorpusError(f"line {line_no}: malformed timestamp: {exc}") from exc

    user = UserMetadata(
        profile_name=name,
        profile_description=description,
        followings_count=_nonneg_int(
            _require(user_obj, "followings_count", line_no), "user.followings_count", line_no
        ),
        followers_count=_nonneg_int(
            _require(user_obj, "followers_count", line_no), "user.followers_count", line_no
        ),
        statuses_count=_nonneg_int(
            _require(user_obj, "statuses_count", line_no), "user.statuses_count", line_no
        ),
        account_created_at=account_created,
    )

    if created_at < account_created:
        raise CorpusError(
            f"line {line_no}: tweet created_at precedes account creation"
        )

    return TweetRecord(
        tweet_id=tweet_id,
        user_id=user_id,
        text=text,
        created_at=created_at,
        label=label,
        user=user,
    )


def load_corpus(path: str, strict: bool = True, require_labels: bool = True) -> LabeledCorpus:
    """Load a JSONL corpus.

    In strict mode any invalid line raises CorpusError; in lenient mode
    invalid lines are skipped and counted. A user carrying both labels is
    a corpus-level inconsistency and always raises.
    """
    records: list[TweetRecord] = []
    seen_ids: set[str] = set()
    user_labels: dict[str, str] = {}
    skipped = 0

    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise CorpusError(f"line {line_no}: expected a JSON object")
                record = _parse_record(obj, line_no, require_labels)
                if record.tweet_id in seen_ids:
                    raise CorpusError(
                        f"line {line_no}: duplicate tweet_id '{record.tweet_id}'"
                    )
            except (CorpusError, json.JSONDecodeError) as exc:
                if strict:
                    if isinstance(exc, json.JSONDecodeError):
                        raise CorpusError(f"line {line_no}: invalid JSON: {exc}") from exc
                    raise
                skipped += 1
                continue
            seen_ids.add(record.tweet_id)
            records.append(record)

    for record in records:
        if record.label == UNLABELED:
            continue
        previous = user_labels.setdefault(record.user_id, record.label)
        if previous != record.label:
            raise CorpusError(
                f"user '{record.user_id}' appears with both labels; "
                "remove duplicated users before loading"
            )

    return LabeledCorpus(records=tuple(records), skipped_count=skipped)


def record_to_dict(record: TweetRecord) -> dict:
    obj = {
        "tweet_id": record.tweet_id,
        "user_id": record.user_id,
        "text": record.text,
        "created_at": render_timestamp(record.created_at),
        "user": {
            "name": record.user.profile_name,
            "description": record.user.profile_description,
            "followings_count": record.user.followings_count,
            "followers_count": record.user.followers_count,
            "statuses_count": record.user.statuses_count,
            "created_at": render_timestamp(record.user.account_created_at),
        },
    }
    if record.label != UNLABELED:
        obj["label"] = record.label
    return obj


def sample_one_per_user(corpus: LabeledCorpus, seed: int) -> LabeledCorpus:
    """Keep exactly one uniformly chosen tweet per user (seeded).

    Users are visited in first-appearance order so the selection is
    deterministic for a fixed seed; output preserves corpus order.
    """
    if not corpus.records:
        raise CorpusError("cannot sample from an empty corpus")
    by_user: dict[str, list[int]] = {}
    for index, record in enumerate(corpus.records):
        by_user.setdefault(record.user_id, []).append(index)

    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for indices in by_user.values():
        chosen.append(indices[int(rng.integers(0, len(indices)))])
    chosen.sort()
    return LabeledCorpus(records=tuple(corpus.records[i] for i in chosen))


def stratified_kfold(corpus: LabeledCorpus, k: int, seed: int) -> FoldPlan:
    """Assign each record to one of k folds, preserving the class ratio.

    Per class, fold quotas differ by at most one; classes hand their
    remainder to the currently smallest folds so overall fold sizes also
    differ by at most one.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    corpus.require_labeled()

    by_label: dict[str, list[int]] = {}
    for index, record in enumerate(corpus.records):
        by_label.setdefault(record.label, []).append(index)
    for label, indices in sorted(by_label.items()):
        if len(indices) < k:
            raise CorpusError(
                f"class '{label}' has {len(indices)} records; need at least k={k}"
            )

    rng = np.random.default_rng(seed)
    assignments = [-1] * len(corpus.records)
    fold_sizes = [0] * k
    for label in sorted(by_label):
        indices = by_label[label]
        shuffled = [indices[i] for i in rng.permutation(len(indices))]
        base, remainder = divmod(len(indices), k)
        quotas = [base] * k
        for fold in sorted(range(k), key=lambda f: (fold_sizes[f], f))[:remainder]:
            quotas[fold] += 1
        position = 0
        for fold in range(k):
            for index in shuffled[position : position + quotas[fold]]:
                assignments[index] = fold
            fold_sizes[fold] += quotas[fold]
            position += quotas[fold]

    return FoldPlan(k=k, assignments=tuple(assignments), seed=seed)
