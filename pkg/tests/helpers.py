"""Shared builders: tiny record factories and the planted-signal corpus."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from tweetspam.corpus import LabeledCorpus, TweetRecord, UserMetadata, record_to_dict
from tweetspam.features import default_resources
from tweetspam.serialize import canonical_json

BASE_TIME = datetime(2011, 6, 1, 12, 0, 0, tzinfo=timezone.utc)


def make_user(
    name="user",
    description="",
    followings=100,
    followers=100,
    statuses=500,
    age_hours=24 * 365,
):
    return UserMetadata(
        profile_name=name,
        profile_description=description,
        followings_count=followings,
        followers_count=followers,
        statuses_count=statuses,
        account_created_at=BASE_TIME - timedelta(hours=age_hours),
    )


def make_record(
    tweet_id,
    text,
    label="ham",
    user_id=None,
    user=None,
    created_at=BASE_TIME,
):
    return TweetRecord(
        tweet_id=tweet_id,
        user_id=user_id or f"user-{tweet_id}",
        text=text,
        created_at=created_at,
        label=label,
        user=user or make_user(),
    )


def corpus_of(records) -> LabeledCorpus:
    return LabeledCorpus(records=tuple(records))


def write_corpus(path, corpus: LabeledCorpus) -> None:
    lines = [canonical_json(record_to_dict(r)) + "\n" for r in corpus.records]
    path = str(path)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("".join(lines))


HAM_FRAGMENTS = (
    "just got home from work",
    "watching the game with friends tonight",
    "this coffee is amazing today",
    "can not wait for the weekend",
    "my dog is being silly again",
    "studying for my exam tomorrow",
    "great dinner with the family",
    "listening to my favorite song right now",
    "traffic was terrible this morning",
    "anyone else watching the show tonight",
    "so tired after practice",
    "happy birthday to my best friend",
    "reading a really good book",
    "what a beautiful day outside",
    "need more coffee this morning",
    "finally finished my homework",
    "lunch with my mom today was lovely",
    "the weather is so nice out here",
    "missed the bus again this morning",
    "thinking about dinner plans already",
    "my cat knocked over the plant again",
    "new episode tonight so excited",
    "long day at school but it was fun",
    "made pancakes for breakfast",
    "walking in the park with the kids",
)

SPAM_FRAGMENTS = (
    "check this out right away",
    "you will not believe this",
    "amazing opportunity just for you",
            "do not miss out on this",
    "limited spots available today",
    "sign up today and start earning",
    "this changed my life forever",
    "best deal on the internet",
    "everyone is talking about this",
    "start today no experience needed",
)

# word-only phrases from the shipped list match the word-token stream
_SPAM_PHRASES = tuple(
    p for p in default_resources().spam_phrases if all(w.isalpha() for w in p.split())
)


def planted_corpus(n_ham=2000, n_spam=500, seed=20260810) -> LabeledCorpus:
    """Synthetic corpus with a known spam signal.

    Ham: benign phrase pool, balanced follower counts. Spam: shipped
    spam-lexicon phrases injected with p=0.8, a URL with p=0.9, and an
    extreme followings/followers ratio.
    """
    rng = np.random.default_rng(seed)
    records = []

    for i in range(n_ham):
        parts = [HAM_FRAGMENTS[rng.integers(0, len(HAM_FRAGMENTS))]]
        if rng.random() < 0.4:
            parts.append(HAM_FRAGMENTS[rng.integers(0, len(HAM_FRAGMENTS))])
        if rng.random() < 0.15:
            parts.append(f"@friend{rng.integers(0, 50)}")
        if rng.random() < 0.1:
            parts.append(f"#life{rng.integers(0, 20)}")
        followings = int(rng.integers(50, 600))
        followers = int(followings * rng.uniform(0.5, 2.0))
        user = make_user(
            name=f"ham user {i}",
            description="regular person tweeting about life",
            followings=followings,
            followers=followers,
            statuses=int(rng.integers(200, 20000)),
            age_hours=int(rng.integers(24 * 180, 24 * 1500)),
        )
        records.append(
            make_record(
                f"ht{i:06d}",
                " ".join(parts),
                label="ham",
                user_id=f"hu{i:06d}",
                user=user,
                created_at=BASE_TIME + timedelta(minutes=i),
            )
        )

    for i in range(n_spam):
        parts = [SPAM_FRAGMENTS[rng.integers(0, len(SPAM_FRAGMENTS))]]
        if rng.random() < 0.8:
            parts.append(_SPAM_PHRASES[rng.integers(0, len(_SPAM_PHRASES))])
        if rng.random() < 0.5:
            parts.append(_SPAM_PHRASES[rng.integers(0, len(_SPAM_PHRASES))].upper())
        if rng.random() < 0.9:
            parts.append(f"http://t.co/x{rng.integers(0, 10**6):06d}")
        if rng.random() < 0.6:
            parts.append("!!!")
        followings = int(rng.integers(2000, 20000))
        followers = int(rng.integers(0, 50))
        user = make_user(
            name=f"promo{i}",
            description="",
            followings=followings,
            followers=followers,
            statuses=int(rng.integers(5000, 100000)),
            age_hours=int(rng.integers(24, 24 * 60)),
        )
        records.append(
            make_record(
                f"st{i:06d}",
                " ".join(parts),
                label="spam",
                user_id=f"su{i:06d}",
                user=user,
                created_at=BASE_TIME + timedelta(minutes=i, seconds=30),
            )
        )

    order = rng.permutation(len(records))
    return LabeledCorpus(records=tuple(records[i] for i in order))
