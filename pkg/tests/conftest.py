"""Shared fixtures: tweet factories, synthetic corpora, and the pairing oracle."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from crowdreact.corpus import (
    DEFAULT_TOPIC_VOCABULARY,
    Corpus,
    IngestConfig,
    Tweet,
    ingest_tweets,
    validate_record,
)
from crowdreact.pairing import (
    LabeledPair,
    PairingConfig,
    margin_ok,
    materialize_pair,
    passes_weekday,
    temporally_compatible,
    topically_compatible,
)

BUSINESS = "Business & Entrepreneurs"
FITNESS = "Fitness & Health"
SPORTS = "Sports"


def record(
    tweet_id: str,
    *,
    text: str | None = None,
    created: str = "2021-03-01T14:00:00-05:00",
    rt: int = 0,
    topic: str | None = BUSINESS,
    prob: float = 0.9,
) -> dict:
    rec: dict = {
        "id": tweet_id,
        "text": text or f"post {tweet_id} about the plan",
        "created_at": created,
        "retweet_count": rt,
    }
    if topic is not None:
        rec["topic"] = {"label": topic, "prob": prob}
    return rec


def tweet(tweet_id: str, **kwargs) -> Tweet:
    return validate_record(record(tweet_id, **kwargs), IngestConfig())


def corpus_from_records(records: list[dict], **config_kwargs) -> Corpus:
    return ingest_tweets(records, IngestConfig(**config_kwargs)).corpus


@pytest.fixture
def six_tweet_records() -> list[dict]:
    """Hand-built corpus where exactly pairs {A,B} and {A,G} survive all filters.

    C fails the margin against everyone, D is on a Saturday, E is the only
    Sports tweet, and G clears the margin only against A.
    """

    return [
        record("A", created="2021-03-01T14:00:00-05:00", rt=100),
        record("B", created="2021-03-01T15:00:00-05:00", rt=111),
        record("C", created="2021-03-01T14:10:00-05:00", rt=104),
        record("D", created="2021-03-06T14:00:00-05:00", rt=500),
        record("E", created="2021-03-01T14:30:00-05:00", rt=200, topic=SPORTS, prob=0.95),
        record("G", created="2021-03-02T13:00:00-05:00", rt=112),
    ]


def brute_force_pairs(corpus: Corpus, config: PairingConfig) -> list[LabeledPair]:
    """Independent oracle: plain double loop applying the four predicates."""

    tz = corpus.timezone
    tweets = list(corpus)
    out: list[LabeledPair] = []
    for i in range(len(tweets)):
        for j in range(i + 1, len(tweets)):
            a, b = tweets[i], tweets[j]
            if config.weekdays_only and not (passes_weekday(a, tz) and passes_weekday(b, tz)):
                continue
            if not margin_ok(a.retweet_count, b.retweet_count, config.margin_fraction):
                continue
            if not temporally_compatible(a, b, config):
                continue
            if not topically_compatible(a, b, config.topic_prob_threshold):
                continue
            out.append(materialize_pair(a, b, config))
    out.sort(key=lambda p: (p.max_created_at, p.pair_id))
    return out


_VOCAB = (
    "economy growth jobs plan focus health care schools streets investments "
    "record strong families workers future build report results community tax "
    "support funding students teachers research roads bridges clean energy"
).split()

WINNER_MARKER = "winswin"


def _random_text(rng: random.Random, n_words: int, prefix: str | None = None) -> str:
    words = [rng.choice(_VOCAB) for _ in range(n_words)]
    if prefix:
        words.insert(0, prefix)
    return " ".join(words)


def _direct_pair(t1: Tweet, t2: Tweet) -> LabeledPair:
    return LabeledPair(
        t1=t1,
        t2=t2,
        label=t1.retweet_count > t2.retweet_count,
        topic=t1.topic.label,
        rel_diff_pct=100.0
        * abs(t1.retweet_count - t2.retweet_count)
        / max(min(t1.retweet_count, t2.retweet_count), 1),
        max_created_at=max(t1.created_at, t2.created_at),
    )


def separable_pairs(rng: random.Random, n_pairs: int) -> list[LabeledPair]:
    """Pairs where the longer text always wins, with a learnable length cue.

    Long texts open with 'moreover', short ones with 'note', so the marker
    tokens adjacent to the [T1]/[T2] segment tags carry the label.
    """

    pairs = []
    for i in range(n_pairs):
        long_text = _random_text(rng, rng.randint(5, 8), prefix="moreover")
        short_text = _random_text(rng, rng.randint(1, 2), prefix="note")
        long_tweet = tweet(f"L{i}", text=long_text, rt=100)
        short_tweet = tweet(f"S{i}", text=short_text, rt=10)
        first, second = (long_tweet, short_tweet) if rng.random() < 0.5 else (short_tweet, long_tweet)
        pairs.append(_direct_pair(first, second))
    return pairs


def marker_pairs(
    rng: random.Random, n_pairs: int
) -> tuple[list[LabeledPair], dict[str, str]]:
    """Pairs whose labels are random w.r.t. the texts, with a label-leaking stub
    generator: the winning tweet's explanation opens with a marker token."""

    pairs = []
    explanations: dict[str, str] = {}
    for i in range(n_pairs):
        t1 = tweet(f"m{i}a", text=_random_text(rng, rng.randint(6, 12)), rt=0)
        t2 = tweet(f"m{i}b", text=_random_text(rng, rng.randint(6, 12)), rt=0)
        t1_wins = rng.random() < 0.5
        t1 = Tweet(t1.id, t1.text, t1.created_at, 20 if t1_wins else 10, t1.topic)
        t2 = Tweet(t2.id, t2.text, t2.created_at, 10 if t1_wins else 20, t2.topic)
        winner, loser = (t1, t2) if t1_wins else (t2, t1)
        explanations[winner.id] = f"{WINNER_MARKER} {_random_text(rng, 2)}"
        explanations[loser.id] = f"plainly {_random_text(rng, 2)}"
        pairs.append(_direct_pair(t1, t2))
    return pairs, explanations


def random_corpus(rng: random.Random, n_tweets: int) -> Corpus:
    """Synthetic corpus exercising every filter: weekends, ties, low-confidence tags."""

    base = datetime(2021, 3, 1, tzinfo=timezone.utc)
    records = []
    for i in range(n_tweets):
        created = base + timedelta(
            days=rng.randint(0, 35), hours=rng.randint(0, 23), minutes=rng.randint(0, 59)
        )
        records.append(
            {
                "id": f"t{i:03d}",
                "text": f"synthetic post {i} with filler words",
                "created_at": created.isoformat(),
                "retweet_count": rng.choice([0, 0, rng.randint(1, 30), rng.randint(1, 2000)]),
                "topic": {
                    "label": rng.choice(DEFAULT_TOPIC_VOCABULARY),
                    "prob": rng.choice([0.5, 0.79, 0.8, 0.85, 0.95]),
                },
            }
        )
    return ingest_tweets(records, IngestConfig()).corpus
