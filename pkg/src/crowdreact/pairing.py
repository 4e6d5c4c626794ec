"""Labeled pair construction under the four retention conditions.

Two tweets form a candidate pair only when both were posted on weekdays,
their retweet counts differ by at least a fraction of the smaller count,
they are close in calendar time and in time of day, and they share one
high-confidence topic. Which tweet is presented first is decided by a
seeded coin keyed on the pair identity, so labels balance in expectation
and runs are reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Sequence
from zoneinfo import ZoneInfo

from .corpus import Corpus, IngestConfig, Tweet, tweet_to_record, validate_record
from .errors import MissingAnnotation

DEFAULT_SPLIT_DATE = date(2022, 5, 1)


@dataclass(frozen=True)
class PairingConfig:
    margin_fraction: float = 0.10
    max_gap_days: int = 10
    max_time_of_day_gap_hours: float = 5.0
    topic_prob_threshold: float = 0.8
    weekdays_only: bool = True
    order_seed: int = 0

    def __post_init__(self) -> None:
        if self.margin_fraction <= 0:
            raise ValueError("margin_fraction must be positive")
        if self.max_gap_days <= 0:
            raise ValueError("max_gap_days must be positive")
        if not 0.0 < self.topic_prob_threshold <= 1.0:
            raise ValueError("topic_prob_threshold must be in (0, 1]")


@dataclass(frozen=True)
class LabeledPair:
    """Two compatible tweets plus the 'first receives more retweets' label."""

    t1: Tweet
    t2: Tweet
    label: bool
    topic: str
    rel_diff_pct: float
    max_created_at: datetime

    @property
    def pair_id(self) -> str:
        lo, hi = sorted((self.t1.id, self.t2.id))
        return f"{lo}|{hi}"


@dataclass(frozen=True)
class TopicStats:
    topic: str
    avg_retweets: float
    pair_count: int


@dataclass
class StatsReport:
    rows: list[TopicStats]
    total_pairs: int
    label_balance: float

    def as_dict(self) -> dict:
        return {
            "rows": [
                {"topic": r.topic, "avg_retweets": r.avg_retweets, "pairs": r.pair_count}
                for r in self.rows
            ],
            "total_pairs": self.total_pairs,
            "label_balance": self.label_balance,
        }


def passes_weekday(tweet: Tweet, tz: ZoneInfo) -> bool:
    """True iff the tweet's local day of week is Monday through Friday."""

    return tweet.created_at.astimezone(tz).weekday() < 5


def margin_ok(rt1: int, rt2: int, margin_fraction: float) -> bool:
    """True iff the counts differ by at least margin_fraction of the smaller one.

    Ties are always rejected: a pair with equal counts has no defined label,
    including the degenerate min = 0 case.
    """

    if rt1 == rt2:
        return False
    return abs(rt1 - rt2) >= margin_fraction * min(rt1, rt2)


def time_of_day_gap_hours(t1: Tweet, t2: Tweet) -> float:
    """Circular time-of-day distance in hours (23:00 vs 01:00 is 2 h apart)."""

    def seconds_into_day(t: Tweet) -> float:
        local = t.created_at
        return local.hour * 3600 + local.minute * 60 + local.second + local.microsecond / 1e6

    raw = abs(seconds_into_day(t1) - seconds_into_day(t2)) / 3600.0
    return min(raw, 24.0 - raw)


def temporally_compatible(t1: Tweet, t2: Tweet, config: PairingConfig) -> bool:
    """True iff the calendar-day gap and the circular time-of-day gap are small.

    Both timestamps must already be normalized to the reference timezone.
    """

    gap_days = abs((t1.created_at.date() - t2.created_at.date()).days)
    if gap_days > config.max_gap_days:
        return False
    return time_of_day_gap_hours(t1, t2) <= config.max_time_of_day_gap_hours


def topically_compatible(t1: Tweet, t2: Tweet, threshold: float) -> bool:
    """True iff both tweets carry the same label at or above the confidence threshold."""

    if t1.topic is None or t2.topic is None:
        missing = [t.id for t in (t1, t2) if t.topic is None]
        raise MissingAnnotation(f"tweets lack topic annotations: {missing}")
    return (
        t1.topic.label == t2.topic.label
        and t1.topic.prob >= threshold
        and t2.topic.prob >= threshold
    )


def _presentation_coin(order_seed: int, id_lo: str, id_hi: str) -> bool:
    """Seeded fair coin keyed on pair identity; True keeps id_lo first."""

    digest = hashlib.sha256(f"{order_seed}|{id_lo}|{id_hi}".encode("utf-8")).digest()
    return digest[0] & 1 == 0


def materialize_pair(a: Tweet, b: Tweet, config: PairingConfig) -> LabeledPair:
    """Build the LabeledPair for an unordered candidate that passed all conditions.

    Presentation order is a function of (order_seed, sorted ids) only, never of
    evaluation order, so builds are bit-reproducible.
    """

    lo, hi = (a, b) if a.id < b.id else (b, a)
    t1, t2 = (lo, hi) if _presentation_coin(config.order_seed, lo.id, hi.id) else (hi, lo)
    smaller = min(t1.retweet_count, t2.retweet_count)
    diff = abs(t1.retweet_count - t2.retweet_count)
    rel_diff_pct = math.inf if smaller == 0 else 100.0 * diff / smaller
    assert t1.topic is not None
    return LabeledPair(
        t1=t1,
        t2=t2,
        label=t1.retweet_count > t2.retweet_count,
        topic=t1.topic.label,
        rel_diff_pct=rel_diff_pct,
        max_created_at=max(t1.created_at, t2.created_at),
    )


def pair_passes(a: Tweet, b: Tweet, config: PairingConfig, tz: ZoneInfo) -> bool:
    """Apply the four retention conditions to an unordered tweet pair."""

    if config.weekdays_only and not (passes_weekday(a, tz) and passes_weekday(b, tz)):
        return False
    if not margin_ok(a.retweet_count, b.retweet_count, config.margin_fraction):
        return False
    if not temporally_compatible(a, b, config):
        return False
    return topically_compatible(a, b, config.topic_prob_threshold)


def build_pairs(corpus: Corpus, config: PairingConfig | None = None) -> list[LabeledPair]:
    """Emit every unordered tweet pair passing all four conditions, exactly once.

    Output is sorted by (max_created_at, pair_id). The corpus must be fully
    annotated; unannotated tweets are reported in aggregate.
    """

    config = config or PairingConfig()
    unannotated = [t.id for t in corpus if t.topic is None]
    if unannotated:
        raise MissingAnnotation(
            f"{len(unannotated)} tweets lack topic annotations", ids=unannotated
        )

    tz = corpus.timezone
    tweets = corpus.tweets  # already sorted by created_at
    pairs: list[LabeledPair] = []
    for i, a in enumerate(tweets):
        for b in tweets[i + 1 :]:
            # Corpus order is chronological, so the day gap only grows with j.
            if (b.created_at.date() - a.created_at.date()).days > config.max_gap_days:
                break
            if pair_passes(a, b, config, tz):
                pairs.append(materialize_pair(a, b, config))

    pairs.sort(key=lambda p: (p.max_created_at, p.pair_id))
    return pairs


def temporal_split(
    pairs: Sequence[LabeledPair], split_date: date = DEFAULT_SPLIT_DATE
) -> tuple[list[LabeledPair], list[LabeledPair]]:
    """Partition pairs by their later tweet's date; the boundary day goes to valid."""

    train = [p for p in pairs if p.max_created_at.date() < split_date]
    valid = [p for p in pairs if p.max_created_at.date() >= split_date]
    return train, valid


def corpus_stats(pairs: Sequence[LabeledPair]) -> StatsReport:
    """Per-topic average retweets and pair counts, plus the label balance.

    The average runs over tweet occurrences: a tweet reused by k pairs of a
    topic contributes its count k times.
    """

    counts: dict[str, list[int]] = {}
    pair_counts: dict[str, int] = {}
    for pair in pairs:
        counts.setdefault(pair.topic, []).extend(
            (pair.t1.retweet_count, pair.t2.retweet_count)
        )
        pair_counts[pair.topic] = pair_counts.get(pair.topic, 0) + 1

    rows = [
        TopicStats(
            topic=topic,
            avg_retweets=sum(counts[topic]) / len(counts[topic]),
            pair_count=pair_counts[topic],
        )
        for topic in sorted(counts)
    ]
    total = len(pairs)
    balance = sum(1 for p in pairs if p.label) / total if total else 0.0
    return StatsReport(rows=rows, total_pairs=total, label_balance=balance)


def render_stats_table(report: StatsReport) -> str:
    """Plain-text statistics table with columns Topic, Avg. RT, Pairs."""

    width = max([len("Topic")] + [len(r.topic) for r in report.rows]) + 2
    lines = [f"{'Topic':<{width}}{'Avg. RT':>10}{'Pairs':>9}"]
    for row in report.rows:
        lines.append(
            f"{row.topic:<{width}}{row.avg_retweets:>10.1f}{row.pair_count:>9,}"
        )
    lines.append(f"{'Total':<{width}}{'':>10}{report.total_pairs:>9,}")
    lines.append("")
    lines.append(f"Label balance (first tweet wins): {report.label_balance:.3f}")
    lines.append("Avg. RT averages retweet counts over tweet occurrences in each topic's pairs.")
    return "\n".join(lines)


def pair_to_record(pair: LabeledPair) -> dict:
    return {
        "pair_id": pair.pair_id,
        "t1": tweet_to_record(pair.t1),
        "t2": tweet_to_record(pair.t2),
        "label": pair.label,
        "topic": pair.topic,
        "rel_diff_pct": pair.rel_diff_pct,
        "max_created_at": pair.max_created_at.isoformat(),
    }


def pair_from_record(record: dict, config: IngestConfig | None = None) -> LabeledPair:
    config = config or IngestConfig()
    t1 = validate_record(record["t1"], config)
    t2 = validate_record(record["t2"], config)
    return LabeledPair(
        t1=t1,
        t2=t2,
        label=bool(record["label"]),
        topic=record["topic"],
        rel_diff_pct=float(record["rel_diff_pct"]),
        max_created_at=max(t1.created_at, t2.created_at),
    )


def write_pairs(path: str | Path, pairs: Iterable[LabeledPair]) -> None:
    """Write pairs as line-delimited JSON with deterministic byte layout."""

    lines = [json.dumps(pair_to_record(p), sort_keys=True, ensure_ascii=False) for p in pairs]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_pairs(path: str | Path, config: IngestConfig | None = None) -> list[LabeledPair]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [pair_from_record(json.loads(line), config) for line in lines if line.strip()]
