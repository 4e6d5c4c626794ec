"""Tweet dump ingestion: validate raw records into an ordered, annotated corpus.

Input is line-delimited JSON records with fields ``id``, ``text``,
``created_at`` (RFC 3339), ``retweet_count`` and an optional nested
``topic`` object. All timestamps are normalized to one reference timezone
because downstream weekday and time-of-day filters are defined in local time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Protocol
from zoneinfo import ZoneInfo

from .errors import (
    DuplicateId,
    EmptyText,
    MalformedTimestamp,
    MissingField,
    NegativeCount,
    RecordError,
    TaggerUnavailable,
    UnknownTopicLabel,
)
from .transport import TransportFailure, call_endpoint

DEFAULT_TOPIC_VOCABULARY: tuple[str, ...] = (
    "Business & Entrepreneurs",
    "Fitness & Health",
    "Learning & Educational",
    "Sports",
)

DEFAULT_REFERENCE_TIMEZONE = "America/New_York"

# Counts are trusted as-is; the dump does not say at what post age they were
# snapshotted, so the report carries this caveat instead of a correction.
RETWEET_SNAPSHOT_NOTE = (
    "retweet counts are taken as given in the dump; no fixed post-age snapshot is assumed"
)


@dataclass(frozen=True)
class TopicAnnotation:
    """Topic label with the tagger's confidence."""

    label: str
    prob: float


@dataclass(frozen=True)
class Tweet:
    """One post with its engagement count and optional topic annotation."""

    id: str
    text: str
    created_at: datetime
    retweet_count: int
    topic: TopicAnnotation | None = None


@dataclass(frozen=True)
class IngestConfig:
    reference_timezone: str = DEFAULT_REFERENCE_TIMEZONE
    topic_vocabulary: tuple[str, ...] = DEFAULT_TOPIC_VOCABULARY
    strict: bool = False


@dataclass
class IngestReport:
    """Machine-readable account of what ingestion kept and dropped."""

    accepted: int = 0
    rejected_by_code: dict[str, int] = field(default_factory=dict)
    rejections: list[dict] = field(default_factory=list)
    note: str = RETWEET_SNAPSHOT_NOTE

    @property
    def rejected(self) -> int:
        return sum(self.rejected_by_code.values())

    def record_rejection(self, error: RecordError) -> None:
        self.rejected_by_code[error.code] = self.rejected_by_code.get(error.code, 0) + 1
        self.rejections.append(
            {"index": error.index, "code": error.code, "field": error.field}
        )

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "rejected_by_code": dict(sorted(self.rejected_by_code.items())),
            "rejections": self.rejections,
            "note": self.note,
        }


@dataclass(frozen=True)
class Corpus:
    """Immutable, time-ordered tweet collection with unique ids."""

    tweets: tuple[Tweet, ...]
    reference_timezone: str
    provenance: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    @property
    def timezone(self) -> ZoneInfo:
        return ZoneInfo(self.reference_timezone)


@dataclass(frozen=True)
class IngestResult:
    corpus: Corpus
    report: IngestReport


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp; the offset is mandatory."""

    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp {value!r} lacks a UTC offset")
    return parsed


def validate_record(
    raw: Mapping,
    config: IngestConfig | None = None,
    *,
    index: int | None = None,
) -> Tweet:
    """Turn a raw key-value record into a Tweet, normalized to the reference timezone.

    Unknown keys are ignored. Raises a :class:`RecordError` subclass naming the
    offending field and the record's stream index.
    """

    config = config or IngestConfig()
    for key in ("id", "text", "created_at", "retweet_count"):
        if key not in raw or raw[key] is None:
            raise MissingField(f"record is missing {key!r}", field=key, index=index)

    tweet_id = str(raw["id"])
    if not tweet_id.strip():
        raise MissingField("record has an empty id", field="id", index=index)

    text = raw["text"]
    if not isinstance(text, str) or not text.strip():
        raise EmptyText("text is empty after trimming", field="text", index=index)

    created_raw = raw["created_at"]
    if isinstance(created_raw, datetime):
        created = created_raw
        if created.tzinfo is None:
            raise MalformedTimestamp(
                "created_at lacks a timezone", field="created_at", index=index
            )
    else:
        try:
            created = parse_rfc3339(str(created_raw))
        except ValueError:
            raise MalformedTimestamp(
                f"created_at {created_raw!r} is not RFC 3339", field="created_at", index=index
            ) from None
    created = created.astimezone(ZoneInfo(config.reference_timezone))

    count = raw["retweet_count"]
    if isinstance(count, bool) or not isinstance(count, int):
        raise RecordError(
            f"retweet_count {count!r} is not an integer", field="retweet_count", index=index
        )
    if count < 0:
        raise NegativeCount(
            f"retweet_count {count} is negative", field="retweet_count", index=index
        )

    topic = None
    raw_topic = raw.get("topic")
    if raw_topic is not None:
        if not isinstance(raw_topic, Mapping) or "label" not in raw_topic:
            raise MissingField("topic is missing label", field="topic.label", index=index)
        if "prob" not in raw_topic:
            raise MissingField("topic is missing prob", field="topic.prob", index=index)
        topic = _validate_annotation(
            str(raw_topic["label"]), raw_topic["prob"], config.topic_vocabulary, index=index
        )

    return Tweet(id=tweet_id, text=text, created_at=created, retweet_count=count, topic=topic)


def _validate_annotation(
    label: str, prob: object, vocabulary: tuple[str, ...], *, index: int | None = None
) -> TopicAnnotation:
    if label not in vocabulary:
        raise UnknownTopicLabel(
            f"topic label {label!r} is not in the configured vocabulary",
            field="topic.label",
            index=index,
        )
    if not isinstance(prob, (int, float)) or isinstance(prob, bool) or not 0.0 <= prob <= 1.0:
        raise RecordError(
            f"topic prob {prob!r} is not in [0, 1]", field="topic.prob", index=index
        )
    return TopicAnnotation(label=label, prob=float(prob))


def tweet_to_record(tweet: Tweet) -> dict:
    """Serialize a Tweet back to the dump record shape (round-trips exactly)."""

    record: dict = {
        "id": tweet.id,
        "text": tweet.text,
        "created_at": tweet.created_at.isoformat(),
        "retweet_count": tweet.retweet_count,
    }
    if tweet.topic is not None:
        record["topic"] = {"label": tweet.topic.label, "prob": tweet.topic.prob}
    return record


def ingest_tweets(
    source: Iterable[Mapping],
    config: IngestConfig | None = None,
    *,
    provenance: dict[str, str] | None = None,
) -> IngestResult:
    """Validate a record stream into a Corpus sorted by created_at.

    Lenient mode (default) drops invalid and duplicate records and tallies
    them in the report; strict mode raises on the first offender. Equal
    timestamps keep their source order.
    """

    config = config or IngestConfig()
    report = IngestReport()
    accepted: list[Tweet] = []
    seen_ids: set[str] = set()

    for index, raw in enumerate(source):
        try:
            tweet = validate_record(raw, config, index=index)
            if tweet.id in seen_ids:
                raise DuplicateId(
                    f"duplicate tweet id {tweet.id!r}", field="id", index=index
                )
        except RecordError as err:
            if config.strict:
                raise
            report.record_rejection(err)
            continue
        seen_ids.add(tweet.id)
        accepted.append(tweet)

    accepted.sort(key=lambda t: t.created_at)
    report.accepted = len(accepted)
    corpus = Corpus(
        tweets=tuple(accepted),
        reference_timezone=config.reference_timezone,
        provenance=provenance or {},
    )
    return IngestResult(corpus=corpus, report=report)


def read_tweet_dump(path: str | Path) -> tuple[list[dict], dict[str, str]]:
    """Read a line-delimited UTF-8 dump; returns records plus a source digest."""

    path = Path(path)
    data = path.read_bytes()
    records = [
        json.loads(line) for line in data.decode("utf-8").splitlines() if line.strip()
    ]
    digest = hashlib.sha256(data).hexdigest()
    return records, {path.name: digest}


class TopicTagger(Protocol):
    """Anything that maps a text to a topic annotation."""

    def tag(self, text: str) -> TopicAnnotation: ...


class FixtureTagger:
    """Deterministic tagger backed by a lookup table or a constant."""

    def __init__(
        self,
        table: Mapping[str, TopicAnnotation] | None = None,
        *,
        default: TopicAnnotation | None = None,
    ) -> None:
        self.table = dict(table or {})
        self.default = default

    def tag(self, text: str) -> TopicAnnotation:
        annotation = self.table.get(text, self.default)
        if annotation is None:
            raise TaggerUnavailable(f"fixture tagger has no entry for {text!r}", pending=0)
        return annotation


class RemoteTagger:
    """Topic classifier behind the shared request/response transport.

    Wire shape: request ``{"text": ...}``, response ``{"label": ..., "prob": ...}``.
    """

    def __init__(self, endpoint: str) -> None:
        self.endpoint = endpoint

    def tag(self, text: str) -> TopicAnnotation:
        payload = call_endpoint(self.endpoint, {"text": text})
        return TopicAnnotation(label=str(payload["label"]), prob=float(payload["prob"]))


def annotate_topics(
    corpus: Corpus,
    tagger: TopicTagger,
    *,
    vocabulary: tuple[str, ...] = DEFAULT_TOPIC_VOCABULARY,
) -> Corpus:
    """Fill in missing topic annotations; already-annotated tweets are untouched.

    Labels outside the configured vocabulary are rejected. If the tagger goes
    away mid-run, the error reports how many tweets were left unannotated.
    """

    pending = [i for i, tweet in enumerate(corpus.tweets) if tweet.topic is None]
    if not pending:
        return corpus

    tweets = list(corpus.tweets)
    for position, i in enumerate(pending):
        try:
            annotation = tagger.tag(tweets[i].text)
        except (TaggerUnavailable, TransportFailure) as exc:
            raise TaggerUnavailable(
                f"tagger failed: {exc}", pending=len(pending) - position
            ) from exc
        annotation = _validate_annotation(annotation.label, annotation.prob, vocabulary)
        tweets[i] = replace(tweets[i], topic=annotation)

    return Corpus(
        tweets=tuple(tweets),
        reference_timezone=corpus.reference_timezone,
        provenance=dict(corpus.provenance),
    )
