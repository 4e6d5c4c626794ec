"""Accuracy / F1 reporting with topic and margin-bucket breakdowns.

F1 is the binary F1 of the positive class "first tweet wins" throughout;
that is the convention under which a constant-positive predictor on a
balanced set scores accuracy 50.0% and F1 66.7%. Between-system comparison
uses a paired approximate randomization test on the accuracy difference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import DEFAULT_TOPIC_VOCABULARY
from .errors import (
    CoverageMismatch,
    EmptySet,
    LengthMismatch,
    MissingPrediction,
    UnmatchedPairId,
)
from .pairing import LabeledPair

SIGNIFICANCE_TEST_NAME = "paired approximate randomization"


@dataclass(frozen=True)
class PredictionEntry:
    pair_id: str
    verdict: bool
    p_t1: float | None = None


@dataclass
class PredictionSet:
    """One system's verdicts over a pair set; pair ids are unique."""

    system_id: str
    entries: list[PredictionEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [e.pair_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate pair ids in prediction set {self.system_id!r}")

    def by_pair_id(self) -> dict[str, PredictionEntry]:
        return {e.pair_id: e for e in self.entries}

    @classmethod
    def from_verdicts(cls, system_id: str, verdicts: dict[str, bool]) -> "PredictionSet":
        return cls(
            system_id=system_id,
            entries=[PredictionEntry(pair_id=k, verdict=v) for k, v in verdicts.items()],
        )


def accuracy(preds: Sequence[bool], gold: Sequence[bool]) -> float:
    """Fraction of positions where prediction and gold agree."""

    if len(preds) != len(gold):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gold)} gold labels")
    if not preds:
        raise EmptySet("cannot compute accuracy of an empty set")
    return sum(p == g for p, g in zip(preds, gold)) / len(preds)


def f1_positive(preds: Sequence[bool], gold: Sequence[bool]) -> float:
    """Binary F1 of the positive class; 0 when there are no positives at all."""

    if len(preds) != len(gold):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(gold)} gold labels")
    if not preds:
        raise EmptySet("cannot compute F1 of an empty set")
    tp = sum(1 for p, g in zip(preds, gold) if p and g)
    fp = sum(1 for p, g in zip(preds, gold) if p and not g)
    fn = sum(1 for p, g in zip(preds, gold) if not p and g)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


@dataclass(frozen=True)
class BucketSpec:
    """Ascending relative-difference boundaries in percent."""

    boundaries: tuple[float, ...] = (10.0, 60.0, 141.3, 311.5)

    def __post_init__(self) -> None:
        if not self.boundaries or any(b <= 0 for b in self.boundaries):
            raise ValueError("boundaries must be positive")
        if list(self.boundaries) != sorted(set(self.boundaries)):
            raise ValueError("boundaries must be strictly ascending")

    def bounds(self, index: int) -> tuple[float, float]:
        lower = 0.0 if index == 0 else self.boundaries[index - 1]
        upper = self.boundaries[index] if index < len(self.boundaries) else float("inf")
        return lower, upper

    def label(self, index: int) -> str:
        return f"Bucket-{index}"

    @property
    def count(self) -> int:
        return len(self.boundaries) + 1


def assign_bucket(rel_diff_pct: float, spec: BucketSpec | None = None) -> int:
    """Map a relative difference to its bucket; intervals are [lower, upper)."""

    spec = spec or BucketSpec()
    if rel_diff_pct < 0:
        raise ValueError("rel_diff_pct must be >= 0")
    for i, boundary in enumerate(spec.boundaries):
        if rel_diff_pct < boundary:
            return i
    return len(spec.boundaries)


@dataclass(frozen=True)
class MetricRow:
    n: int
    accuracy: float
    f1: float


@dataclass(frozen=True)
class TopicMetricRow:
    topic: str
    n: int
    accuracy: float
    f1: float


@dataclass(frozen=True)
class BucketMetricRow:
    label: str
    lower: float
    upper: float
    n: int
    accuracy: float
    f1: float


@dataclass(frozen=True)
class SignificanceResult:
    baseline_id: str
    p_value: float
    test_name: str
    iterations: int
    observed_diff: float
    metric: str = "accuracy"


@dataclass
class EvalReport:
    system_id: str
    overall: MetricRow
    per_topic: list[TopicMetricRow]
    per_bucket: list[BucketMetricRow]
    absent_topics: list[str]
    significance: SignificanceResult | None = None

    def as_dict(self) -> dict:
        data = {
            "system_id": self.system_id,
            "overall": self.overall.__dict__,
            "per_topic": [r.__dict__ for r in self.per_topic],
            "per_bucket": [r.__dict__ for r in self.per_bucket],
            "absent_topics": self.absent_topics,
        }
        if self.significance is not None:
            data["significance"] = self.significance.__dict__
        return data


def evaluate(
    preds: PredictionSet,
    pairs: Sequence[LabeledPair],
    buckets: BucketSpec | None = None,
    *,
    vocabulary: Iterable[str] = DEFAULT_TOPIC_VOCABULARY,
) -> EvalReport:
    """Overall, per-topic, and per-bucket metrics for one prediction set.

    Every prediction must resolve to a pair and every pair must be predicted.
    Topics without instances are left out of the table body and listed in the
    report's footnote instead.
    """

    buckets = buckets or BucketSpec()
    by_pair = {p.pair_id: p for p in pairs}
    if len(by_pair) != len(pairs):
        raise ValueError("duplicate pair ids in the evaluation pairs")
    pred_by_id = preds.by_pair_id()

    unknown = sorted(set(pred_by_id) - set(by_pair))
    if unknown:
        raise UnmatchedPairId(f"predictions reference unknown pairs: {unknown[:5]}")
    missing = sorted(set(by_pair) - set(pred_by_id))
    if missing:
        raise MissingPrediction(f"pairs lack predictions: {missing[:5]}")

    ordered = [p.pair_id for p in pairs]
    verdicts = [pred_by_id[pid].verdict for pid in ordered]
    gold = [by_pair[pid].label for pid in ordered]

    overall = MetricRow(n=len(pairs), accuracy=accuracy(verdicts, gold), f1=f1_positive(verdicts, gold))

    def subset_row(indices: list[int]) -> tuple[int, float, float]:
        v = [verdicts[i] for i in indices]
        g = [gold[i] for i in indices]
        return len(indices), accuracy(v, g), f1_positive(v, g)

    topics: dict[str, list[int]] = {}
    for i, pid in enumerate(ordered):
        topics.setdefault(by_pair[pid].topic, []).append(i)
    per_topic = [
        TopicMetricRow(topic=t, n=n, accuracy=a, f1=f)
        for t in sorted(topics)
        for n, a, f in [subset_row(topics[t])]
    ]

    bucket_indices: dict[int, list[int]] = {}
    for i, pid in enumerate(ordered):
        bucket_indices.setdefault(assign_bucket(by_pair[pid].rel_diff_pct, buckets), []).append(i)
    per_bucket = []
    for b in sorted(bucket_indices):
        n, a, f = subset_row(bucket_indices[b])
        lower, upper = buckets.bounds(b)
        per_bucket.append(
            BucketMetricRow(label=buckets.label(b), lower=lower, upper=upper, n=n, accuracy=a, f1=f)
        )

    absent = sorted(set(vocabulary) - set(topics))
    return EvalReport(
        system_id=preds.system_id,
        overall=overall,
        per_topic=per_topic,
        per_bucket=per_bucket,
        absent_topics=absent,
    )


def significance(
    preds_a: PredictionSet,
    preds_b: PredictionSet,
    pairs: Sequence[LabeledPair],
    iterations: int = 10_000,
    seed: int = 0,
) -> SignificanceResult:
    """Two-sided paired approximate randomization test on the accuracy difference.

    Per pair, the two systems' correctness indicators are swapped with
    probability one half; the p-value is the add-one smoothed fraction of
    resampled absolute differences at least as large as the observed one.
    Deterministic given the seed.
    """

    if iterations < 1000:
        raise ValueError("iterations must be >= 1000 for a stable p-value")
    gold = {p.pair_id: p.label for p in pairs}
    a_by_id = preds_a.by_pair_id()
    b_by_id = preds_b.by_pair_id()
    if set(a_by_id) != set(b_by_id) or set(a_by_id) != set(gold):
        raise CoverageMismatch(
            f"{preds_a.system_id} and {preds_b.system_id} must cover the same pairs"
        )

    ids = sorted(gold)
    a_correct = np.array([a_by_id[pid].verdict == gold[pid] for pid in ids], dtype=np.int8)
    b_correct = np.array([b_by_id[pid].verdict == gold[pid] for pid in ids], dtype=np.int8)
    d = (a_correct - b_correct).astype(np.int64)
    observed = int(abs(d.sum()))

    rng = np.random.default_rng(seed)
    n = len(ids)
    at_least = 0
    chunk = max(1, 5_000_000 // max(n, 1))
    remaining = iterations
    while remaining > 0:
        rows = min(chunk, remaining)
        signs = rng.integers(0, 2, size=(rows, n), dtype=np.int64) * 2 - 1
        sums = np.abs(signs @ d)
        at_least += int(np.count_nonzero(sums >= observed))
        remaining -= rows

    p_value = (at_least + 1) / (iterations + 1)
    return SignificanceResult(
        baseline_id=preds_b.system_id,
        p_value=p_value,
        test_name=SIGNIFICANCE_TEST_NAME,
        iterations=iterations,
        observed_diff=float(d.sum()) / n,
    )


def _pct(value: float) -> str:
    return f"{value * 100:.1f}%"


def render_report(report: EvalReport) -> str:
    """Plain-text report: overall row, topic table, bucket table, significance."""

    lines = [
        f"System: {report.system_id}",
        "Significance metric: accuracy; positive class: first text wins",
        f"Overall: n={report.overall.n}  accuracy={_pct(report.overall.accuracy)}  "
        f"F1={_pct(report.overall.f1)}",
        "",
    ]
    if report.per_topic:
        width = max(len("Topic"), *(len(r.topic) for r in report.per_topic)) + 2
        lines.append(f"{'Topic':<{width}}{'# Instance':>11}{'Accuracy':>10}{'F1':>8}")
        for row in report.per_topic:
            lines.append(
                f"{row.topic:<{width}}{row.n:>11}{_pct(row.accuracy):>10}{_pct(row.f1):>8}"
            )
        if report.absent_topics:
            lines.append(f"No instances for: {', '.join(report.absent_topics)}")
        lines.append("")
    if report.per_bucket:
        lines.append("Relative-difference buckets (Bucket-0 was sampled outside the main set):")
        for row in report.per_bucket:
            upper = "inf" if row.upper == float("inf") else f"{row.upper:g}%"
            lines.append(
                f"{row.label}  [{row.lower:g}%, {upper})  n={row.n}  "
                f"accuracy={_pct(row.accuracy)}  F1={_pct(row.f1)}"
            )
        lines.append("")
    if report.significance is not None:
        sig = report.significance
        lines.append(
            f"Significance vs {sig.baseline_id}: {sig.test_name} on {sig.metric}, "
            f"iterations={sig.iterations}, observed diff={sig.observed_diff:+.4f}, "
            f"p={sig.p_value:.5f}"
        )
    return "\n".join(lines).rstrip() + "\n"


def write_predictions(path: str | Path, preds: PredictionSet) -> None:
    lines = []
    for entry in preds.entries:
        record: dict = {"pair_id": entry.pair_id, "verdict": entry.verdict,
                        "system_id": preds.system_id}
        if entry.p_t1 is not None:
            record["p_t1"] = entry.p_t1
        lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_predictions(path: str | Path) -> PredictionSet:
    entries: list[PredictionEntry] = []
    system_id = "unknown"
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        system_id = record.get("system_id", system_id)
        entries.append(
            PredictionEntry(
                pair_id=record["pair_id"],
                verdict=bool(record["verdict"]),
                p_t1=record.get("p_t1"),
            )
        )
    return PredictionSet(system_id=system_id, entries=entries)
