"""Paraphrase generation and champion-style selection of the best candidate.

The draft post is always the first candidate and the first incumbent. Each
remaining candidate challenges the current champion once, so a tournament
over N candidates costs exactly N - 1 comparisons; a round-robin strategy
is available for diagnostics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .cache import ResponseCache, response_digest
from .errors import (
    CrowdReactError,
    EmptyCandidateList,
    EmptyDraft,
    MissingExplanation,
    ParaphraserUnavailable,
)
from .scorer import AssemblyMode, ScoredComparison
from .transport import TransportFailure, call_endpoint, register_stub


@dataclass(frozen=True)
class ParaphraseConfig:
    """Request settings sent to the paraphraser on every call."""

    num_return_sequences: int = 5
    num_beams: int = 5
    max_length: int = 128
    temperature: float = 0.7
    num_beam_groups: int = 5
    repetition_penalty: float = 10.0
    diversity_penalty: float = 3.0
    no_repeat_ngram_size: int = 2

    def __post_init__(self) -> None:
        if self.num_return_sequences < 1:
            raise ValueError("num_return_sequences must be >= 1")
        if min(self.repetition_penalty, self.diversity_penalty) < 0:
            raise ValueError("penalties must be >= 0")

    def request_fields(self) -> dict:
        return {
            "num_return_sequences": self.num_return_sequences,
            "num_beams": self.num_beams,
            "max_length": self.max_length,
            "temperature": self.temperature,
            "num_beam_groups": self.num_beam_groups,
            "repetition_penalty": self.repetition_penalty,
            "diversity_penalty": self.diversity_penalty,
            "no_repeat_ngram_size": self.no_repeat_ngram_size,
        }


class ParaphraserClient:
    """Paraphraser behind the shared transport, optionally replay-cached.

    Wire shape: request ``{"text": ..., <config fields>}``, response
    ``{"paraphrases": [...]}``.
    """

    def __init__(
        self, endpoint: str, *, cache: ResponseCache | None = None, model_id: str = "paraphraser"
    ) -> None:
        self.endpoint = endpoint
        self.cache = cache
        self.model_id = model_id

    def generate(self, text: str, config: ParaphraseConfig) -> list[str]:
        request = {"text": text, **config.request_fields()}
        request_key = json.dumps(request, sort_keys=True, ensure_ascii=True, separators=(",", ":"))

        def fetch() -> str:
            try:
                payload = call_endpoint(self.endpoint, request)
            except TransportFailure as exc:
                raise ParaphraserUnavailable(f"paraphraser unavailable: {exc}") from exc
            return json.dumps({"paraphrases": [str(p) for p in payload["paraphrases"]]})

        if self.cache is not None:
            digest = response_digest("paraphraser", self.model_id, request_key)
            entry, _ = self.cache.get_or_fetch(
                digest, fetch, lambda: {"provider_id": "paraphraser", "model_id": self.model_id}
            )
            text_payload = entry.text
        else:
            text_payload = fetch()
        return list(json.loads(text_payload)["paraphrases"])


def generate_candidates(
    draft: str, paraphraser: ParaphraserClient, config: ParaphraseConfig | None = None
) -> list[str]:
    """Draft first, then up to num_return_sequences distinct paraphrases.

    Exact duplicates and paraphrases identical to the draft are dropped.
    """

    if not draft.strip():
        raise EmptyDraft("draft is empty")
    config = config or ParaphraseConfig()
    paraphrases = paraphraser.generate(draft, config)

    candidates = [draft]
    seen = {draft}
    for text in paraphrases:
        if text in seen:
            continue
        candidates.append(text)
        seen.add(text)
        if len(candidates) - 1 >= config.num_return_sequences:
            break
    return candidates


@dataclass(frozen=True)
class ComparisonRecord:
    first: int
    second: int
    scored: ScoredComparison


@dataclass
class TournamentResult:
    winner: str
    candidates: list[str]
    comparisons: list[ComparisonRecord]
    champion_path: list[int]
    strategy: str = "champion"
    explanations: dict[str, str] = field(default_factory=dict)
    reversed_order_winner: str | None = None

    @property
    def order_sensitive(self) -> bool | None:
        if self.reversed_order_winner is None:
            return None
        return self.reversed_order_winner != self.winner

    def as_dict(self) -> dict:
        return {
            "winner": self.winner,
            "candidates": self.candidates,
            "champion_path": self.champion_path,
            "strategy": self.strategy,
            "comparisons": [
                {
                    "first": c.first,
                    "second": c.second,
                    "p_first": c.scored.p_t1,
                    "first_wins": c.scored.verdict,
                }
                for c in self.comparisons
            ],
            "explanations": self.explanations,
            "order_sensitive": self.order_sensitive,
        }


def select_best(
    candidates: Sequence[str],
    scorer,
    explanations_provider: Callable[[str], str] | None = None,
    mode: AssemblyMode | str = AssemblyMode.PAIR_ONLY,
    *,
    strategy: str = "champion",
    check_order_sensitivity: bool = False,
) -> TournamentResult:
    """Pick the candidate predicted to draw the most reactions.

    Champion strategy: the incumbent (initially the original draft) is
    compared against each remaining candidate in order and replaced whenever
    its win probability drops below 0.5; an exact 0.5 keeps the incumbent.
    Duplicate candidate texts are dropped so the scorer never sees (x, x).
    """

    if not candidates:
        raise EmptyCandidateList("no candidates to select from")
    mode = AssemblyMode.parse(mode)
    if mode.needs_explanations and explanations_provider is None:
        raise MissingExplanation(f"mode {mode.value} requires an explanations provider")

    distinct: list[str] = []
    for text in candidates:
        if text not in distinct:
            distinct.append(text)

    explanations: dict[str, str] = {}
    if mode.needs_explanations:
        assert explanations_provider is not None
        explanations = {text: explanations_provider(text) for text in distinct}

    def compare(i: int, j: int, done: list[ComparisonRecord]) -> ScoredComparison:
        e1 = explanations.get(distinct[i])
        e2 = explanations.get(distinct[j])
        try:
            return scorer.predict(distinct[i], distinct[j], e1, e2, mode)
        except CrowdReactError as err:
            err.detail["comparisons_completed"] = [
                {"first": c.first, "second": c.second, "p_first": c.scored.p_t1} for c in done
            ]
            raise

    if strategy == "round_robin":
        comparisons: list[ComparisonRecord] = []
        wins = [0] * len(distinct)
        for i in range(len(distinct)):
            for j in range(i + 1, len(distinct)):
                scored = compare(i, j, comparisons)
                comparisons.append(ComparisonRecord(first=i, second=j, scored=scored))
                wins[i if scored.verdict else j] += 1
        winner_idx = max(range(len(distinct)), key=lambda k: (wins[k], -k))
        result = TournamentResult(
            winner=distinct[winner_idx],
            candidates=distinct,
            comparisons=comparisons,
            champion_path=[winner_idx],
            strategy="round_robin",
            explanations=explanations,
        )
    elif strategy == "champion":
        comparisons = []
        champion = 0
        path = [0]
        for challenger in range(1, len(distinct)):
            scored = compare(champion, challenger, comparisons)
            comparisons.append(
                ComparisonRecord(first=champion, second=challenger, scored=scored)
            )
            if scored.p_t1 < 0.5:
                champion = challenger
            path.append(champion)
        result = TournamentResult(
            winner=distinct[champion],
            candidates=distinct,
            comparisons=comparisons,
            champion_path=path,
            strategy="champion",
            explanations=explanations,
        )
    else:
        raise ValueError(f"unknown tournament strategy {strategy!r}")

    if check_order_sensitivity and strategy == "champion" and len(distinct) > 2:
        reversed_order = [distinct[0]] + list(reversed(distinct[1:]))
        rerun = select_best(
            reversed_order,
            scorer,
            explanations_provider,
            mode,
            strategy="champion",
            check_order_sensitivity=False,
        )
        result.reversed_order_winner = rerun.winner
    return result


def _stub_numbered_variants(request: dict) -> dict:
    """Default offline paraphraser: deterministic reworded variants."""

    text = str(request.get("text", ""))
    n = int(request.get("num_return_sequences", 5))
    templates = (
        "Here is the thing: {text}",
        "{text} Learn more today.",
        "In short: {text}",
        "{text} Do not miss it.",
        "Worth knowing: {text}",
        "{text} See the details.",
    )
    variants = [templates[i % len(templates)].format(text=text) for i in range(n)]
    return {"paraphrases": variants}


register_stub("numbered-variants", _stub_numbered_variants)
