"""Recorded end-to-end scenario: a real draft, its paraphrases, and scores.

The bundle builder writes every response the compose pipeline will ask for
(paraphraser, explainer, remote scorer) into a response cache, so the full
draft-to-winner flow runs offline against ``replay`` endpoints and always
returns the same winner. Demos, service fixtures, and the acceptance suite
all share this scenario.
"""

from __future__ import annotations

import json
from pathlib import Path

from .cache import ResponseCache, response_digest
from .config import EngineConfig
from .generator import ProviderRef, render_engaging_prompt
from .scorer import AssemblyMode, RemoteScorer
from .tournament import ParaphraseConfig

DEMO_DRAFT = (
    "This year, our economy is projected to grow at the fastest pace in nearly 40 years. "
    "Right now, we have the opportunity to make once-in-a-generation investments in the "
    "foundations of middle class prosperity. Read more about the American Jobs Plan:"
)

# Raw paraphraser output; the third and fifth entries differ, the second and
# fourth are byte-identical, so candidate dedup keeps five texts in total.
DEMO_PARAPHRASES = (
    "We are expecting the fastest growth in our economy for almost four decades this year. "
    "At present, we have the chance to invest in bolstering middle-class prosperity. "
    "Learn more about the American Jobs Plan.",
    "The economy is expected to expand at a rate faster than it has been for almost 40 years "
    "this year. We have the opportunity to invest in the middle class's success once again. "
    "Learn more about the American Jobs Plan.",
    "We are expecting the fastest growth in our economy for almost four decades this year. "
    "At present, we have the chance to invest in bolstering middle-class prosperity. "
    "Learn more about the American Jobs Plan: Why it matters?",
    "The economy is expected to expand at a rate faster than it has been for almost 40 years "
    "this year. We have the opportunity to invest in the middle class's success once again. "
    "Learn more about the American Jobs Plan.",
    "Our economy is poised to grow at its fastest rate in nearly 40 years this year, making "
    "it a prime opportunity for us all to invest in the middle class's success. Learn more "
    "about the American Jobs Plan:",
)

DEMO_WINNER = DEMO_PARAPHRASES[1]

RECORDED_PROVIDER = ProviderRef(
    provider_id="recorded", model_id="engagement-explainer", endpoint="replay"
)

_CANDIDATES = (DEMO_DRAFT,) + tuple(dict.fromkeys(DEMO_PARAPHRASES))

_EXPLANATIONS = {
    _CANDIDATES[0]: (
        "Leads with a superlative growth projection, frames the moment as "
        "once-in-a-generation, and closes with a call to read more."
    ),
    _CANDIDATES[1]: (
        "Keeps the four-decade growth claim and the middle-class framing, with a "
        "direct invitation to learn more."
    ),
    _CANDIDATES[2]: (
        "States the fastest-in-40-years expansion plainly and ties the opportunity "
        "to the middle class's success, ending on a clear pointer."
    ),
    _CANDIDATES[3]: (
        "Repeats the growth claim and adds a rhetorical question that invites "
        "curiosity about why the plan matters."
    ),
    _CANDIDATES[4]: (
        "Condenses the growth outlook into one sentence and casts the investment "
        "as a shared, collective opportunity."
    ),
}

# Champion-pass probabilities: the incumbent's win probability per challenge.
# The second paraphrase takes the crown after comparison two and defends it.
_CHAMPION_PS = {
    (_CANDIDATES[0], _CANDIDATES[1]): 0.42,
    (_CANDIDATES[1], _CANDIDATES[2]): 0.31,
    (_CANDIDATES[2], _CANDIDATES[3]): 0.58,
    (_CANDIDATES[2], _CANDIDATES[4]): 0.64,
}


def build_replay_bundle(cache_dir: str | Path, *, mode: AssemblyMode | str = "pair_plus_explanations") -> ResponseCache:
    """Record every response the compose pipeline needs into a fresh cache."""

    mode = AssemblyMode.parse(mode)
    cache = ResponseCache(cache_dir)

    request = {"text": DEMO_DRAFT, **ParaphraseConfig().request_fields()}
    request_key = json.dumps(request, sort_keys=True, ensure_ascii=True, separators=(",", ":"))
    cache.put(
        response_digest("paraphraser", "paraphraser", request_key),
        json.dumps({"paraphrases": list(DEMO_PARAPHRASES)}),
        {"provider_id": "paraphraser", "model_id": "paraphraser"},
    )

    for text, explanation in _EXPLANATIONS.items():
        prompt = render_engaging_prompt(
            text, with_completion_stub=RECORDED_PROVIDER.completion_stub
        )
        cache.put(
            response_digest(
                RECORDED_PROVIDER.provider_id, RECORDED_PROVIDER.model_id, prompt
            ),
            explanation,
            {
                "provider_id": RECORDED_PROVIDER.provider_id,
                "model_id": RECORDED_PROVIDER.model_id,
            },
        )

    scorer = RemoteScorer("replay", cache=cache)
    for (first, second), p_first in _CHAMPION_PS.items():
        e1 = _EXPLANATIONS[first] if mode.needs_explanations else None
        e2 = _EXPLANATIONS[second] if mode.needs_explanations else None
        payload = scorer.request_payload(first, second, e1, e2, mode)
        request_key = json.dumps(payload, sort_keys=True, ensure_ascii=True, separators=(",", ":"))
        cache.put(
            response_digest("scorer", scorer.model_id, request_key),
            json.dumps({"p_t1": p_first}),
            {"provider_id": "scorer", "model_id": scorer.model_id},
        )
    return cache


def replay_config(root: str | Path) -> EngineConfig:
    """Engine config whose every remote is the recorded bundle under root/cache."""

    root = Path(root)
    cache_dir = root / "cache"
    build_replay_bundle(cache_dir)
    config = EngineConfig(
        providers={"recorded": RECORDED_PROVIDER},
        default_provider="recorded",
        paraphraser_endpoint="replay",
        scorer_endpoint="replay",
        cache_dir=str(cache_dir),
        state_dir=str(root / "state"),
        model_path=str(root / "model.bin"),
        assembly_mode=AssemblyMode.PAIR_PLUS_EXPLANATIONS,
    )
    return config
