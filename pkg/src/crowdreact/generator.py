"""Prompt rendering, provider calls, verdict parsing, and response caching.

Two prompt shapes drive everything: a direct comparison question answered
with one word, and a "why is this engaging" question whose answer augments
the scorer's input. Providers are reached through the shared transport and
every response is cached by content digest, so any run can be replayed
offline from its cache directory.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime

from .cache import CacheEntry, ResponseCache, response_digest, utc_now_iso
from .corpus import Tweet
from .errors import EmptyResponse, EmptyText, ProviderRefusal, ProviderUnavailable
from .transport import TransportFailure, TransportRefusal, call_endpoint, register_stub

COMPARE_PROMPT = (
    "text-1: {t1}\n"
    "text-2: {t2}\n"
    'Will text-1 receive more reactions than text-2. Answer me with "yes", "no", just one word.'
)

ENGAGING_PROMPT = "Why is the following text so engaging?\nText: {text}"
ENGAGING_COMPLETION_STUB = "The text is engaging because"


@dataclass(frozen=True)
class ProviderRef:
    """A generative endpoint plus the sampling cap sent with every request."""

    provider_id: str
    model_id: str
    endpoint: str
    max_response_tokens: int = 200
    completion_stub: bool = False  # append the completion-style trailer to engaging prompts

    def __post_init__(self) -> None:
        if not self.provider_id:
            raise ValueError("provider_id must be non-empty")
        if self.max_response_tokens <= 0:
            raise ValueError("max_response_tokens must be positive")


@dataclass(frozen=True)
class Explanation:
    """Cached generator response on why a text is engaging, with provenance."""

    tweet_id: str
    text: str
    provider: ProviderRef
    prompt_digest: str
    created_at: datetime


@dataclass(frozen=True)
class Verdict:
    """Parsed one-word comparison answer; t1_wins is None when the model abstained."""

    t1_wins: bool | None
    raw: str
    refused: bool = False

    @property
    def is_abstain(self) -> bool:
        return self.t1_wins is None


def render_compare_prompt(t1_text: str, t2_text: str) -> str:
    """Render the direct-comparison prompt; byte-exact template."""

    if not t1_text.strip():
        raise EmptyText("t1_text is empty", field="t1_text")
    if not t2_text.strip():
        raise EmptyText("t2_text is empty", field="t2_text")
    return COMPARE_PROMPT.format(t1=t1_text, t2=t2_text)


def render_engaging_prompt(text: str, *, with_completion_stub: bool = False) -> str:
    """Render the explanation prompt, optionally with the completion-style trailer."""

    if not text.strip():
        raise EmptyText("text is empty", field="text")
    prompt = ENGAGING_PROMPT.format(text=text)
    if with_completion_stub:
        prompt += "\n" + ENGAGING_COMPLETION_STUB
    return prompt


def parse_verdict(raw: str) -> Verdict:
    """Map a response to yes/no on its first alphabetic token; anything else abstains."""

    match = re.search(r"[A-Za-z]+", raw)
    token = match.group(0).lower() if match else ""
    if token == "yes":
        return Verdict(t1_wins=True, raw=raw)
    if token == "no":
        return Verdict(t1_wins=False, raw=raw)
    return Verdict(t1_wins=None, raw=raw)


def fetch_response(provider: ProviderRef, prompt: str, cache: ResponseCache) -> CacheEntry:
    """Resolve one prompt through the cache; at most one provider request per digest."""

    digest = response_digest(provider.provider_id, provider.model_id, prompt)

    def fetch() -> str:
        try:
            payload = call_endpoint(
                provider.endpoint,
                {
                    "model_id": provider.model_id,
                    "prompt": prompt,
                    "max_tokens": provider.max_response_tokens,
                },
            )
        except TransportRefusal as exc:
            raise ProviderRefusal(f"{provider.provider_id} refused: {exc}") from exc
        except TransportFailure as exc:
            raise ProviderUnavailable(f"{provider.provider_id} unavailable: {exc}") from exc
        text = str(payload.get("text", ""))
        if not text.strip():
            raise EmptyResponse(f"{provider.provider_id} returned an empty response")
        return text

    def meta() -> dict:
        return {
            "provider_id": provider.provider_id,
            "model_id": provider.model_id,
            "created_at": utc_now_iso(),
        }

    entry, _ = cache.get_or_fetch(digest, fetch, meta)
    return entry


def explain_text(
    text: str, provider: ProviderRef, cache: ResponseCache, *, text_id: str = ""
) -> Explanation:
    """Ask why a text is engaging; identical asks are served from the cache."""

    prompt = render_engaging_prompt(text, with_completion_stub=provider.completion_stub)
    entry = fetch_response(provider, prompt, cache)
    created = entry.meta.get("created_at")
    return Explanation(
        tweet_id=text_id,
        text=entry.text,
        provider=provider,
        prompt_digest=response_digest(provider.provider_id, provider.model_id, prompt),
        created_at=datetime.fromisoformat(created) if created else datetime.now().astimezone(),
    )


def explain(tweet: Tweet, provider: ProviderRef, cache: ResponseCache) -> Explanation:
    return explain_text(tweet.text, provider, cache, text_id=tweet.id)


def zero_shot_compare(
    t1: Tweet, t2: Tweet, provider: ProviderRef, cache: ResponseCache
) -> Verdict:
    """One-shotless direct comparison; guardrail refusals become abstains."""

    prompt = render_compare_prompt(t1.text, t2.text)
    try:
        entry = fetch_response(provider, prompt, cache)
    except ProviderRefusal as exc:
        return Verdict(t1_wins=None, raw=str(exc), refused=True)
    return parse_verdict(entry.text)


@dataclass
class ZeroShotRun:
    """Batch zero-shot verdicts with abstain/refusal exclusion counts."""

    system_id: str
    verdicts: dict[str, Verdict]
    abstained: int
    refused: int

    @property
    def covered_pair_ids(self) -> list[str]:
        return [pid for pid, v in self.verdicts.items() if not v.is_abstain]


def zero_shot_predictions(
    pairs, provider: ProviderRef, cache: ResponseCache, *, system_id: str | None = None
) -> ZeroShotRun:
    """Run the comparison prompt over a pair set; abstains are excluded, not guessed."""

    verdicts: dict[str, Verdict] = {}
    abstained = refused = 0
    for pair in pairs:
        verdict = zero_shot_compare(pair.t1, pair.t2, provider, cache)
        verdicts[pair.pair_id] = verdict
        if verdict.refused:
            refused += 1
        if verdict.is_abstain:
            abstained += 1
    return ZeroShotRun(
        system_id=system_id or f"zero-shot:{provider.model_id}",
        verdicts=verdicts,
        abstained=abstained,
        refused=refused,
    )


def make_explainer(provider: ProviderRef, cache: ResponseCache):
    """Callable text -> explanation text, deduplicated through the cache."""

    def fn(text: str) -> str:
        return explain_text(text, provider, cache).text

    return fn


def _stub_always(answer: str):
    def fn(request: dict) -> dict:
        return {"text": answer}

    return fn


def _stub_echo_engaging(request: dict) -> dict:
    # Deterministic explanation: echo the first three words of the quoted text.
    prompt = request.get("prompt", "")
    text = ""
    for line in prompt.splitlines():
        if line.startswith("Text: "):
            text = line[len("Text: "):]
            break
    words = text.split()[:3]
    return {"text": "mentions " + " ".join(words) if words else "mentions nothing"}


register_stub("always-yes", _stub_always("yes"))
register_stub("always-no", _stub_always("no"))
register_stub("echo-engaging", _stub_echo_engaging)
