"""The two prompt shapes, verdict parsing, and the content-addressed cache.

Run from the repo root:  python demos/02_prompts_and_explanations.py
Providers are deterministic stubs; no network involved.
"""

import tempfile

from crowdreact import ProviderRef, parse_verdict, render_compare_prompt, render_engaging_prompt
from crowdreact.cache import ResponseCache
from crowdreact.corpus import IngestConfig, validate_record
from crowdreact.generator import explain, zero_shot_compare
from crowdreact.transport import register_stub

# Prompt type 1 asks for a one-word comparison.
print(render_compare_prompt("Jobs are up.", "Read the jobs report."))

# Prompt type 2 asks why a text is engaging; completion-style providers get
# a trailing stem to finish.
print()
print(render_engaging_prompt("Jobs are up."))
print()
print(render_engaging_prompt("Jobs are up.", with_completion_stub=True))

# Verdict parsing is total: yes / no / abstain, never an exception.
for raw in ['"Yes."', "no way", "It depends on many factors."]:
    verdict = parse_verdict(raw)
    print(f"{raw!r:40} -> t1_wins={verdict.t1_wins}")

# A provider is an endpoint plus a sampling cap; stub endpoints resolve to
# registered functions, which keeps demos and tests fully offline.
register_stub("confident-yes", lambda request: {"text": "yes"})
provider = ProviderRef(provider_id="stub", model_id="demo", endpoint="stub:echo-engaging")
compare_provider = ProviderRef(provider_id="stub", model_id="demo", endpoint="stub:confident-yes")

tweet = validate_record(
    {"id": "a", "text": "Millions of new jobs this quarter.",
     "created_at": "2021-03-01T14:00:00-05:00", "retweet_count": 10},
    IngestConfig(),
)
other = validate_record(
    {"id": "b", "text": "The quarterly report is online.",
     "created_at": "2021-03-01T15:00:00-05:00", "retweet_count": 5},
    IngestConfig(),
)

with tempfile.TemporaryDirectory() as cache_dir:
    cache = ResponseCache(cache_dir)

    explanation = explain(tweet, provider, cache)
    print(f"\nexplanation for {tweet.id!r}: {explanation.text}")
    print(f"prompt digest: {explanation.prompt_digest[:16]}…")

    # The second identical ask never reaches the provider: one file per
    # digest, and the digest covers (provider, model, prompt).
    again = explain(tweet, provider, cache)
    print(f"cache replays the same bytes: {explanation.text == again.text}")

    verdict = zero_shot_compare(tweet, other, compare_provider, cache)
    print(f"\nzero-shot verdict: t1_wins={verdict.t1_wins} (raw {verdict.raw!r})")
