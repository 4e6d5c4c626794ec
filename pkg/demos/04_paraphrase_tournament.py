"""Pick the best paraphrase of a draft by champion tournament.

Run from the repo root:  python demos/04_paraphrase_tournament.py

Part one replays a fully recorded scenario (paraphraser, explainer, and
scorer responses all come from a content-addressed cache), so the outcome
is exact and reproducible. Part two runs a live stub scorer to show the
champion walk on fresh candidates.
"""

import math
import tempfile

from crowdreact.cache import ResponseCache
from crowdreact.scorer import AssemblyMode, RemoteScorer, ScoredComparison, assemble_input
from crowdreact.showcase import DEMO_DRAFT, build_replay_bundle
from crowdreact.tournament import (
    ParaphraserClient,
    generate_candidates,
    select_best,
)
from crowdreact.transport import register_stub

with tempfile.TemporaryDirectory() as root:
    cache = build_replay_bundle(root)

    candidates = generate_candidates(DEMO_DRAFT, ParaphraserClient("replay", cache=cache))
    print(f"draft + {len(candidates) - 1} distinct paraphrases "
          "(one recorded duplicate was dropped)")

    # Explanations were recorded per candidate; replay them from the cache.
    from crowdreact.generator import make_explainer
    from crowdreact.showcase import RECORDED_PROVIDER

    result = select_best(
        candidates,
        RemoteScorer("replay", cache=cache),
        make_explainer(RECORDED_PROVIDER, cache),
        AssemblyMode.PAIR_PLUS_EXPLANATIONS,
    )
    print("\nchampion walk (index per round):", result.champion_path)
    for comparison in result.comparisons:
        print(f"  candidate {comparison.first} vs {comparison.second}: "
              f"p(first)={comparison.scored.p_t1:.2f}")
    print(f"\nrecorded winner:\n  {result.winner}")


# Part two: a live (still offline) tournament with a length-preferring scorer.
class LengthScorer:
    def predict(self, t1, t2, e1=None, e2=None, mode=AssemblyMode.PAIR_ONLY):
        p = 1.0 / (1.0 + math.exp(-(len(t1) - len(t2))))
        return ScoredComparison(
            p_t1=p, verdict=p > 0.5, assembled=assemble_input(t1, t2, mode=AssemblyMode.PAIR_ONLY)
        )


register_stub(
    "demo-variants",
    lambda request: {
        "paraphrases": [
            "Jobs are up.",
            "Jobs are up this quarter, and here is what that means for you.",
            "Quarterly jobs are up.",
        ]
    },
)

candidates = generate_candidates("Jobs are up.", ParaphraserClient("stub:demo-variants"))
result = select_best(candidates, LengthScorer(), check_order_sensitivity=True)
print(f"\nlive stub winner: {result.winner!r}")
print(f"order-sensitive under this scorer: {result.order_sensitive}")
