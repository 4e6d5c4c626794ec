"""Walk through pair-dataset curation: ingest, filter, label, split, report.

Run from the repo root:  python demos/01_build_pair_dataset.py
Everything is synthetic and offline.
"""

from datetime import date

from crowdreact import IngestConfig, PairingConfig, ingest_tweets
from crowdreact.pairing import (
    build_pairs,
    corpus_stats,
    margin_ok,
    render_stats_table,
    temporal_split,
    temporally_compatible,
)

# A tiny dump the way it would arrive on disk: one JSON record per line.
records = [
    {"id": "a", "text": "Jobs report: the strongest quarter in years.",
     "created_at": "2021-03-01T14:00:00-05:00", "retweet_count": 100,
     "topic": {"label": "Business & Entrepreneurs", "prob": 0.93}},
    {"id": "b", "text": "New jobs numbers are out today. Read the details.",
     "created_at": "2021-03-01T15:00:00-05:00", "retweet_count": 140,
     "topic": {"label": "Business & Entrepreneurs", "prob": 0.91}},
    {"id": "c", "text": "Unemployment claims fall again this week.",
     "created_at": "2021-03-02T13:30:00-05:00", "retweet_count": 104,
     "topic": {"label": "Business & Entrepreneurs", "prob": 0.88}},
    # Saturday post: the weekday filter will eliminate every pair touching it.
    {"id": "d", "text": "Weekend update on small business support.",
     "created_at": "2021-03-06T11:00:00-05:00", "retweet_count": 900,
     "topic": {"label": "Business & Entrepreneurs", "prob": 0.95}},
    # Different topic: never pairs with the business posts.
    {"id": "e", "text": "Congrats to the championship team!",
     "created_at": "2021-03-01T14:30:00-05:00", "retweet_count": 500,
     "topic": {"label": "Sports", "prob": 0.97}},
    # Bad record: ingestion rejects it and says why.
    {"id": "f", "text": "   ", "created_at": "2021-03-01T10:00:00-05:00", "retweet_count": 3},
]

result = ingest_tweets(records, IngestConfig())
print(f"accepted {result.report.accepted}, rejected {result.report.rejected} "
      f"by class {result.report.rejected_by_code}")

# The four retention conditions, on concrete numbers first.
print("\nmargin rule at 10%:")
print("  100 vs 140 ->", margin_ok(100, 140, 0.10), " (40 >= 10)")
print("  100 vs 104 ->", margin_ok(100, 104, 0.10), " (4 < 10)")
print("  100 vs 100 ->", margin_ok(100, 100, 0.10), " (tie: no label)")

corpus = result.corpus
a, b, c = corpus.tweets[0], corpus.tweets[2], corpus.tweets[3]
print("\ntemporal rule (<= 10 days apart, time of day within 5 hours):")
print(f"  {a.id} vs {b.id} ->", temporally_compatible(a, b, PairingConfig()))

pairs = build_pairs(corpus, PairingConfig(order_seed=0))
print(f"\n{len(pairs)} pairs survive all four conditions:")
for pair in pairs:
    print(f"  {pair.pair_id}: first-wins={pair.label}  "
          f"rel-diff={pair.rel_diff_pct:.1f}%  topic={pair.topic}")

# Time-based split: everything before the boundary day trains the scorer.
train, valid = temporal_split(pairs, date(2021, 3, 2))
print(f"\nsplit at 2021-03-02: {len(train)} train / {len(valid)} valid")

print("\n" + render_stats_table(corpus_stats(pairs)))
