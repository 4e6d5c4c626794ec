"""Train the pairwise scorer with and without explanations and compare them.

Run from the repo root:  python demos/03_train_and_evaluate.py

The synthetic labels here are random with respect to the tweet texts, but a
label-leaking stub generator marks each winner's explanation. Feeding those
explanations into the input is exactly what lifts accuracy, which is the
mechanism the whole generator-guided setup relies on.
"""

import random
from datetime import datetime
from zoneinfo import ZoneInfo

from crowdreact import PredictionSet, TrainConfig, evaluate, significance, train
from crowdreact.corpus import Tweet, TopicAnnotation
from crowdreact.evaluation import render_report
from crowdreact.pairing import LabeledPair
from crowdreact.scorer import AssemblyMode, predict

WORDS = "economy jobs plan health schools roads energy families workers report".split()
MARKER = "winswin"
CREATED = datetime(2021, 3, 1, 14, tzinfo=ZoneInfo("America/New_York"))
TOPIC = TopicAnnotation("Business & Entrepreneurs", 0.9)


def text(rng, n):
    return " ".join(rng.choice(WORDS) for _ in range(n))


def build(rng, n_pairs):
    pairs, explanations = [], {}
    for i in range(n_pairs):
        t1_wins = rng.random() < 0.5
        t1 = Tweet(f"p{i}a", text(rng, 8), CREATED, 20 if t1_wins else 10, TOPIC)
        t2 = Tweet(f"p{i}b", text(rng, 8), CREATED, 10 if t1_wins else 20, TOPIC)
        winner, loser = (t1, t2) if t1_wins else (t2, t1)
        explanations[winner.id] = f"{MARKER} {text(rng, 3)}"
        explanations[loser.id] = f"plainly {text(rng, 3)}"
        pairs.append(LabeledPair(t1, t2, t1_wins, TOPIC.label, 100.0, CREATED))
    return pairs, explanations


rng = random.Random(11)
train_pairs, train_expl = build(rng, 800)
valid_pairs, valid_expl = build(rng, 200)
all_expl = {**train_expl, **valid_expl}

config = TrainConfig()
text_only = train(train_pairs, {}, config, AssemblyMode.PAIR_ONLY)
guided = train(train_pairs, train_expl, config, AssemblyMode.PAIR_PLUS_EXPLANATIONS)
print(f"text-only loss:  {text_only.epoch_losses[0]:.4f} -> {text_only.epoch_losses[-1]:.4f}")
print(f"guided loss:     {guided.epoch_losses[0]:.4f} -> {guided.epoch_losses[-1]:.4f}")


def predictions(model, mode, system_id):
    verdicts = {}
    for pair in valid_pairs:
        e1 = all_expl[pair.t1.id] if mode.needs_explanations else None
        e2 = all_expl[pair.t2.id] if mode.needs_explanations else None
        verdicts[pair.pair_id] = predict(model, pair.t1.text, pair.t2.text, e1, e2, mode).verdict
    return PredictionSet.from_verdicts(system_id, verdicts)


baseline = predictions(text_only, AssemblyMode.PAIR_ONLY, "text-only")
augmented = predictions(guided, AssemblyMode.PAIR_PLUS_EXPLANATIONS, "generator-guided")

report = evaluate(augmented, valid_pairs)
report.significance = significance(augmented, baseline, valid_pairs, iterations=10_000, seed=0)
print()
print(render_report(report))

baseline_report = evaluate(baseline, valid_pairs)
print(f"text-only accuracy:        {baseline_report.overall.accuracy:.3f}")
print(f"generator-guided accuracy: {report.overall.accuracy:.3f}")
