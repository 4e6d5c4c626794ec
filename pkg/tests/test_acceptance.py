"""Acceptance suite: one test per release criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Everything here is offline and deterministic: remote dependencies are
stubs or recorded replay bundles.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from pathlib import Path

from click.testing import CliRunner

from crowdreact.cli import main
from crowdreact.evaluation import (
    PredictionSet,
    accuracy,
    assign_bucket,
    evaluate,
    f1_positive,
    render_report,
    significance,
)
from crowdreact.generator import render_compare_prompt, render_engaging_prompt
from crowdreact.pairing import PairingConfig, build_pairs
from crowdreact.scorer import (
    AssemblyMode,
    ScoredComparison,
    TrainConfig,
    assemble_input,
    train,
    training_accuracy,
)
from crowdreact.showcase import DEMO_DRAFT, DEMO_WINNER, replay_config
from crowdreact.tournament import select_best

from .conftest import (
    BUSINESS,
    brute_force_pairs,
    marker_pairs,
    random_corpus,
    separable_pairs,
)
from .test_cli import base_config, write_config, write_dump

GOLDEN = Path(__file__).parent / "golden"


def _pass(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE PASS: {name}{suffix}")


def test_metric_anchor_constant_predictor_on_balanced_set():
    started = time.perf_counter()
    n = 200
    gold = [True] * (n // 2) + [False] * (n // 2)
    preds = [True] * n
    acc = accuracy(preds, gold)
    f1 = f1_positive(preds, gold)
    assert acc == 0.5
    assert f1 == 2 / 3
    assert f"{acc * 100:.1f}%" == "50.0%"
    assert f"{f1 * 100:.1f}%" == "66.7%"
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _pass("metric anchor 50.0% / 66.7%", f"{elapsed:.3f}s")


def test_pairing_oracle_equivalence_on_randomized_corpora():
    started = time.perf_counter()
    checked = 0
    for seed in range(20):
        rng = random.Random(seed)
        corpus = random_corpus(rng, rng.randint(50, 200))
        config = PairingConfig(order_seed=seed)
        built = build_pairs(corpus, config)
        oracle = brute_force_pairs(corpus, config)
        assert built == oracle, f"divergence from oracle at seed {seed}"
        checked += len(built)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    _pass("pairing oracle equivalence", f"20 corpora, {checked} pairs, {elapsed:.2f}s")


def test_bucket_anchors():
    assert assign_bucket(9.9) == 0
    assert assign_bucket(10.0) == 1
    assert assign_bucket(141.3) == 3
    assert assign_bucket(311.5) == 4
    _pass("bucket anchors 9.9→0, 10→1, 141.3→3, 311.5→4")


def test_prompt_golden_files():
    compare = (GOLDEN / "compare_prompt.txt").read_bytes()
    engaging = (GOLDEN / "engaging_prompt.txt").read_bytes()
    completion = (GOLDEN / "engaging_prompt_completion.txt").read_bytes()
    assert render_compare_prompt("A", "B").encode("utf-8") == compare
    assert render_engaging_prompt("Hi").encode("utf-8") == engaging
    assert render_engaging_prompt("Hi", with_completion_stub=True).encode("utf-8") == completion
    _pass("prompt templates byte-match golden files")


def test_explanation_lift_mechanism():
    started = time.perf_counter()
    config = TrainConfig()
    rng = random.Random(7)
    train_pairs, train_expl = marker_pairs(rng, 1000)
    held_pairs, held_expl = marker_pairs(rng, 200)
    all_expl = {**train_expl, **held_expl}

    pair_only = train(train_pairs, {}, config, AssemblyMode.PAIR_ONLY)
    with_expl = train(train_pairs, train_expl, config, AssemblyMode.PAIR_PLUS_EXPLANATIONS)

    acc_pair_only = training_accuracy(pair_only, held_pairs, {}, AssemblyMode.PAIR_ONLY)
    acc_with_expl = training_accuracy(
        with_expl, held_pairs, all_expl, AssemblyMode.PAIR_PLUS_EXPLANATIONS
    )
    lift = acc_with_expl - acc_pair_only
    elapsed = time.perf_counter() - started
    assert lift >= 0.20, f"lift {lift:.3f} below 20 points"
    assert elapsed < 60.0
    _pass(
        "explanation lift mechanism",
        f"pair-only {acc_pair_only:.3f}, with explanations {acc_with_expl:.3f}, "
        f"lift {lift:.3f}, {elapsed:.1f}s",
    )


def test_separable_training_accuracy():
    started = time.perf_counter()
    pairs = separable_pairs(random.Random(42), 500)
    model = train(pairs, {}, TrainConfig(), AssemblyMode.PAIR_ONLY)
    acc = training_accuracy(model, pairs, {}, AssemblyMode.PAIR_ONLY)
    elapsed = time.perf_counter() - started
    assert acc >= 0.95
    assert elapsed < 60.0
    _pass("separable training accuracy", f"{acc:.3f} on 500 pairs, {elapsed:.1f}s")


class _RankScorer:
    """Antisymmetric and transitive: higher rank wins."""

    def __init__(self, ranks: dict[str, int]):
        self.ranks = ranks

    def predict(self, t1, t2, e1=None, e2=None, mode=AssemblyMode.PAIR_ONLY):
        p = 1.0 / (1.0 + math.exp(-(self.ranks[t1] - self.ranks[t2])))
        return ScoredComparison(
            p_t1=p, verdict=p > 0.5, assembled=assemble_input(t1, t2, mode=AssemblyMode.PAIR_ONLY)
        )


def test_tournament_oracle_over_all_permutations():
    texts = ["one", "two", "three", "four", "five", "six"]
    ranks = {t: i for i, t in enumerate(texts)}
    scorer = _RankScorer(ranks)
    tournaments = 0
    for size in range(1, 7):
        subset = texts[:size]
        expected = max(subset, key=lambda t: ranks[t])
        for perm in itertools.permutations(subset):
            result = select_best(list(perm), scorer)
            assert result.winner == expected
            assert len(result.comparisons) == size - 1
            tournaments += 1
    _pass("tournament oracle over permutations", f"{tournaments} tournaments")


def test_significance_sanity():
    rng = random.Random(5)
    pairs, _ = marker_pairs(rng, 200)
    perfect = PredictionSet.from_verdicts("perfect", {p.pair_id: p.label for p in pairs})
    clone = PredictionSet(system_id="clone", entries=list(perfect.entries))
    identical = significance(perfect, clone, pairs, iterations=10_000, seed=1)
    assert identical.p_value == 1.0

    coin = PredictionSet.from_verdicts("coin", {p.pair_id: rng.random() < 0.5 for p in pairs})
    sig = significance(perfect, coin, pairs, iterations=10_000, seed=1)
    again = significance(perfect, coin, pairs, iterations=10_000, seed=1)
    assert sig.p_value < 0.01
    assert sig.p_value == again.p_value
    _pass("significance sanity", f"identical p=1.0, perfect-vs-coin p={sig.p_value:.5f}")


def test_build_and_train_are_bit_reproducible(tmp_path, six_tweet_records):
    runner = CliRunner()
    dump = write_dump(tmp_path, six_tweet_records)
    config_path = write_config(tmp_path, base_config(tmp_path))

    build_digests = []
    for out in ("b1", "b2"):
        result = runner.invoke(
            main,
            ["--config", str(config_path), "cred", "build",
             "--tweets", str(dump), "--out-dir", str(tmp_path / out), "--order-seed", "13"],
        )
        assert result.exit_code == 0, result.output
        build_digests.append(result.output.splitlines()[-1].split()[0])
    assert build_digests[0] == build_digests[1]

    from crowdreact.pairing import write_pairs

    pairs_path = tmp_path / "train.ldjson"
    write_pairs(pairs_path, separable_pairs(random.Random(1), 40))
    train_digests = []
    for name in ("t1.bin", "t2.bin"):
        result = runner.invoke(
            main,
            ["--config", str(config_path), "ggea", "train",
             "--pairs", str(pairs_path), "--out", str(tmp_path / name),
             "--mode", "pair_only", "--seed", "13"],
        )
        assert result.exit_code == 0, result.output
        train_digests.append(result.output.splitlines()[-1].split()[0])
    assert train_digests[0] == train_digests[1]
    _pass(
        "build/train determinism",
        f"build {build_digests[0][:12]}…, model {train_digests[0][:12]}…",
    )


def test_compose_replays_recorded_winner(tmp_path):
    runner = CliRunner()
    config = replay_config(tmp_path)
    config_path = write_config(tmp_path, config)
    result = runner.invoke(
        main, ["--config", str(config_path), "compose", "--draft", DEMO_DRAFT]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output.rsplit("\nwinner:", 1)[0])
    assert payload["winner"] == DEMO_WINNER
    assert len(payload["candidates"]) == 5
    assert len(payload["comparisons"]) == 4
    _pass("recorded compose scenario returns the recorded winner")


def test_report_renders_balanced_anchor_end_to_end():
    # Evaluate a constant-positive system over a balanced pair fixture and
    # check the rendered numbers, tying the anchor to the full report path.
    pairs, _ = marker_pairs(random.Random(3), 100)
    trues = [p for p in pairs if p.label][:25]
    falses = [p for p in pairs if not p.label][:25]
    fixture = trues + falses
    preds = PredictionSet.from_verdicts("always-first", {p.pair_id: True for p in fixture})
    report = evaluate(preds, fixture, vocabulary=(BUSINESS,))
    text = render_report(report)
    assert "accuracy=50.0%" in text
    assert "F1=66.7%" in text
    _pass("balanced anchor renders 50.0% / 66.7% through the report path")
