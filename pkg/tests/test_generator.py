from __future__ import annotations

import threading
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowdreact.cache import ResponseCache, response_digest
from crowdreact.errors import (
    EmptyResponse,
    EmptyText,
    ProviderRefusal,
    ProviderUnavailable,
)
from crowdreact.generator import (
    ProviderRef,
    explain,
    explain_text,
    parse_verdict,
    render_compare_prompt,
    render_engaging_prompt,
    zero_shot_compare,
    zero_shot_predictions,
)
from crowdreact.pairing import PairingConfig, materialize_pair
from crowdreact.transport import TransportRefusal, register_stub

from .conftest import tweet

GOLDEN = Path(__file__).parent / "golden"


def stub_provider(name: str, **kwargs) -> ProviderRef:
    return ProviderRef(provider_id="stub", model_id=name, endpoint=f"stub:{name}", **kwargs)


class TestPromptRendering:
    def test_compare_prompt_matches_golden_bytes(self):
        golden = (GOLDEN / "compare_prompt.txt").read_text(encoding="utf-8")
        assert render_compare_prompt("A", "B") == golden

    def test_compare_prompt_contains_fixed_question(self):
        prompt = render_compare_prompt("first text", "second text")
        assert "just one word" in prompt
        assert prompt.splitlines()[0] == "text-1: first text"
        assert prompt.splitlines()[1] == "text-2: second text"

    def test_compare_prompt_rejects_empty(self):
        with pytest.raises(EmptyText):
            render_compare_prompt("A", "")

    def test_engaging_prompt_matches_golden_bytes(self):
        golden = (GOLDEN / "engaging_prompt.txt").read_text(encoding="utf-8")
        assert render_engaging_prompt("Hi") == golden

    def test_engaging_prompt_completion_variant_matches_golden_bytes(self):
        golden = (GOLDEN / "engaging_prompt_completion.txt").read_text(encoding="utf-8")
        assert render_engaging_prompt("Hi", with_completion_stub=True) == golden

    def test_engaging_prompt_rejects_empty(self):
        with pytest.raises(EmptyText):
            render_engaging_prompt("", with_completion_stub=True)

    def test_rendering_is_pure(self):
        assert render_compare_prompt("x", "y") == render_compare_prompt("x", "y")


class TestParseVerdict:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Yes.", True),
            ("yes", True),
            ('"YES"', True),
            ("no", False),
            ("No, it will not.", False),
            ("I cannot determine that.", None),
            ("", None),
            ("42", None),
        ],
    )
    def test_examples(self, raw, expected):
        verdict = parse_verdict(raw)
        assert verdict.t1_wins is expected
        assert verdict.raw == raw

    @given(st.text(max_size=200))
    def test_total_and_three_valued(self, raw):
        verdict = parse_verdict(raw)
        assert verdict.t1_wins in (True, False, None)


class TestExplain:
    def test_stub_echoes_first_three_words(self, tmp_path):
        cache = ResponseCache(tmp_path)
        provider = stub_provider("echo-engaging")
        explanation = explain(tweet("a", text="Big plans for the economy"), provider, cache)
        assert explanation.text == "mentions Big plans for"
        assert explanation.tweet_id == "a"

    def test_second_identical_call_hits_cache(self, tmp_path):
        calls = []

        def counting(request: dict) -> dict:
            calls.append(request["prompt"])
            return {"text": "because it is vivid"}

        register_stub("counting-explainer", counting)
        cache = ResponseCache(tmp_path)
        provider = stub_provider("counting-explainer")
        first = explain(tweet("a"), provider, cache)
        second = explain(tweet("a"), provider, cache)
        assert len(calls) == 1
        assert first.text == second.text
        assert first.prompt_digest == second.prompt_digest

    def test_cache_soundness_requests_equal_distinct_digests(self, tmp_path):
        seen = []

        def counting(request: dict) -> dict:
            seen.append(request["prompt"])
            return {"text": "reply"}

        register_stub("counting-mixed", counting)
        cache = ResponseCache(tmp_path)
        provider = stub_provider("counting-mixed")
        texts = ["alpha", "beta", "alpha", "gamma", "beta", "alpha"]
        digests = set()
        for text in texts:
            explanation = explain_text(text, provider, cache)
            digests.add(explanation.prompt_digest)
        assert len(seen) == len(digests) == 3

    def test_empty_response_rejected_and_not_cached(self, tmp_path):
        register_stub("silent", lambda request: {"text": "  "})
        cache = ResponseCache(tmp_path)
        provider = stub_provider("silent")
        with pytest.raises(EmptyResponse):
            explain(tweet("a"), provider, cache)
        prompt = render_engaging_prompt(tweet("a").text)
        assert cache.get(response_digest("stub", "silent", prompt)) is None

    def test_unknown_endpoint_maps_to_provider_unavailable(self, tmp_path):
        provider = stub_provider("no-such-stub")
        with pytest.raises(ProviderUnavailable):
            explain(tweet("a"), provider, ResponseCache(tmp_path))

    def test_refusal_propagates_for_explanations(self, tmp_path):
        def refusing(request: dict) -> dict:
            raise TransportRefusal("cannot help with that")

        register_stub("refuser", refusing)
        with pytest.raises(ProviderRefusal):
            explain(tweet("a"), stub_provider("refuser"), ResponseCache(tmp_path))

    def test_completion_stub_changes_prompt_digest(self, tmp_path):
        cache = ResponseCache(tmp_path)
        chat = stub_provider("echo-engaging")
        flan = stub_provider("echo-engaging", completion_stub=True)
        a = explain(tweet("a"), chat, cache)
        b = explain(tweet("a"), flan, cache)
        assert a.prompt_digest != b.prompt_digest

    def test_concurrent_identical_calls_fetch_once(self, tmp_path):
        calls = []
        gate = threading.Barrier(4, timeout=5)

        def slow(request: dict) -> dict:
            calls.append(1)
            return {"text": "shared answer"}

        register_stub("slow-explainer", slow)
        cache = ResponseCache(tmp_path)
        provider = stub_provider("slow-explainer")
        results = []

        def work():
            gate.wait()
            results.append(explain_text("same text", provider, cache).text)

        threads = [threading.Thread(target=work) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(calls) == 1
        assert results == ["shared answer"] * 4


class TestZeroShot:
    def test_always_yes_stub(self, tmp_path):
        verdict = zero_shot_compare(
            tweet("a"), tweet("b"), stub_provider("always-yes"), ResponseCache(tmp_path)
        )
        assert verdict.t1_wins is True

    def test_non_answer_abstains(self, tmp_path):
        register_stub("maybe", lambda request: {"text": "maybe"})
        verdict = zero_shot_compare(
            tweet("a"), tweet("b"), stub_provider("maybe"), ResponseCache(tmp_path)
        )
        assert verdict.is_abstain

    def test_repeated_call_is_cache_hit_with_identical_verdict(self, tmp_path):
        calls = []

        def once(request: dict) -> dict:
            calls.append(1)
            return {"text": "no"}

        register_stub("once-no", once)
        cache = ResponseCache(tmp_path)
        provider = stub_provider("once-no")
        first = zero_shot_compare(tweet("a"), tweet("b"), provider, cache)
        second = zero_shot_compare(tweet("a"), tweet("b"), provider, cache)
        assert len(calls) == 1
        assert first == second
        assert first.t1_wins is False

    def test_refusals_become_abstains_with_counts(self, tmp_path):
        def refusing(request: dict) -> dict:
            raise TransportRefusal("guardrail")

        register_stub("refusing-compare", refusing)
        config = PairingConfig()
        pairs = [
            materialize_pair(tweet(f"a{i}", rt=1), tweet(f"b{i}", rt=10), config)
            for i in range(3)
        ]
        run = zero_shot_predictions(
            pairs, stub_provider("refusing-compare"), ResponseCache(tmp_path)
        )
        assert run.refused == 3
        assert run.abstained == 3
        assert run.covered_pair_ids == []

    def test_batch_run_offline_and_deterministic(self, tmp_path):
        config = PairingConfig()
        pairs = [
            materialize_pair(tweet(f"a{i}", rt=1), tweet(f"b{i}", rt=10), config)
            for i in range(5)
        ]
        provider = stub_provider("always-yes")
        one = zero_shot_predictions(pairs, provider, ResponseCache(tmp_path / "c1"))
        two = zero_shot_predictions(pairs, provider, ResponseCache(tmp_path / "c2"))
        assert one.verdicts == two.verdicts
        assert one.abstained == 0


class TestResponseCache:
    def test_write_once(self, tmp_path):
        cache = ResponseCache(tmp_path)
        cache.put("ab" * 32, "first", {"k": 1})
        entry = cache.put("ab" * 32, "second", {"k": 2})
        assert entry.text == "first"

    def test_sidecar_metadata(self, tmp_path):
        cache = ResponseCache(tmp_path)
        cache.put("cd" * 32, "value", {"provider_id": "p", "model_id": "m"})
        entry = cache.get("cd" * 32)
        assert entry is not None
        assert entry.meta["provider_id"] == "p"
        assert entry.meta["model_id"] == "m"

    def test_digest_depends_on_provider_model_and_prompt(self):
        base = response_digest("p", "m", "prompt")
        assert base != response_digest("p2", "m", "prompt")
        assert base != response_digest("p", "m2", "prompt")
        assert base != response_digest("p", "m", "prompt2")
        assert base == response_digest("p", "m", "prompt")
