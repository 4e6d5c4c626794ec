from __future__ import annotations

import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from crowdreact.config import EngineConfig
from crowdreact.generator import ProviderRef
from crowdreact.scorer import PairwiseModel, TrainConfig, save_model
from crowdreact.service import Engine, create_app
from crowdreact.showcase import DEMO_DRAFT, DEMO_WINNER, replay_config
from crowdreact.transport import register_stub


def sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


register_stub(
    "length-scorer",
    lambda request: {"p_t1": sigmoid(len(request["t1"]) - len(request["t2"]))},
)


@pytest.fixture
def engine_config(tmp_path) -> EngineConfig:
    config = TrainConfig()
    model = PairwiseModel(weights=np.zeros(config.feature_dim), bias=0.0, config=config)
    model_path = tmp_path / "model.bin"
    save_model(model, model_path)
    register_stub("three-variants", lambda request: {
        "paraphrases": ["short", "a medium length option", "the longest candidate text of all"]
    })
    return EngineConfig(
        providers={
            "default": ProviderRef(provider_id="stub", model_id="echo", endpoint="stub:echo-engaging")
        },
        paraphraser_endpoint="stub:three-variants",
        cache_dir=str(tmp_path / "cache"),
        state_dir=str(tmp_path / "state"),
        model_path=str(model_path),
    )


@pytest.fixture
def client(engine_config) -> TestClient:
    return TestClient(create_app(Engine(engine_config)))


class TestHealth:
    def test_reports_model_state(self, client):
        resp = client.get("/v1/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["model_loaded"] is True


class TestAssess:
    def test_zero_weight_model_gives_half(self, client):
        resp = client.post(
            "/v1/assess", json={"t1_text": "first tweet", "t2_text": "second tweet"}
        )
        assert resp.status_code == 200
        assert resp.json()["p_t1"] == 0.5

    def test_missing_field_is_validation_error(self, client):
        resp = client.post("/v1/assess", json={"t1_text": "only one"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "validation_error"

    def test_blank_text_rejected(self, client):
        resp = client.post("/v1/assess", json={"t1_text": "x", "t2_text": "   "})
        assert resp.status_code == 400

    def test_explanations_cached_across_requests(self, engine_config):
        calls = []

        def counting(request: dict) -> dict:
            calls.append(request["prompt"])
            return {"text": "it cites numbers"}

        register_stub("counting-svc", counting)
        engine_config.providers = {
            "default": ProviderRef(provider_id="stub", model_id="c", endpoint="stub:counting-svc")
        }
        client = TestClient(create_app(Engine(engine_config)))
        body = {"t1_text": "alpha", "t2_text": "beta", "with_explanations": True}
        first = client.post("/v1/assess", json=body)
        before = len(calls)
        second = client.post("/v1/assess", json=body)
        assert first.status_code == second.status_code == 200
        assert len(calls) == before == 2  # one per distinct text, zero on replay
        assert first.json() == second.json()
        assert first.json()["explanations"]["t1"] == "it cites numbers"

    def test_model_not_loaded_is_503(self, tmp_path):
        config = EngineConfig(
            cache_dir=str(tmp_path / "cache"),
            state_dir=str(tmp_path / "state"),
            model_path=str(tmp_path / "missing.bin"),
        )
        client = TestClient(create_app(Engine(config)))
        resp = client.post("/v1/assess", json={"t1_text": "a", "t2_text": "b"})
        assert resp.status_code == 503
        assert resp.json()["code"] == "model_not_loaded"


class TestCompose:
    def test_length_preferring_remote_scorer_picks_longest(self, engine_config):
        engine_config.scorer_endpoint = "stub:length-scorer"
        client = TestClient(create_app(Engine(engine_config)))
        resp = client.post("/v1/compose", json={"draft": "tiny draft"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["winner"] == "the longest candidate text of all"
        assert len(body["comparisons"]) == len(body["candidates"]) - 1

    def test_no_paraphrases_returns_draft(self, engine_config):
        register_stub("no-variants", lambda request: {"paraphrases": []})
        engine_config.paraphraser_endpoint = "stub:no-variants"
        engine_config.scorer_endpoint = "stub:length-scorer"
        client = TestClient(create_app(Engine(engine_config)))
        resp = client.post("/v1/compose", json={"draft": "the only text"})
        assert resp.json()["winner"] == "the only text"
        assert resp.json()["comparisons"] == []

    def test_recorded_scenario_returns_recorded_winner(self, tmp_path):
        config = replay_config(tmp_path)
        client = TestClient(create_app(Engine(config)))
        resp = client.post("/v1/compose", json={"draft": DEMO_DRAFT})
        assert resp.status_code == 200
        body = resp.json()
        assert body["winner"] == DEMO_WINNER
        assert len(body["candidates"]) == 5  # duplicate paraphrase dropped
        assert body["explanations"][DEMO_WINNER]

    def test_paraphraser_down_is_502(self, engine_config):
        engine_config.paraphraser_endpoint = "stub:never-registered"
        client = TestClient(create_app(Engine(engine_config)))
        resp = client.post("/v1/compose", json={"draft": "a draft"})
        assert resp.status_code == 502
        assert resp.json()["code"] == "paraphraser_unavailable"

    def test_empty_draft_is_400(self, client):
        resp = client.post("/v1/compose", json={"draft": "   "})
        assert resp.status_code == 400
        assert resp.json()["code"] == "empty_draft"


class TestExplainEndpoint:
    def test_returns_provenance(self, client):
        resp = client.post("/v1/explain", json={"text": "Read the new report"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["text"] == "mentions Read the new"
        assert body["provider_id"] == "stub"
        assert len(body["prompt_digest"]) == 64


class TestRuns:
    def test_run_log_grows_and_is_returned(self, client):
        client.post("/v1/assess", json={"t1_text": "a", "t2_text": "b"})
        client.post("/v1/compose", json={"draft": "some draft"})
        resp = client.get("/v1/runs")
        assert resp.status_code == 200
        runs = resp.json()["runs"]
        kinds = [r["kind"] for r in runs]
        assert "assess" in kinds and "compose" in kinds
        assert all(r["status"] == "succeeded" for r in runs)
        compose_run = next(r for r in runs if r["kind"] == "compose")
        assert "winner" in compose_run["outputs"]

    def test_read_endpoints_do_not_append_runs(self, client):
        client.get("/v1/health")
        client.get("/v1/runs")
        assert client.get("/v1/runs").json()["runs"] == []
