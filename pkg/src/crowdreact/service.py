"""Engine facade and the HTTP service exposing it under /v1.

The engine owns the loaded model, the response cache, and the run log.
Read endpoints never mutate shared state (explanation caching excepted,
which is write-once by digest), and model reload is an atomic swap.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .cache import ResponseCache
from .config import EngineConfig
from .errors import (
    CrowdReactError,
    EmptyDraft,
    EmptyResponse,
    ModelNotLoaded,
    ParaphraserUnavailable,
    ProviderRefusal,
    ProviderUnavailable,
    RecordError,
    RemoteScorerUnavailable,
    RequestInvalid,
    TaggerUnavailable,
)
from .generator import explain_text, make_explainer
from .runlog import RunLog
from .scorer import AssemblyMode, PairwiseModel, RemoteScorer, load_model, predict
from .tournament import ParaphraserClient, generate_candidates, select_best

_STATUS_BY_ERROR: tuple[tuple[type, int], ...] = (
    (ModelNotLoaded, 503),
    (ProviderUnavailable, 502),
    (ProviderRefusal, 502),
    (ParaphraserUnavailable, 502),
    (RemoteScorerUnavailable, 502),
    (TaggerUnavailable, 502),
    (EmptyResponse, 502),
    (RecordError, 400),
    (EmptyDraft, 400),
    (RequestInvalid, 400),
)


def _status_for(error: CrowdReactError) -> int:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(error, cls):
            return status
    return 500


class Engine:
    """Shared read-mostly state behind the CLI and the HTTP endpoints."""

    def __init__(self, config: EngineConfig) -> None:
        self.config = config
        self.cache = ResponseCache(config.cache_dir)
        self.runlog = RunLog(Path(config.state_dir) / "runs.ldjson")
        self._model: PairwiseModel | None = None
        self._model_lock = threading.Lock()

    # -- model handling -------------------------------------------------

    def reload_model(self) -> bool:
        path = Path(self.config.model_path)
        if not path.exists():
            return False
        model = load_model(path)
        with self._model_lock:
            self._model = model
        return True

    @property
    def model_loaded(self) -> bool:
        if self.config.scorer_endpoint:
            return True
        with self._model_lock:
            if self._model is not None:
                return True
        return Path(self.config.model_path).exists()

    def scorer(self):
        if self.config.scorer_endpoint:
            return RemoteScorer(self.config.scorer_endpoint, cache=self.cache)
        with self._model_lock:
            if self._model is not None:
                return self._model
        if not self.reload_model():
            raise ModelNotLoaded(f"no model at {self.config.model_path}")
        with self._model_lock:
            assert self._model is not None
            return self._model

    def paraphraser(self) -> ParaphraserClient:
        return ParaphraserClient(self.config.paraphraser_endpoint, cache=self.cache)

    # -- operations ------------------------------------------------------

    def assess(self, t1_text: str, t2_text: str, with_explanations: bool = False) -> dict:
        if not t1_text.strip() or not t2_text.strip():
            raise RequestInvalid("t1_text and t2_text must be non-empty")
        mode = AssemblyMode.PAIR_ONLY
        explanations: dict[str, str] = {}
        e1 = e2 = None
        if with_explanations:
            provider = self.config.provider()
            e1 = explain_text(t1_text, provider, self.cache).text
            e2 = explain_text(t2_text, provider, self.cache).text
            explanations = {"t1": e1, "t2": e2}
            if self.config.assembly_mode.needs_explanations:
                mode = self.config.assembly_mode
        scored = predict(self.scorer(), t1_text, t2_text, e1, e2, mode)
        response = {"p_t1": scored.p_t1, "verdict": scored.verdict, "mode": mode.value}
        if with_explanations:
            response["explanations"] = explanations
        self._log("assess", {"t1_text": t1_text, "t2_text": t2_text}, response)
        return response

    def compose(self, draft: str, n_candidates: int | None = None) -> dict:
        if not draft.strip():
            raise EmptyDraft("draft is empty")
        pconfig = self.config.paraphrase
        if n_candidates is not None:
            if n_candidates < 1:
                raise RequestInvalid("n_candidates must be >= 1")
            pconfig = replace(pconfig, num_return_sequences=n_candidates)
        candidates = generate_candidates(draft, self.paraphraser(), pconfig)

        mode = self.config.assembly_mode
        explainer = None
        if mode.needs_explanations:
            explainer = make_explainer(self.config.provider(), self.cache)
        result = select_best(candidates, self.scorer(), explainer, mode)
        response = result.as_dict()
        self._log("compose", {"draft": draft, "n_candidates": n_candidates}, response)
        return response

    def explain_one(self, text: str, provider_name: str | None = None) -> dict:
        if not text.strip():
            raise RequestInvalid("text must be non-empty")
        provider = self.config.provider(provider_name)
        explanation = explain_text(text, provider, self.cache)
        response = {
            "text": explanation.text,
            "provider_id": provider.provider_id,
            "model_id": provider.model_id,
            "prompt_digest": explanation.prompt_digest,
        }
        self._log("explain", {"text": text}, response)
        return response

    def runs(self) -> list[dict]:
        return [record.as_dict() for record in self.runlog.read_all()]

    def _log(self, kind: str, inputs: dict, outputs: dict) -> None:
        digest = hashlib.sha256(
            json.dumps(inputs, sort_keys=True, ensure_ascii=True).encode("utf-8")
        ).hexdigest()
        with self.runlog.record(kind, config_digest=self.config.digest(), inputs_digest=digest) as record:
            record.outputs = outputs


class AssessRequest(BaseModel):
    t1_text: str
    t2_text: str
    with_explanations: bool = False


class ComposeRequest(BaseModel):
    draft: str
    n_candidates: int | None = None


class ExplainRequest(BaseModel):
    text: str
    provider: str | None = None


def _safe_detail(detail: dict) -> dict:
    return json.loads(json.dumps(detail, default=str))


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="crowdreact", version=__version__)

    @app.exception_handler(CrowdReactError)
    async def handle_engine_error(request: Request, exc: CrowdReactError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc),
            content={"code": exc.code, "message": exc.message, "detail": _safe_detail(exc.detail)},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={
                "code": "validation_error",
                "message": "request body failed validation",
                "detail": {"errors": json.loads(json.dumps(exc.errors(), default=str))},
            },
        )

    @app.get("/v1/health")
    async def health() -> dict:
        return {"status": "ok", "model_loaded": engine.model_loaded, "version": __version__}

    @app.post("/v1/assess")
    async def assess(request: AssessRequest) -> dict:
        return engine.assess(request.t1_text, request.t2_text, request.with_explanations)

    @app.post("/v1/compose")
    async def compose(request: ComposeRequest) -> dict:
        return engine.compose(request.draft, request.n_candidates)

    @app.post("/v1/explain")
    async def explain(request: ExplainRequest) -> dict:
        return engine.explain_one(request.text, request.provider)

    @app.get("/v1/runs")
    async def runs() -> dict:
        return {"runs": engine.runs()}

    return app
