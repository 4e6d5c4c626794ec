"""Request/response transport shared by provider-style clients.

Every remote dependency (generative providers, topic tagger, paraphraser,
remote scorer) speaks the same shape: POST a JSON object to an endpoint,
get a JSON object back. Three endpoint forms are understood:

- ``http(s)://...``  — real HTTP, with bounded retry on transport errors.
- ``stub:<name>``    — a registered deterministic function, for tests/demos.
- ``replay``         — never fetches; callers must satisfy requests from a
  response cache, which is how recorded runs are replayed offline.
"""

from __future__ import annotations

import os
import time
from typing import Callable

import httpx

# Optional bearer token for HTTP endpoints that require credentials.
ENV_API_TOKEN = "CROWDREACT_API_TOKEN"


class TransportFailure(Exception):
    """Endpoint unreachable or returned a non-answer; may have been retried."""


class TransportRefusal(Exception):
    """Endpoint answered with an explicit refusal; never retried."""


class ReplayMiss(TransportFailure):
    """A replay endpoint was asked for a response that was never recorded."""


StubFn = Callable[[dict], dict]

_STUBS: dict[str, StubFn] = {}


def register_stub(name: str, fn: StubFn) -> None:
    """Bind a deterministic function to the endpoint ``stub:<name>``."""

    _STUBS[name] = fn


def call_endpoint(
    endpoint: str,
    request: dict,
    *,
    attempts: int = 3,
    backoff: float = 0.1,
    timeout: float = 30.0,
) -> dict:
    """Send one logical request, retrying transport errors with exponential backoff.

    Refusals (a response carrying ``{"error": {"code": "refusal", ...}}`` or a
    stub raising :class:`TransportRefusal`) are surfaced immediately.
    """

    if endpoint == "replay":
        raise ReplayMiss(f"no recorded response for request to replay endpoint: {request!r}")
    if endpoint.startswith("stub:"):
        name = endpoint[len("stub:"):]
        fn = _STUBS.get(name)
        if fn is None:
            raise TransportFailure(f"unknown stub endpoint {endpoint!r}")
        return _check_response(fn(request))
    if endpoint.startswith(("http://", "https://")):
        headers = {}
        token = os.environ.get(ENV_API_TOKEN)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last: Exception | None = None
        for attempt in range(attempts):
            try:
                resp = httpx.post(endpoint, json=request, timeout=timeout, headers=headers)
            except httpx.HTTPError as exc:
                last = exc
            else:
                if resp.status_code >= 500:
                    last = TransportFailure(f"{endpoint} returned {resp.status_code}")
                else:
                    return _check_response(resp.json())
            if attempt + 1 < attempts:
                time.sleep(backoff * (2**attempt))
        raise TransportFailure(f"{endpoint} unreachable after {attempts} attempts: {last}")
    raise TransportFailure(f"unsupported endpoint {endpoint!r}")


def _check_response(payload: dict) -> dict:
    if not isinstance(payload, dict):
        raise TransportFailure(f"endpoint returned non-object payload: {payload!r}")
    error = payload.get("error")
    if error:
        code = error.get("code") if isinstance(error, dict) else None
        message = error.get("message", str(error)) if isinstance(error, dict) else str(error)
        if code == "refusal":
            raise TransportRefusal(message)
        raise TransportFailure(message)
    return payload
