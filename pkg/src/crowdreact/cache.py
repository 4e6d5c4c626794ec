"""Content-addressed file cache for provider responses.

One file per digest plus a JSON metadata sidecar. Entries are write-once:
a digest fully determines (provider, model, prompt), so a hit can always be
served without a network call, which is what makes recorded pipelines
replayable offline and deterministic.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable


def response_digest(provider_id: str, model_id: str, prompt: str) -> str:
    """Stable content address for one logical request."""

    payload = json.dumps(
        [provider_id, model_id, prompt], ensure_ascii=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class CacheEntry:
    text: str
    meta: dict


class ResponseCache:
    """File-backed cache; writes are atomic (temp file + rename) and write-once."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _paths(self, digest: str) -> tuple[Path, Path]:
        shard = self.root / digest[:2]
        return shard / f"{digest}.txt", shard / f"{digest}.json"

    def _lock_for(self, digest: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(digest, threading.Lock())

    def get(self, digest: str) -> CacheEntry | None:
        body, sidecar = self._paths(digest)
        if not body.exists():
            return None
        meta = json.loads(sidecar.read_text(encoding="utf-8")) if sidecar.exists() else {}
        return CacheEntry(text=body.read_text(encoding="utf-8"), meta=meta)

    def put(self, digest: str, text: str, meta: dict) -> CacheEntry:
        body, sidecar = self._paths(digest)
        body.parent.mkdir(parents=True, exist_ok=True)
        existing = self.get(digest)
        if existing is not None:
            return existing
        _atomic_write(body, text)
        _atomic_write(sidecar, json.dumps(meta, sort_keys=True, ensure_ascii=False))
        return CacheEntry(text=text, meta=meta)

    def get_or_fetch(
        self, digest: str, fetch: Callable[[], str], meta: Callable[[], dict]
    ) -> tuple[CacheEntry, bool]:
        """Return (entry, was_hit); at most one fetch per digest is in flight."""

        entry = self.get(digest)
        if entry is not None:
            return entry, True
        with self._lock_for(digest):
            entry = self.get(digest)
            if entry is not None:
                return entry, True
            text = fetch()
            return self.put(digest, text, meta()), False


def _atomic_write(path: Path, content: str) -> None:
    tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()
