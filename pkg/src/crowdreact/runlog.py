"""Append-only run records: what ran, over which inputs, with what outcome."""

from __future__ import annotations

import json
import uuid
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .cache import utc_now_iso


@dataclass
class RunRecord:
    run_id: str
    kind: str  # build | train | eval | assess | compose | explain | serve
    config_digest: str
    inputs_digest: str
    outputs: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    status: str = "running"

    def as_dict(self) -> dict:
        return asdict(self)


class RunLog:
    """Line-delimited JSON log; records are only ever appended."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, record: RunRecord) -> None:
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.as_dict(), sort_keys=True, ensure_ascii=False) + "\n")

    def read_all(self) -> list[RunRecord]:
        if not self.path.exists():
            return []
        records = []
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(RunRecord(**json.loads(line)))
        return records

    @contextmanager
    def record(self, kind: str, *, config_digest: str, inputs_digest: str = ""):
        """Record one run; the caller fills record.outputs before the block ends."""

        record = RunRecord(
            run_id=uuid.uuid4().hex,
            kind=kind,
            config_digest=config_digest,
            inputs_digest=inputs_digest,
            started=utc_now_iso(),
        )
        try:
            yield record
        except BaseException:
            record.status = "failed"
            record.finished = utc_now_iso()
            self.append(record)
            raise
        record.status = "succeeded"
        record.finished = utc_now_iso()
        self.append(record)
