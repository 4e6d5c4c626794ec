"""Cross-encoder style input assembly and the trainable pairwise scorer.

The production-scale system this stands in for fine-tunes a transformer
cross-encoder; at desk scale the same contract is served by a hashed
n-gram logistic classifier trained with mini-batch SGD and decoupled
weight decay. Transformer-backed scorers plug in through RemoteScorer
without touching any caller.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.special import expit

from .cache import ResponseCache, response_digest
from .errors import (
    EmptyText,
    EmptyTrainingSet,
    MissingExplanation,
    RemoteScorerUnavailable,
)
from .pairing import LabeledPair
from .transport import TransportFailure, call_endpoint

SEG_T1 = "[T1]"
SEG_T2 = "[T2]"
SEG_E1 = "[E1]"
SEG_E2 = "[E2]"
SEP = "[SEP]"

# Generator responses can run long; clip before assembly so inputs stay bounded.
EXPLANATION_CLIP_CHARS = 1000

MODEL_MAGIC = b"CRWDPWM1"
MODEL_FORMAT_VERSION = 1


class AssemblyMode(Enum):
    PAIR_ONLY = "pair_only"
    PAIR_PLUS_EXPLANATIONS = "pair_plus_explanations"
    EXPLANATIONS_ONLY = "explanations_only"

    @property
    def needs_explanations(self) -> bool:
        return self is not AssemblyMode.PAIR_ONLY

    @classmethod
    def parse(cls, value: "str | AssemblyMode") -> "AssemblyMode":
        if isinstance(value, AssemblyMode):
            return value
        return cls(value.strip().lower())


@dataclass(frozen=True)
class AssembledInput:
    text: str
    mode: AssemblyMode


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 16
    # 2e-5 is the transformer-scale default; a linear model needs a larger step.
    learning_rate: float = 0.05
    weight_decay: float = 0.01
    seed: int = 0
    feature_dim: int = 1 << 16
    ngram_orders: tuple[int, ...] = (1, 2)
    char_ngram_orders: tuple[int, ...] = (3, 4, 5)

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.feature_dim <= 0 or self.feature_dim & (self.feature_dim - 1):
            raise ValueError("feature_dim must be a power of two")


@dataclass
class PairwiseModel:
    """Linear scorer over hashed n-gram features; immutable once trained."""

    weights: np.ndarray
    bias: float
    config: TrainConfig
    version: int = MODEL_FORMAT_VERSION
    epoch_losses: tuple[float, ...] = ()

    def predict(
        self,
        t1: str,
        t2: str,
        e1: str | None = None,
        e2: str | None = None,
        mode: AssemblyMode | str = AssemblyMode.PAIR_ONLY,
    ) -> "ScoredComparison":
        return predict(self, t1, t2, e1, e2, mode)


@dataclass(frozen=True)
class ScoredComparison:
    """Probability that the first text out-reacts the second."""

    p_t1: float
    verdict: bool
    assembled: AssembledInput


def assemble_input(
    t1: str,
    t2: str,
    e1: str | None = None,
    e2: str | None = None,
    mode: AssemblyMode | str = AssemblyMode.PAIR_PLUS_EXPLANATIONS,
) -> AssembledInput:
    """Concatenate the comparison texts and explanations under fixed markers."""

    mode = AssemblyMode.parse(mode)
    if not t1.strip():
        raise EmptyText("t1 is empty", field="t1")
    if not t2.strip():
        raise EmptyText("t2 is empty", field="t2")
    if mode.needs_explanations and (e1 is None or e2 is None):
        raise MissingExplanation(f"mode {mode.value} requires both explanations")

    segments: list[str] = []
    if mode is not AssemblyMode.EXPLANATIONS_ONLY:
        segments += [f"{SEG_T1} {t1}", f"{SEG_T2} {t2}"]
    if mode.needs_explanations:
        assert e1 is not None and e2 is not None
        segments += [
            f"{SEG_E1} {e1[:EXPLANATION_CLIP_CHARS]}",
            f"{SEG_E2} {e2[:EXPLANATION_CLIP_CHARS]}",
        ]
    return AssembledInput(text=f" {SEP} ".join(segments), mode=mode)


def _hash_index(key: str, dim: int) -> int:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") & (dim - 1)


def featurize(text: str, config: TrainConfig) -> dict[int, float]:
    """Hashed bag of word and character n-grams, L2-normalized counts.

    Pure function of (text, config); the hash is blake2b, so indices are
    stable across processes and platforms.
    """

    counts: dict[int, float] = {}
    tokens = text.split()
    for n in config.ngram_orders:
        for i in range(len(tokens) - n + 1):
            key = f"w{n}\x1f" + " ".join(tokens[i : i + n])
            idx = _hash_index(key, config.feature_dim)
            counts[idx] = counts.get(idx, 0.0) + 1.0
    for n in config.char_ngram_orders:
        for i in range(len(text) - n + 1):
            key = f"c{n}\x1f" + text[i : i + n]
            idx = _hash_index(key, config.feature_dim)
            counts[idx] = counts.get(idx, 0.0) + 1.0
    norm = np.sqrt(sum(v * v for v in counts.values()))
    if norm > 0:
        counts = {k: v / norm for k, v in counts.items()}
    return counts


def _explanation_text(value: object) -> str:
    text = getattr(value, "text", value)
    return str(text)


def _assemble_for_pair(
    pair: LabeledPair, explanations: Mapping[str, object], mode: AssemblyMode
) -> AssembledInput:
    e1 = e2 = None
    if mode.needs_explanations:
        missing = [t.id for t in (pair.t1, pair.t2) if t.id not in explanations]
        if missing:
            raise MissingExplanation(
                f"no explanation for tweets {missing} in pair {pair.pair_id}"
            )
        e1 = _explanation_text(explanations[pair.t1.id])
        e2 = _explanation_text(explanations[pair.t2.id])
    return assemble_input(pair.t1.text, pair.t2.text, e1, e2, mode)


def _build_matrix(vectors: Sequence[dict[int, float]], dim: int) -> csr_matrix:
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    all_indices: list[np.ndarray] = []
    all_values: list[np.ndarray] = []
    for row, vec in enumerate(vectors):
        keys = np.fromiter(sorted(vec), dtype=np.int64, count=len(vec))
        all_indices.append(keys)
        all_values.append(np.array([vec[k] for k in keys], dtype=np.float64))
        indptr[row + 1] = indptr[row] + len(vec)
    indices = np.concatenate(all_indices) if all_indices else np.zeros(0, dtype=np.int64)
    values = np.concatenate(all_values) if all_values else np.zeros(0, dtype=np.float64)
    return csr_matrix((values, indices, indptr), shape=(len(vectors), dim))


def train(
    pairs: Sequence[LabeledPair],
    explanations: Mapping[str, object],
    config: TrainConfig | None = None,
    mode: AssemblyMode | str = AssemblyMode.PAIR_PLUS_EXPLANATIONS,
) -> PairwiseModel:
    """Fit the pairwise logistic scorer with seeded mini-batch SGD.

    Weight decay is decoupled from the gradient step and never touches the
    bias. Given (data, config, mode) the returned weights are bit-identical
    across runs.
    """

    config = config or TrainConfig()
    mode = AssemblyMode.parse(mode)
    if not pairs:
        raise EmptyTrainingSet("no training pairs")

    vectors = [featurize(_assemble_for_pair(p, explanations, mode).text, config) for p in pairs]
    X = _build_matrix(vectors, config.feature_dim)
    y = np.array([1.0 if p.label else 0.0 for p in pairs], dtype=np.float64)

    w = np.zeros(config.feature_dim, dtype=np.float64)
    b = 0.0
    rng = np.random.default_rng(config.seed)
    n = len(pairs)
    losses: list[float] = []
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = perm[start : start + config.batch_size]
            Xb = X[batch]
            yb = y[batch]
            z = Xb @ w + b
            p = expit(z)
            # softplus(z) - y*z is the stable form of the logistic loss
            epoch_loss += float(np.sum(np.logaddexp(0.0, z) - yb * z))
            residual = p - yb
            grad_w = Xb.T.dot(residual) / len(batch)
            grad_b = float(np.mean(residual))
            w -= config.learning_rate * grad_w
            b -= config.learning_rate * grad_b
            w *= 1.0 - config.learning_rate * config.weight_decay
        losses.append(epoch_loss / n)

    if not np.all(np.isfinite(w)) or not np.isfinite(b):
        raise ValueError("training produced non-finite weights")
    return PairwiseModel(
        weights=w, bias=float(b), config=config, epoch_losses=tuple(losses)
    )


def predict(
    model: "PairwiseModel | RemoteScorer",
    t1: str,
    t2: str,
    e1: str | None = None,
    e2: str | None = None,
    mode: AssemblyMode | str = AssemblyMode.PAIR_ONLY,
) -> ScoredComparison:
    """Score one comparison with the in-core model or a remote backend."""

    mode = AssemblyMode.parse(mode)
    if not isinstance(model, PairwiseModel):
        return model.predict(t1, t2, e1, e2, mode)
    assembled = assemble_input(t1, t2, e1, e2, mode)
    vec = featurize(assembled.text, model.config)
    z = model.bias
    if vec:
        idx = np.fromiter(vec.keys(), dtype=np.int64, count=len(vec))
        vals = np.fromiter(vec.values(), dtype=np.float64, count=len(vec))
        z = float(model.weights[idx] @ vals + model.bias)
    p = float(expit(z))
    return ScoredComparison(p_t1=p, verdict=p > 0.5, assembled=assembled)


def training_accuracy(
    model: PairwiseModel,
    pairs: Sequence[LabeledPair],
    explanations: Mapping[str, object],
    mode: AssemblyMode | str,
) -> float:
    """Fraction of pairs whose verdict matches the label under this model."""

    mode = AssemblyMode.parse(mode)
    correct = 0
    for pair in pairs:
        e1 = e2 = None
        if mode.needs_explanations:
            e1 = _explanation_text(explanations[pair.t1.id])
            e2 = _explanation_text(explanations[pair.t2.id])
        scored = predict(model, pair.t1.text, pair.t2.text, e1, e2, mode)
        correct += scored.verdict == pair.label
    return correct / len(pairs)


def save_model(model: PairwiseModel, path: str | Path) -> None:
    """Write the versioned binary layout plus a JSON manifest sidecar."""

    path = Path(path)
    cfg = model.config
    blob = bytearray()
    blob += MODEL_MAGIC
    blob += struct.pack("<II", MODEL_FORMAT_VERSION, cfg.feature_dim)
    blob += struct.pack("<H", len(cfg.ngram_orders))
    blob += struct.pack(f"<{len(cfg.ngram_orders)}H", *cfg.ngram_orders)
    blob += struct.pack("<H", len(cfg.char_ngram_orders))
    blob += struct.pack(f"<{len(cfg.char_ngram_orders)}H", *cfg.char_ngram_orders)
    blob += struct.pack("<d", model.bias)
    blob += np.asarray(model.weights, dtype="<f8").tobytes()
    path.write_bytes(bytes(blob))

    manifest = {
        "format_version": MODEL_FORMAT_VERSION,
        "feature_dim": cfg.feature_dim,
        "ngram_orders": list(cfg.ngram_orders),
        "char_ngram_orders": list(cfg.char_ngram_orders),
        "train_config": {
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "learning_rate": cfg.learning_rate,
            "weight_decay": cfg.weight_decay,
            "seed": cfg.seed,
        },
        "epoch_losses": list(model.epoch_losses),
        "weights_sha256": hashlib.sha256(
            np.asarray(model.weights, dtype="<f8").tobytes()
        ).hexdigest(),
    }
    path.with_name(path.name + ".manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> PairwiseModel:
    """Read a model file; predictions are bitwise identical to pre-save ones."""

    path = Path(path)
    blob = path.read_bytes()
    if blob[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ValueError(f"{path} is not a pairwise scorer model file")
    offset = len(MODEL_MAGIC)
    version, feature_dim = struct.unpack_from("<II", blob, offset)
    offset += 8
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version}")
    (n_word,) = struct.unpack_from("<H", blob, offset)
    offset += 2
    ngram_orders = struct.unpack_from(f"<{n_word}H", blob, offset)
    offset += 2 * n_word
    (n_char,) = struct.unpack_from("<H", blob, offset)
    offset += 2
    char_orders = struct.unpack_from(f"<{n_char}H", blob, offset)
    offset += 2 * n_char
    (bias,) = struct.unpack_from("<d", blob, offset)
    offset += 8
    weights = np.frombuffer(blob, dtype="<f8", count=feature_dim, offset=offset).copy()

    manifest_path = path.with_name(path.name + ".manifest.json")
    train_cfg: dict = {}
    epoch_losses: tuple[float, ...] = ()
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        train_cfg = manifest.get("train_config", {})
        epoch_losses = tuple(manifest.get("epoch_losses", ()))
    config = TrainConfig(
        epochs=train_cfg.get("epochs", 20),
        batch_size=train_cfg.get("batch_size", 16),
        learning_rate=train_cfg.get("learning_rate", 0.05),
        weight_decay=train_cfg.get("weight_decay", 0.01),
        seed=train_cfg.get("seed", 0),
        feature_dim=feature_dim,
        ngram_orders=tuple(ngram_orders),
        char_ngram_orders=tuple(char_orders),
    )
    return PairwiseModel(
        weights=weights, bias=float(bias), config=config,
        version=version, epoch_losses=epoch_losses,
    )


class RemoteScorer:
    """Scorer backend behind the shared transport, optionally replay-cached.

    Wire shape: request carries the four segments plus the assembly mode,
    response carries ``{"p_t1": ...}``.
    """

    def __init__(
        self, endpoint: str, *, cache: ResponseCache | None = None, model_id: str = "remote"
    ) -> None:
        self.endpoint = endpoint
        self.cache = cache
        self.model_id = model_id

    def request_payload(
        self, t1: str, t2: str, e1: str | None, e2: str | None, mode: AssemblyMode
    ) -> dict:
        return {"t1": t1, "t2": t2, "e1": e1, "e2": e2, "mode": mode.value}

    def predict(
        self,
        t1: str,
        t2: str,
        e1: str | None = None,
        e2: str | None = None,
        mode: AssemblyMode | str = AssemblyMode.PAIR_ONLY,
    ) -> ScoredComparison:
        mode = AssemblyMode.parse(mode)
        assembled = assemble_input(t1, t2, e1, e2, mode)
        request = self.request_payload(t1, t2, e1, e2, mode)
        request_key = json.dumps(request, sort_keys=True, ensure_ascii=True, separators=(",", ":"))

        def fetch() -> str:
            try:
                payload = call_endpoint(self.endpoint, request)
            except TransportFailure as exc:
                raise RemoteScorerUnavailable(f"remote scorer unavailable: {exc}") from exc
            return json.dumps({"p_t1": float(payload["p_t1"])})

        if self.cache is not None:
            digest = response_digest("scorer", self.model_id, request_key)
            entry, _ = self.cache.get_or_fetch(
                digest, fetch, lambda: {"provider_id": "scorer", "model_id": self.model_id}
            )
            text = entry.text
        else:
            text = fetch()
        p = float(json.loads(text)["p_t1"])
        return ScoredComparison(p_t1=p, verdict=p > 0.5, assembled=assembled)
