"""Engine configuration: one JSON file, environment overrides, then flags.

Precedence is file < environment < command-line flags. The config digest
feeds run records so replays can prove they ran the same setup.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping

from .corpus import DEFAULT_REFERENCE_TIMEZONE, DEFAULT_TOPIC_VOCABULARY, IngestConfig
from .generator import ProviderRef
from .pairing import DEFAULT_SPLIT_DATE, PairingConfig
from .scorer import AssemblyMode, TrainConfig
from .tournament import ParaphraseConfig

ENV_CONFIG_PATH = "CROWDREACT_CONFIG"
ENV_OVERRIDES = {
    "CROWDREACT_CACHE_DIR": "cache_dir",
    "CROWDREACT_STATE_DIR": "state_dir",
    "CROWDREACT_MODEL_PATH": "model_path",
    "CROWDREACT_PARAPHRASER_ENDPOINT": "paraphraser_endpoint",
    "CROWDREACT_TAGGER_ENDPOINT": "tagger_endpoint",
    "CROWDREACT_SCORER_ENDPOINT": "scorer_endpoint",
    "CROWDREACT_DEFAULT_PROVIDER": "default_provider",
    "CROWDREACT_ASSEMBLY_MODE": "assembly_mode",
}


def _default_providers() -> dict[str, ProviderRef]:
    return {
        "default": ProviderRef(
            provider_id="stub", model_id="echo", endpoint="stub:echo-engaging"
        )
    }


@dataclass
class EngineConfig:
    reference_timezone: str = DEFAULT_REFERENCE_TIMEZONE
    topic_vocabulary: tuple[str, ...] = DEFAULT_TOPIC_VOCABULARY
    pairing: PairingConfig = field(default_factory=PairingConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    paraphrase: ParaphraseConfig = field(default_factory=ParaphraseConfig)
    providers: dict[str, ProviderRef] = field(default_factory=_default_providers)
    default_provider: str = "default"
    paraphraser_endpoint: str = "stub:numbered-variants"
    tagger_endpoint: str | None = None
    scorer_endpoint: str | None = None
    cache_dir: str = "cache"
    state_dir: str = "state"
    model_path: str = "model.bin"
    assembly_mode: AssemblyMode = AssemblyMode.PAIR_PLUS_EXPLANATIONS
    split_date: date = DEFAULT_SPLIT_DATE

    def ingest_config(self, *, strict: bool = False) -> IngestConfig:
        return IngestConfig(
            reference_timezone=self.reference_timezone,
            topic_vocabulary=self.topic_vocabulary,
            strict=strict,
        )

    def provider(self, name: str | None = None) -> ProviderRef:
        key = name or self.default_provider
        if key not in self.providers:
            raise KeyError(f"provider {key!r} is not configured")
        return self.providers[key]

    def as_dict(self) -> dict:
        return {
            "reference_timezone": self.reference_timezone,
            "topic_vocabulary": list(self.topic_vocabulary),
            "pairing": {
                "margin_fraction": self.pairing.margin_fraction,
                "max_gap_days": self.pairing.max_gap_days,
                "max_time_of_day_gap_hours": self.pairing.max_time_of_day_gap_hours,
                "topic_prob_threshold": self.pairing.topic_prob_threshold,
                "weekdays_only": self.pairing.weekdays_only,
                "order_seed": self.pairing.order_seed,
            },
            "train": {
                "epochs": self.train.epochs,
                "batch_size": self.train.batch_size,
                "learning_rate": self.train.learning_rate,
                "weight_decay": self.train.weight_decay,
                "seed": self.train.seed,
                "feature_dim": self.train.feature_dim,
                "ngram_orders": list(self.train.ngram_orders),
                "char_ngram_orders": list(self.train.char_ngram_orders),
            },
            "paraphrase": self.paraphrase.request_fields(),
            "providers": {
                name: {
                    "provider_id": ref.provider_id,
                    "model_id": ref.model_id,
                    "endpoint": ref.endpoint,
                    "max_response_tokens": ref.max_response_tokens,
                    "completion_stub": ref.completion_stub,
                }
                for name, ref in sorted(self.providers.items())
            },
            "default_provider": self.default_provider,
            "paraphraser_endpoint": self.paraphraser_endpoint,
            "tagger_endpoint": self.tagger_endpoint,
            "scorer_endpoint": self.scorer_endpoint,
            "cache_dir": self.cache_dir,
            "state_dir": self.state_dir,
            "model_path": self.model_path,
            "assembly_mode": self.assembly_mode.value,
            "split_date": self.split_date.isoformat(),
        }

    def digest(self) -> str:
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _config_from_dict(data: Mapping) -> EngineConfig:
    config = EngineConfig()
    if "reference_timezone" in data:
        config.reference_timezone = data["reference_timezone"]
    if "topic_vocabulary" in data:
        config.topic_vocabulary = tuple(data["topic_vocabulary"])
    if "pairing" in data:
        config.pairing = PairingConfig(**data["pairing"])
    if "train" in data:
        train = dict(data["train"])
        for key in ("ngram_orders", "char_ngram_orders"):
            if key in train:
                train[key] = tuple(train[key])
        config.train = TrainConfig(**train)
    if "paraphrase" in data:
        config.paraphrase = ParaphraseConfig(**data["paraphrase"])
    if "providers" in data:
        config.providers = {
            name: ProviderRef(**ref) for name, ref in data["providers"].items()
        }
    for key in (
        "default_provider",
        "paraphraser_endpoint",
        "tagger_endpoint",
        "scorer_endpoint",
        "cache_dir",
        "state_dir",
        "model_path",
    ):
        if key in data:
            setattr(config, key, data[key])
    if "assembly_mode" in data:
        config.assembly_mode = AssemblyMode.parse(data["assembly_mode"])
    if "split_date" in data:
        config.split_date = date.fromisoformat(data["split_date"])
    return config


def load_config(
    path: str | Path | None = None,
    *,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, object] | None = None,
) -> EngineConfig:
    """Build the engine config, honoring file < environment < explicit overrides."""

    env = os.environ if env is None else env
    if path is None and env.get(ENV_CONFIG_PATH):
        path = env[ENV_CONFIG_PATH]

    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    config = _config_from_dict(data)

    for env_key, attr in ENV_OVERRIDES.items():
        if env.get(env_key):
            value: object = env[env_key]
            if attr == "assembly_mode":
                value = AssemblyMode.parse(env[env_key])
            setattr(config, attr, value)

    for attr, value in (overrides or {}).items():
        if value is None:
            continue
        if attr == "assembly_mode" and not isinstance(value, AssemblyMode):
            value = AssemblyMode.parse(str(value))
        if attr == "split_date" and isinstance(value, str):
            value = date.fromisoformat(value)
        setattr(config, attr, value)
    return config
