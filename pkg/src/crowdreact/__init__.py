"""Pairwise crowd-reaction assessment engine.

Curates labeled tweet pairs under four retention conditions, augments them
with generator-produced engagement explanations, trains and serves a
pairwise scorer, and selects the best paraphrase of a draft post by
pairwise tournament.
"""

__version__ = "0.1.0"

from .corpus import (
    Corpus,
    FixtureTagger,
    IngestConfig,
    IngestResult,
    RemoteTagger,
    TopicAnnotation,
    Tweet,
    annotate_topics,
    ingest_tweets,
    validate_record,
)
from .evaluation import (
    BucketSpec,
    EvalReport,
    PredictionSet,
    accuracy,
    assign_bucket,
    evaluate,
    f1_positive,
    significance,
)
from .generator import (
    Explanation,
    ProviderRef,
    Verdict,
    explain,
    parse_verdict,
    render_compare_prompt,
    render_engaging_prompt,
    zero_shot_compare,
)
from .pairing import (
    LabeledPair,
    PairingConfig,
    StatsReport,
    build_pairs,
    corpus_stats,
    margin_ok,
    passes_weekday,
    temporal_split,
    temporally_compatible,
    topically_compatible,
)
from .scorer import (
    AssembledInput,
    AssemblyMode,
    PairwiseModel,
    RemoteScorer,
    ScoredComparison,
    TrainConfig,
    assemble_input,
    featurize,
    load_model,
    predict,
    save_model,
    train,
)
from .tournament import (
    ParaphraseConfig,
    ParaphraserClient,
    TournamentResult,
    generate_candidates,
    select_best,
)

__all__ = [
    "__version__",
    "Corpus",
    "FixtureTagger",
    "IngestConfig",
    "IngestResult",
    "RemoteTagger",
    "TopicAnnotation",
    "Tweet",
    "annotate_topics",
    "ingest_tweets",
    "validate_record",
    "BucketSpec",
    "EvalReport",
    "PredictionSet",
    "accuracy",
    "assign_bucket",
    "evaluate",
    "f1_positive",
    "significance",
    "Explanation",
    "ProviderRef",
    "Verdict",
    "explain",
    "parse_verdict",
    "render_compare_prompt",
    "render_engaging_prompt",
    "zero_shot_compare",
    "LabeledPair",
    "PairingConfig",
    "StatsReport",
    "build_pairs",
    "corpus_stats",
    "margin_ok",
    "passes_weekday",
    "temporal_split",
    "temporally_compatible",
    "topically_compatible",
    "AssembledInput",
    "AssemblyMode",
    "PairwiseModel",
    "RemoteScorer",
    "ScoredComparison",
    "TrainConfig",
    "assemble_input",
    "featurize",
    "load_model",
    "predict",
    "save_model",
    "train",
    "ParaphraseConfig",
    "ParaphraserClient",
    "TournamentResult",
    "generate_candidates",
    "select_best",
]
