"""Exception hierarchy shared across the engine.

Every error carries a stable machine-readable ``code`` so CLI exits and
service responses can map failures without string matching.
"""

from __future__ import annotations


class CrowdReactError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str, **detail: object) -> None:
        super().__init__(message)
        self.message = message
        self.detail = detail


class RecordError(CrowdReactError):
    """A raw input record failed validation; pinpoints field and record index."""

    code = "record_error"

    def __init__(self, message: str, *, field: str, index: int | None = None) -> None:
        super().__init__(message, field=field, index=index)
        self.field = field
        self.index = index


class MissingField(RecordError):
    code = "missing_field"


class MalformedTimestamp(RecordError):
    code = "malformed_timestamp"


class NegativeCount(RecordError):
    code = "negative_count"


class EmptyText(RecordError):
    code = "empty_text"


class DuplicateId(RecordError):
    code = "duplicate_id"


class UnknownTopicLabel(RecordError):
    code = "unknown_topic_label"


class TaggerUnavailable(CrowdReactError):
    """Topic tagger could not be reached; reports how many tweets stayed bare."""

    code = "tagger_unavailable"

    def __init__(self, message: str, *, pending: int) -> None:
        super().__init__(message, pending=pending)
        self.pending = pending


class MissingAnnotation(CrowdReactError):
    code = "missing_annotation"


class ProviderUnavailable(CrowdReactError):
    code = "provider_unavailable"


class ProviderRefusal(CrowdReactError):
    """The generative provider declined to answer (guardrail refusal)."""

    code = "provider_refusal"


class EmptyResponse(CrowdReactError):
    code = "empty_response"


class MissingExplanation(CrowdReactError):
    code = "missing_explanation"


class EmptyTrainingSet(CrowdReactError):
    code = "empty_training_set"


class RemoteScorerUnavailable(CrowdReactError):
    code = "remote_scorer_unavailable"


class ParaphraserUnavailable(CrowdReactError):
    code = "paraphraser_unavailable"


class EmptyDraft(CrowdReactError):
    code = "empty_draft"


class EmptyCandidateList(CrowdReactError):
    code = "empty_candidate_list"


class LengthMismatch(CrowdReactError):
    code = "length_mismatch"


class EmptySet(CrowdReactError):
    code = "empty_set"


class UnmatchedPairId(CrowdReactError):
    code = "unmatched_pair_id"


class MissingPrediction(CrowdReactError):
    code = "missing_prediction"


class CoverageMismatch(CrowdReactError):
    code = "coverage_mismatch"


class ModelNotLoaded(CrowdReactError):
    code = "model_not_loaded"


class RequestInvalid(CrowdReactError):
    """A service or CLI request failed input validation."""

    code = "validation_error"
