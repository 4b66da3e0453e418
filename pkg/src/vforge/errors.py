"""Exception hierarchy shared across the toolkit.

Every error raised by vforge derives from :class:`VforgeError`, so callers
can catch one base class at pipeline boundaries.  Data-shape problems are
grouped under :class:`DataError`, failures of external HTTP services under
:class:`AdapterError`.
"""

from __future__ import annotations


class VforgeError(Exception):
    """Base class for all toolkit errors."""


class DataError(VforgeError):
    """Invalid or inconsistent input data."""


# --- text / document errors -------------------------------------------------

class EmptyDocumentError(DataError):
    """Operation requires a document with at least one sentence."""


# --- scorer errors ----------------------------------------------------------

class EmptyCorpusError(DataError):
    """Model training requires a non-empty corpus."""


class BadWeightsError(DataError):
    """Interpolation weights malformed (wrong arity, negative, or not summing to 1)."""


class ModelFormatError(DataError):
    """Persisted model file has a bad magic header or version."""


# --- negation attack errors -------------------------------------------------

class BadConfigError(DataError):
    """Attack configuration outside its domain (e.g. odd edit count)."""


class InsufficientNegationsError(DataError):
    """Fewer negation occurrences than requested deletions."""

    def __init__(self, available: int, requested: int) -> None:
        super().__init__(f"requested {requested} deletions, only {available} negations present")
        self.available = available
        self.requested = requested


class NoEligiblePositionsError(DataError):
    """Document has no position where a negation can be inserted."""


class InsufficientCandidatesError(DataError):
    """Fewer sampled candidate positions than requested insertions."""


class IneligiblePositionError(DataError):
    """Insertion scoring requested at a non-word or out-of-range position."""


# --- extension attack errors ------------------------------------------------

class EmptyQuestionError(DataError):
    """Prompt template requires a non-empty question."""


class EmptyGenerationError(DataError):
    """Generator output was empty or whitespace-only."""


class TooFewSentencesError(DataError):
    """Sentence removal requires at least two sentences."""


class ArticleTooShortError(DataError):
    """Article has fewer word tokens than the required prefix length."""


class GeneratorEmptyError(VforgeError):
    """Generator produced no sentences before the target fraction was reached."""


class ZeroLengthError(DataError):
    """Fraction undefined for zero total tokens."""


class RealTooShortError(DataError):
    """Length matching requires the real article to be at least as long as the fake."""


# --- dataset errors ---------------------------------------------------------

class DuplicateIdError(DataError):
    """Two examples share an id."""


class InvariantViolationError(DataError):
    """A labeled example fails a scenario invariant."""

    def __init__(self, example_id: str, reason: str) -> None:
        super().__init__(f"example {example_id!r}: {reason}")
        self.example_id = example_id
        self.reason = reason


class EmptyDatasetError(DataError):
    """Split requires a non-empty dataset."""


class SchemaError(DataError):
    """A serialized record is missing fields or has out-of-domain values."""

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


# --- evaluation errors ------------------------------------------------------

class LengthMismatchError(DataError):
    """Parallel label/score lists differ in length."""


class EmptyInputError(DataError):
    """Metric requires at least one element."""


class SingleClassError(DataError):
    """Operation requires both classes to be present."""


class NoOverlapError(DataError):
    """No doubly-annotated tasks available for agreement."""


# --- annotation errors ------------------------------------------------------

class UnknownAnnotatorError(DataError):
    """Annotator id is blank or malformed."""


class UnknownTaskError(DataError):
    """Submission references a task id not in the queue."""


class BadVerdictError(DataError):
    """Verdict outside the task kind's domain."""


class DuplicateSubmissionError(DataError):
    """Annotator already answered this task."""


# --- external adapter errors ------------------------------------------------

class AdapterError(VforgeError):
    """Base class for failures talking to an external model service."""


class TransportError(AdapterError):
    """Non-success HTTP status or connection failure."""

    def __init__(self, status: int | None, detail: str = "") -> None:
        super().__init__(f"transport failure (status={status}) {detail}".rstrip())
        self.status = status


class RequestTimeoutError(AdapterError):
    """Request exceeded its deadline."""


class MalformedResponseError(AdapterError):
    """Response body missing required fields or out-of-domain values."""


class BadProbabilityError(AdapterError):
    """Scorer returned a probability outside (0, 1]."""
