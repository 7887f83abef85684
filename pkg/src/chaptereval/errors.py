"""Exception types raised across the toolkit.

Every malformed input or broken contract surfaces as a subclass of
ChapterEvalError so callers can catch one base type at batch boundaries.
"""


class ChapterEvalError(Exception):
    """Base class for all toolkit errors."""


class InvalidChapterError(ChapterEvalError):
    """A chapter or timeline violates its structural invariants."""


class BucketGapError(ChapterEvalError):
    """A duration falls outside the configured bucket scheme."""


class GroupShapeError(ChapterEvalError):
    """A group pair has more than one chapter on both sides."""


class TimestampSyntaxError(ChapterEvalError):
    """A timestamp string does not match any supported clock format."""

    def __init__(self, message: str, column: int = 0):
        super().__init__(message)
        self.column = column


class NonMonotonicTimestampError(ChapterEvalError):
    """Chapter-list timestamps are not strictly increasing."""


class MissingDurationError(ChapterEvalError):
    """A chapter list has no end for its final chapter and no duration was given."""


class CueSyntaxError(ChapterEvalError):
    """A WebVTT/SRT cue is malformed."""

    def __init__(self, message: str, cue_index: int = -1):
        super().__init__(message)
        self.cue_index = cue_index


class CanonicalFormatError(ChapterEvalError):
    """A canonical JSON document does not match its schema."""


class EmptyTimelineError(ChapterEvalError):
    """An operation received a timeline with no chapters."""


class InstanceTooLargeError(ChapterEvalError):
    """The brute-force matcher was asked to enumerate too large an instance."""


class MissingFieldError(ChapterEvalError):
    """A chapter lacks the text field requested for scoring."""

    def __init__(self, message: str, chapter_index: int = -1):
        super().__init__(message)
        self.chapter_index = chapter_index


class EmptyCorpusError(ChapterEvalError):
    """A corpus-level scorer received no candidate/reference pairs."""


class ScorerProtocolError(ChapterEvalError):
    """The external scorer broke the textsim/1 wire protocol."""


class ScorerTimeoutError(ChapterEvalError):
    """The external scorer missed its response deadline."""


class MissingResponseError(ChapterEvalError):
    """The external scorer left at least one request id unanswered."""

    def __init__(self, message: str, missing_ids=()):
        super().__init__(message)
        self.missing_ids = tuple(missing_ids)


class PerturbationInfeasibleError(ChapterEvalError):
    """A timeline cannot be split or merged as requested."""


class ConfigError(ChapterEvalError):
    """An evaluation config file or flag set is invalid."""
