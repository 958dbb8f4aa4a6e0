"""Exception types shared across the package."""


class SadfError(Exception):
    """Base class for all package errors."""


class ParseError(SadfError):
    """A CSV row could not be parsed against the schema."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no


class WrongColumnCountError(ParseError):
    pass


class UnparsableNumericError(ParseError):
    def __init__(self, message: str, line_no: int | None = None, column: str | None = None):
        super().__init__(message, line_no)
        self.column = column


class NoTimeFeatureError(SadfError):
    """The schema has no start-time feature, so time splitting is impossible."""


class InsufficientRowsError(SadfError):
    """A selection policy asked for more rows than are available."""


class EmptyTrainingError(SadfError):
    """An encoder or model was fitted on zero records."""


class PolicyKindMismatchError(SadfError):
    """An encoding policy is incompatible with the feature kind."""


class UnknownFeatureError(SadfError):
    """A feature name does not exist in the schema."""


class MissingValueError(SadfError):
    """A missing cell was encountered under strict encoding."""


class SingleClassTrainingError(SadfError):
    """Training data contains only one class where two are required."""


class DimensionMismatchError(SadfError):
    """Input width does not match the model or encoder dimension."""


class EncoderModelMismatchError(SadfError):
    """Model and encoder disagree on the feature-vector dimension."""


class SinkWriteFailureError(SadfError):
    """An alert or report sink could not be written."""


class SourceUnreadableError(SadfError):
    """The detection input file could not be opened or read."""


class ArtifactFormatError(SadfError):
    """A persisted model or encoder file has a bad magic, version or layout."""
