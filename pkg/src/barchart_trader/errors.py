"""Exception hierarchy shared by every stage of the pipeline.

The CLI prints ``type(exc).__name__`` as the machine-parsable error class,
so names here are part of the command-line contract.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PipelineError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PipelineError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class OrderingError(ValidationError):
    pass


class EmptySliceError(PipelineError):
    pass


class InsufficientDataError(PipelineError):
    pass


class LookaheadMissingError(PipelineError):
    pass


class AlignmentError(PipelineError):
    pass


class EmptyClassError(PipelineError):
    pass


class ShapeError(PipelineError):
    pass


class StateError(PipelineError):
    pass


class ModelFormatError(PipelineError):
    pass


class DegenerateTradeError(PipelineError):
    pass


class DomainError(PipelineError):
    pass


class ConfigError(PipelineError):
    pass
