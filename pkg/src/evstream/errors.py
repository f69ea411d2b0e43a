class EngineError(Exception):
    """Base class for every error raised by the engine."""


class PipeConnectionError(EngineError):
    """Bad index, double connection or incompatible pipe types."""


class PipelineError(EngineError):
    """Raised while events are being processed."""


class EvaluationError(PipelineError):
    pass


class PullModeError(PipelineError):
    pass


class ConcurrencyError(EngineError):
    pass


class ParseError(EngineError):
    def __init__(self, message, position=None, expected=None):
        super().__init__(message)
        self.position = position
        self.expected = sorted(set(expected or ()))


class BuildError(EngineError):
    """The parse succeeded but the pipeline could not be assembled."""
