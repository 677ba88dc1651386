"""Exception types shared across the package."""


class ArchDseError(Exception):
    """Base class for every error this package raises on purpose."""


class ValidationError(ArchDseError):
    """A value lies outside its documented domain."""


class NonPositiveInput(ValidationError):
    """Accuracy, parameter count, or runtime was zero or negative."""


class ResolutionTooSmall(ArchDseError):
    """Input resolution cannot support the detection feature-map pyramid."""


class ParseError(ArchDseError):
    """A results file or surface CSV could not be parsed."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class EvaluationError(ArchDseError):
    """Base class for external-evaluator failures (skip-and-log in searches)."""


class EvaluationTimeout(EvaluationError):
    """The evaluator did not respond within the configured timeout."""


class ProtocolError(EvaluationError):
    """The evaluator sent something that is not a well-formed response."""


class ProcessError(EvaluationError):
    """The evaluator process could not be run or exited with a failure status."""


class EvaluatorError(EvaluationError):
    """The evaluator answered with a well-formed error response."""


class LedgerError(ArchDseError):
    """A run ledger could not be read, written, or matched to its arguments."""


class EmptyLedger(LedgerError):
    """Selection was asked for, but the ledger holds no successful entries."""
