"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: any :class:`PoaiError` is a
user-facing failure (exit 1), OS-level problems exit 2, anything else
is an internal error (exit 3).
"""


class PoaiError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PoaiError):
    """An input value violates a documented invariant."""


class DatasetFormatError(ValidationError):
    """A dataset file is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigurationError(ValidationError):
    """A configuration leaves an operation without a valid choice."""


class ModelFormatError(ValidationError):
    """A model payload cannot be decoded into a scorer."""


class TrainingDivergedError(PoaiError):
    """Training produced a non-finite loss; carries the epoch index."""

    def __init__(self, epoch: int, message: str | None = None):
        super().__init__(message or f"non-finite loss at epoch {epoch}")
        self.epoch = epoch


class SimulationError(PoaiError):
    """A simulation run cannot make progress."""
