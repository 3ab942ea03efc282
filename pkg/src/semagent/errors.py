"""Exception types shared across the package."""

from __future__ import annotations


class SemagentError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(SemagentError):
    """A scene spec, profile, or layout constraint was violated."""


class LayoutMismatchError(ConfigurationError):
    """Two semantic configurations/goals built over different layouts."""


class TranslationError(SemagentError):
    """A macro-action has no entry in the goal translation table."""


class ControllerError(SemagentError):
    """A low-level controller could not run."""


class ControllerPreconditionError(ControllerError):
    """The macro-action's precondition does not hold in the current world."""


class UnknownActionError(SemagentError):
    """A plan step names an action absent from the grounded task."""


class IllegalTransitionError(SemagentError):
    """A session command is not legal in the current status."""

    def __init__(self, message: str, status: str):
        super().__init__(message)
        self.status = status


class EditRejectedError(SemagentError):
    """A proposed plan edit does not execute or reach the task goal."""

    def __init__(self, message: str, missing: list[str] | None = None, failed_step: int | None = None):
        super().__init__(message)
        self.missing = missing or []
        self.failed_step = failed_step


class PddlError(SemagentError):
    """Base class for PDDL front-end errors."""


class ParseError(PddlError):
    """Lexical or syntactic error, positioned in the source text."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class VocabularyError(PddlError):
    """An atom uses an unknown predicate/object or has the wrong arity."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        if line:
            message = f"{line}:{column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column
