"""Exception types shared across the package."""


class MaxMinLyapError(Exception):
    """Base class for package errors."""


class InvalidInputError(MaxMinLyapError):
    """Raised for malformed numeric input (non-finite entries, bad shapes)."""


class ConfigError(MaxMinLyapError):
    """Configuration text could not be parsed or validated.

    Carries the 1-based position of the offending token when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, col {column}: {message}"
        super().__init__(message)


class DomainEvalError(MaxMinLyapError):
    """Expression evaluation left its numeric domain (sqrt of a negative,
    division by zero).  The offending subexpression is reported."""

    def __init__(self, message, subexpr=None):
        self.subexpr = subexpr
        if subexpr is not None:
            message = f"{message} in '{subexpr}'"
        super().__init__(message)


class PartitionError(MaxMinLyapError):
    """The conic state-space partition is inconsistent (coverage violation,
    failed chain ordering, semidefinite cone matrix)."""


class InternalCheckError(MaxMinLyapError):
    """A runtime self-check failed; signals a bug or an over-approximated
    active-index set rather than bad user input."""
