"""Exception hierarchy shared by all safeperf modules."""

from __future__ import annotations


class SafeperfError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(SafeperfError, ValueError):
    """Malformed input: bad field value, broken tree structure, bad schema.

    ``field`` names the offending input element when one can be identified.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(ValidationError):
    """A numeric argument lies outside the domain of the function."""


class InfeasibleError(SafeperfError):
    """The inputs are well-formed but no admissible solution exists.

    ``constraint`` names the binding constraint (a gate id, a requirement,
    a kinematic limit, ...).
    """

    def __init__(self, message: str, constraint: str | None = None):
        self.constraint = constraint
        super().__init__(message)
