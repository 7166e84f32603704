"""Exception hierarchy for entangle."""

from typing import Optional


class EntangleError(Exception):
    """Base class for every error raised by entangle."""

    def __init__(self, message: str = "", record_id: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.record_id = record_id

    def with_record(self, record_id: str) -> "EntangleError":
        """Attach the id of the record being processed when the error occurred."""
        self.record_id = record_id
        return self

    def __str__(self) -> str:
        if self.record_id is not None:
            return f"[{self.record_id}] {self.message}"
        return self.message


class ValidationError(EntangleError, ValueError):
    """Input violates a documented precondition."""


class ConfigError(ValidationError):
    pass


class EnumerationTooLarge(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class DegenerateMarginal(ValidationError):
    pass


class DegenerateJoint(ValidationError):
    pass


class SameIndex(ValidationError):
    pass


class NonFiniteLogit(ValidationError):
    pass


class NegativeAlpha(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class MissingGold(ValidationError):
    pass


class IncompleteAnnotation(ValidationError):
    pass


class DuplicateResponse(ValidationError):
    pass


class MissingResponse(ValidationError):
    pass


class MixedEncoding(ValidationError):
    pass


class MalformedRecord(ValidationError):
    """A line of an input file could not be decoded.

    Carries the file path and the 1-based line number.
    """

    def __init__(self, path: str, line_number: int, reason: str):
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = path
        self.line_number = line_number
        self.reason = reason
