from enum import Enum
from typing import Optional


class ErrorCode(str, Enum):
    ORDERING_VIOLATION = "ORDERING_VIOLATION"
    RANGE_VIOLATION = "RANGE_VIOLATION"
    SHAPE_MISMATCH = "SHAPE_MISMATCH"
    NONPOSITIVE_WEIGHT = "NONPOSITIVE_WEIGHT"
    NEGATIVE_VALUE = "NEGATIVE_VALUE"
    INDEX_OUT_OF_RANGE = "INDEX_OUT_OF_RANGE"
    SIZE_LIMIT_EXCEEDED = "SIZE_LIMIT_EXCEEDED"
    INVALID_INSTANCE = "INVALID_INSTANCE"
    EMPTY_SNAPSHOT = "EMPTY_SNAPSHOT"
    UNKNOWN_ROLE = "UNKNOWN_ROLE"
    DIVISION_BY_ZERO = "DIVISION_BY_ZERO"


class CngError(Exception):
    """Base error of the toolkit; always carries an ErrorCode."""

    def __init__(self, code: ErrorCode, message: Optional[str] = None):
        self.code = code
        self.message = message or code.value
        super().__init__(f"{code.value}: {self.message}")


class InstanceError(CngError):
    """Raised when a game instance or a profile does not match its invariants."""


class SizeLimitError(CngError):
    def __init__(self, n: int, cap: int):
        super().__init__(
            ErrorCode.SIZE_LIMIT_EXCEEDED,
            f"enumeration over n={n} exceeds the cap of {cap}",
        )
        self.n = n
        self.cap = cap


class SnapshotError(CngError):
    """Raised by snapshot ingestion."""
