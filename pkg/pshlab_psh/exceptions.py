from typing import Any

from pshlab.exceptions import PshlabException


class PshError(PshlabException):
    pass


class RegionViolation(PshError):
    """Raised when a field would be evaluated outside its definition region."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class NonFinite(PshError):
    """Raised when a finite-difference stencil meets a -inf or NaN value."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness
