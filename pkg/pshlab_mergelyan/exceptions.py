from typing import Any

from pshlab.exceptions import PshlabException


class ApproximationError(PshlabException):
    pass


class NuTooLarge(ApproximationError):
    """Raised when the translation size nu is not below eps_w / 2."""

    pass


class TranslateEscapes(ApproximationError):
    """Raised when a translated evaluation point leaves the domain."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class MarginViolated(ApproximationError):
    """Raised when a sampled ball B(z, f(nu)) around the closure is not inside U."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class DegenerateCover(ApproximationError):
    """Raised when the cover of the closure cannot carry the cutoff functions."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness
