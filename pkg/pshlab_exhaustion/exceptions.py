from typing import Any

from pshlab.exceptions import PshlabException
from pshlab_mergelyan.exceptions import TranslateEscapes

__all__ = [
    "AttainmentViolation",
    "ExhaustionError",
    "GammaTooSmall",
    "NonSmoothPoint",
    "OmegaRatioViolation",
    "TranslateEscapes",
]


class ExhaustionError(PshlabException):
    pass


class GammaTooSmall(ExhaustionError):
    """Raised when a patched candidate is not dominated on dB(x_j, r_j/2)."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class OmegaRatioViolation(ExhaustionError):
    """Raised when log(eps/f(eps)) / log(1/eps) is not positive and decaying on the grid."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class AttainmentViolation(ExhaustionError):
    """Raised when the sup over eps is attained below c_hat * delta(z)."""

    def __init__(self, message: str, trace: Any = None) -> None:
        super().__init__(message)
        self.trace = trace


class NonSmoothPoint(ExhaustionError):
    """Raised when the active branch changes inside a finite-difference stencil."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness
