from typing import Any

from pshlab.exceptions import PshlabException


class GeometryError(PshlabException):
    pass


class PointOutsideDomain(GeometryError):
    """Raised when a point handed to a distance or translation routine is not inside the domain."""

    def __init__(self, message: str, point: Any = None) -> None:
        super().__init__(message)
        self.point = point


class ConvergenceFailure(GeometryError):
    """Raised when the distance minimizer misses its tolerance within the iteration budget."""

    pass


class NoCoveringPatch(GeometryError):
    """Raised when a sampled boundary point lies in no atlas ball."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class CoverDegenerate(GeometryError):
    """Raised when the shrunk cover sets miss the sampled closure, or a d_j is below eps_w / 2."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class InvalidAtlas(GeometryError):
    pass


class UnknownDomain(GeometryError):
    pass
