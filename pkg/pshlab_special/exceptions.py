from pshlab.exceptions import PshlabException


class SpecialFunctionError(PshlabException):
    pass


class DomainError(SpecialFunctionError):
    """Raised when an argument lies outside the domain of a branch or gain form."""

    pass


class IterationLimitReached(SpecialFunctionError):
    """Raised when the Halley refinement does not settle within its step budget."""

    pass
