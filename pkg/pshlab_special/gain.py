"""
Translation-gain functions and the ratio that controls the exhaustion bounds.

A gain f(eps) is the guaranteed increase of the boundary distance when a
point is pushed a distance eps along the inward graph direction:

    delta(z) + f(eps) <= delta(z + eps * w) <= delta(z) + eps.

The form depends on the boundary regularity class:

- lipschitz:          eps / C
- hoelder:            (eps / C) ** (1 / gamma)
- loglip:             -eps / (C_tilde * W-1(-eps / C))
- loglip_simplified:  eps / (C_tilde * log(1 / eps))

The two Log-Lipschitz forms are kept apart so that both the exact and the
simplified paths can be exercised.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from pshlab_special.exceptions import DomainError
from pshlab_special.lambert import INV_E, LambertBranch, lambert_w, lambert_w_array

logger = logging.getLogger(__name__)


class GainForm(StrEnum):
    LIPSCHITZ = "lipschitz"
    HOELDER = "hoelder"
    LOGLIP = "loglip"
    LOGLIP_SIMPLIFIED = "loglip_simplified"


@dataclass(frozen=True)
class GainFunction:
    form: GainForm
    C: float = 1.0
    C_tilde: float = 1.0
    # Hoelder exponent; ignored by the other forms.
    gamma: float = 1.0
    # Upper end of the validity interval (0, eps1]. None picks the largest
    # value for which 0 < f(eps) <= eps holds for the form.
    eps1: float | None = None

    def __post_init__(self) -> None:
        if self.C <= 0 or self.C_tilde <= 0:
            raise DomainError(
                f"Gain constants must be positive, got C={self.C}, C_tilde={self.C_tilde}"
            )
        if self.form is GainForm.HOELDER and not 0.0 < self.gamma < 1.0:
            raise DomainError(f"Hoelder exponent must lie in (0, 1), got {self.gamma}")
        if self.form in (GainForm.LIPSCHITZ, GainForm.HOELDER) and self.C < 1.0:
            raise DomainError(
                f"{self.form} gain needs C >= 1 to stay below eps, got {self.C}"
            )
        if self.eps1 is not None and self.eps1 > self.natural_limit():
            raise DomainError(
                f"eps1={self.eps1} exceeds the {self.form} limit {self.natural_limit()}"
            )

    def natural_limit(self) -> float:
        if self.form is GainForm.LOGLIP:
            # W-1 needs -eps/C >= -1/e.
            return self.C * INV_E
        if self.form is GainForm.LOGLIP_SIMPLIFIED:
            # log(1/eps) >= 1/C_tilde keeps f(eps) <= eps.
            return math.exp(-1.0 / self.C_tilde)
        return 1.0

    @property
    def upper(self) -> float:
        return self.eps1 if self.eps1 is not None else self.natural_limit()

    def __call__(self, eps: float) -> float:
        return gain(self, eps)


def _check_validity(f: GainFunction, eps: float) -> None:
    if not (0.0 < eps <= f.upper):
        raise DomainError(f"{f.form} gain is valid on (0, {f.upper}], got eps={eps!r}")


def gain(f: GainFunction, eps: float) -> float:
    _check_validity(f, eps)
    match f.form:
        case GainForm.LIPSCHITZ:
            return eps / f.C
        case GainForm.HOELDER:
            return float((eps / f.C) ** (1.0 / f.gamma))
        case GainForm.LOGLIP:
            u = max(-eps / f.C, -INV_E)
            return -eps / (f.C_tilde * lambert_w(LambertBranch.LOWER, u))
        case GainForm.LOGLIP_SIMPLIFIED:
            return eps / (f.C_tilde * math.log(1.0 / eps))
    raise DomainError(f"Unknown gain form {f.form!r}")


def gain_array(f: GainFunction, eps: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Vectorised `gain`; every entry must lie in the validity interval."""
    values = np.asarray(eps, dtype=float)
    if values.size and (values.min() <= 0.0 or values.max() > f.upper):
        raise DomainError(f"{f.form} gain is valid on (0, {f.upper}]")
    match f.form:
        case GainForm.LIPSCHITZ:
            return values / f.C
        case GainForm.HOELDER:
            return np.asarray((values / f.C) ** (1.0 / f.gamma))
        case GainForm.LOGLIP:
            u = np.maximum(-values / f.C, -INV_E)
            w = lambert_w_array(LambertBranch.LOWER, u).reshape(values.shape)
            return np.asarray(-values / (f.C_tilde * w))
        case GainForm.LOGLIP_SIMPLIFIED:
            return np.asarray(values / (f.C_tilde * np.log(1.0 / values)))
    raise DomainError(f"Unknown gain form {f.form!r}")


def gain_derivative(f: GainFunction, eps: float) -> float:
    """
    Closed-form d f / d eps.

    For the exact Log-Lipschitz form the derivative is
    -1 / (C_tilde * (1 + W-1(-eps/C))), positive on (0, C/e) and unbounded
    at the branch point, so eps = C/e is excluded.
    """
    _check_validity(f, eps)
    match f.form:
        case GainForm.LIPSCHITZ:
            return 1.0 / f.C
        case GainForm.HOELDER:
            return float((eps / f.C) ** (1.0 / f.gamma - 1.0) / (f.gamma * f.C))
        case GainForm.LOGLIP:
            if eps >= f.C * INV_E:
                raise DomainError("The Log-Lipschitz gain is not differentiable at C/e")
            w = lambert_w(LambertBranch.LOWER, -eps / f.C)
            return -1.0 / (f.C_tilde * (1.0 + w))
        case GainForm.LOGLIP_SIMPLIFIED:
            log_inv = math.log(1.0 / eps)
            return (log_inv + 1.0) / (f.C_tilde * log_inv**2)
    raise DomainError(f"Unknown gain form {f.form!r}")


def omega_ratio(f: GainFunction, eps: float) -> float:
    """
    omega(eps) = log(eps / f(eps)) / log(1 / eps).

    Not to be confused with a modulus of continuity. For the Log-Lipschitz
    forms it tends to 0 as eps -> 0, which is what makes the exhaustion
    bounded by 0 at the boundary.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"omega_ratio needs 0 < eps < 1, got {eps!r}")
    return math.log(eps / gain(f, eps)) / math.log(1.0 / eps)


def fit_form_equivalence(
    first: GainFunction, second: GainFunction, eps_values: Iterable[float]
) -> float:
    """
    Smallest C_hat with first/second in [1/C_hat, C_hat] on `eps_values`.

    Used to compare the exact and simplified Log-Lipschitz gains.
    """
    worst = 1.0
    for eps in eps_values:
        ratio = gain(first, eps) / gain(second, eps)
        worst = max(worst, ratio, 1.0 / ratio)
    return worst


def lipschitz_gain(C: float) -> GainFunction:
    return GainFunction(GainForm.LIPSCHITZ, C=C)


def hoelder_gain(gamma: float, C: float) -> GainFunction:
    return GainFunction(GainForm.HOELDER, C=C, gamma=gamma)


def loglip_gain(C: float = 1.0, C_tilde: float = 1.0) -> GainFunction:
    return GainFunction(GainForm.LOGLIP, C=C, C_tilde=C_tilde)


def loglip_simplified_gain(C_tilde: float = 1.0) -> GainFunction:
    return GainFunction(GainForm.LOGLIP_SIMPLIFIED, C_tilde=C_tilde)
