"""
Regularity metadata attached to every graph patch.

A patch graph phi_j is described by a modulus class and a norm M with

    |phi_j(y') - phi_j(z')| <= M * modulus(|y' - z'|)

on B'(0, 4 r_j), together with the translation gain the class guarantees.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from pshlab_domains.exceptions import GeometryError
from pshlab_special.gain import (
    GainFunction,
    hoelder_gain,
    lipschitz_gain,
    loglip_gain,
)

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


class RegularityClass(StrEnum):
    C0 = "c0"
    HOELDER = "hoelder"
    LIPSCHITZ = "lipschitz"
    LOGLIP = "loglip"


@dataclass(frozen=True)
class RegularitySpec:
    class_tag: RegularityClass
    norm: float
    gain_fn: GainFunction | None = None
    # Hoelder exponent; only read for the Hoelder class.
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.norm < 0.0 or not math.isfinite(self.norm):
            raise GeometryError(f"Regularity norm must be finite and >= 0, got {self.norm}")
        if self.class_tag is RegularityClass.HOELDER and not 0.0 < self.gamma < 1.0:
            raise GeometryError(f"Hoelder exponent must lie in (0, 1), got {self.gamma}")

    def modulus(self, t: npt.ArrayLike) -> FloatArray:
        return modulus(self.class_tag, t, self.gamma)

    def gain(self) -> GainFunction:
        if self.gain_fn is None:
            raise GeometryError(f"{self.class_tag} patches carry no translation gain")
        return self.gain_fn


def modulus(class_tag: RegularityClass, t: npt.ArrayLike, gamma: float = 1.0) -> FloatArray:
    """
    The modulus of each class, as a function of the distance t > 0.

    The Log-Lipschitz modulus is t * max(log(1/t), 1) so that it stays
    increasing past t = 1/e.
    """
    t = np.asarray(t, dtype=float)
    match class_tag:
        case RegularityClass.LIPSCHITZ:
            return t
        case RegularityClass.HOELDER:
            return np.asarray(np.power(t, gamma))
        case RegularityClass.LOGLIP:
            safe = np.where(t > 0.0, t, 1.0)
            return np.where(t > 0.0, t * np.maximum(np.log(1.0 / safe), 1.0), 0.0)
        case RegularityClass.C0:
            return np.ones_like(t)
    raise GeometryError(f"Unknown regularity class {class_tag!r}")


def lipschitz_spec(M: float) -> RegularitySpec:
    """Graph with Lipschitz constant M; the gain is eps / sqrt(1 + M^2)."""
    return RegularitySpec(
        RegularityClass.LIPSCHITZ, M, lipschitz_gain(math.sqrt(1.0 + M * M))
    )


def hoelder_spec(gamma: float, M: float) -> RegularitySpec:
    return RegularitySpec(
        RegularityClass.HOELDER,
        M,
        hoelder_gain(gamma, max(2.0 * M, 1.0)),
        gamma=gamma,
    )


def loglip_spec(C: float = 1.0, C_tilde: float = 1.0) -> RegularitySpec:
    return RegularitySpec(RegularityClass.LOGLIP, C, loglip_gain(C, C_tilde))


def fit_modulus_constant(
    graph_fn: Callable[[FloatArray], FloatArray],
    class_tag: RegularityClass,
    pairs: tuple[FloatArray, FloatArray],
    gamma: float = 1.0,
) -> float:
    """
    Smallest M with |phi(y) - phi(z)| <= M * modulus(|y - z|) on the pairs.

    Pairs where the graph is undefined (NaN) or that coincide are skipped.
    For C0 the fitted value is the oscillation sup |phi(y) - phi(z)|.
    """
    first, second = pairs
    diff = np.abs(graph_fn(first) - graph_fn(second))
    t = np.linalg.norm(first - second, axis=-1)
    keep = np.isfinite(diff) & (t > 0.0)
    if not keep.any():
        return 0.0
    scale = modulus(class_tag, t[keep], gamma)
    return float(np.max(diff[keep] / scale))
