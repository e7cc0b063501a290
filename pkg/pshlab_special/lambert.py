"""
Real-branch Lambert W.

W is the inverse of w -> w * exp(w). Two real branches exist:

- W0 (principal) on [-1/e, inf) with values in [-1, inf),
- W-1 (lower) on [-1/e, 0) with values in (-inf, -1].

The evaluation follows the usual recipe: an initial guess from the
branch-point series (near -1/e) or from the asymptotic expansion
log z - log log z, refined with Halley's method until the step is at
round-off level.

References:
    R.M. Corless, G.H. Gonnet, D.E.G. Hare, D.J. Jeffrey, D.E. Knuth,
    "On the Lambert W function", Adv. Comput. Math. 5 (1996) 329-359.
"""

import logging
import math
from enum import IntEnum

import numpy as np
import numpy.typing as npt

from pshlab_special.exceptions import DomainError, IterationLimitReached

logger = logging.getLogger(__name__)

INV_E = math.exp(-1.0)

_MAX_ITERATIONS = 50
# Halley steps at or below a few ulp of w are round-off.
_STEP_TOLERANCE = 4.0 * np.finfo(float).eps
# A step that no longer shrinks below this relative size is oscillating at the last bits.
_STALL_TOLERANCE = 1e-12
# Below this distance from -1/e the 3-term series is used directly; the
# Halley step is badly conditioned at the double root.
_BRANCH_POINT_RADIUS = 1e-6
# Series guess is better than the asymptotic one within this distance.
_SERIES_GUESS_RADIUS = 1.5
# Arguments this close below -1/e are treated as the branch point itself.
_BRANCH_POINT_SLACK = 4 * np.finfo(float).eps * INV_E


class LambertBranch(IntEnum):
    PRINCIPAL = 0
    LOWER = -1

    def domain_label(self) -> str:
        if self is LambertBranch.PRINCIPAL:
            return "[-1/e, inf)"
        return "[-1/e, 0)"


def _check_domain(branch: LambertBranch, x: npt.NDArray[np.float64]) -> None:
    bad = ~np.isfinite(x) | (x < -INV_E - _BRANCH_POINT_SLACK)
    if branch is LambertBranch.LOWER:
        bad |= x >= 0.0
    if bad.any():
        first = float(x[np.flatnonzero(bad)[0]])
        raise DomainError(
            f"W{int(branch)} is defined on {branch.domain_label()}, got {first!r}"
        )


def _branch_series(
    branch: LambertBranch, p: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Three terms of the expansion in q = +/- sqrt(2(e*x + 1)) about -1/e."""
    q = np.sqrt(2.0 * math.e * p)
    if branch is LambertBranch.LOWER:
        q = -q
    return -1.0 + q - q**2 / 3.0 + 11.0 / 72.0 * q**3


def _initial_guess(
    branch: LambertBranch, x: npt.NDArray[np.float64], p: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    # First-order series; the higher terms overshoot away from -1/e.
    q = np.sqrt(2.0 * math.e * p)
    series = -1.0 + q if branch is LambertBranch.PRINCIPAL else -1.0 - q
    if branch is LambertBranch.PRINCIPAL:
        far = p > _SERIES_GUESS_RADIUS
        lx = np.log(np.where(far, x, 2.0))
        return np.where(far, lx - np.log(lx), series)
    # Lower branch: log(-x) - log(-log(-x)) + ... as x -> 0-.
    far = x > -0.25
    l1 = np.log(np.where(far, -x, 0.5))
    l2 = np.log(-l1)
    return np.where(far, l1 - l2 + l2 / l1, series)


def lambert_w_array(
    branch: LambertBranch, x: npt.ArrayLike
) -> npt.NDArray[np.float64]:
    """Vectorised W on one real branch. See `lambert_w` for the contract."""
    values = np.atleast_1d(np.asarray(x, dtype=float))
    _check_domain(branch, values)

    p = np.maximum(values + INV_E, 0.0)
    near = p < _BRANCH_POINT_RADIUS
    w = np.where(
        near, _branch_series(branch, p), _initial_guess(branch, values, p)
    )

    active = ~near
    previous = np.full(values.shape, np.inf)
    if branch is LambertBranch.PRINCIPAL:
        zeros = values == 0.0
        w[zeros] = 0.0
        active &= ~zeros

    for _ in range(_MAX_ITERATIONS):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        wa = w[idx]
        xa = values[idx]
        # Halley step
        c1 = np.exp(wa)
        c2 = wa * c1 - xa
        w1 = wa + (wa != -1.0)
        dw = c2 / (c1 * w1 - ((wa + 2.0) * c2 / (2.0 * w1)))
        w[idx] = wa - dw
        step = np.abs(dw)
        scale = 1.0 + np.abs(w[idx])
        stalled = (step >= previous[idx]) & (step <= _STALL_TOLERANCE * scale)
        done = (step <= _STEP_TOLERANCE * scale) | stalled
        previous[idx] = step
        active[idx[done]] = False
    else:
        if active.any():
            raise IterationLimitReached(
                f"W{int(branch)} did not converge in {_MAX_ITERATIONS} steps "
                f"for {int(active.sum())} argument(s)"
            )

    if branch is LambertBranch.PRINCIPAL:
        return np.maximum(w, -1.0)
    return np.minimum(w, -1.0)


def lambert_w(branch: LambertBranch, x: float) -> float:
    """
    Evaluate W on a real branch.

    Raises DomainError when x is outside the branch domain: x < -1/e for
    either branch, or x >= 0 for W-1. Both branches return exactly -1 at
    the branch point.
    """
    return float(lambert_w_array(branch, x)[0])
