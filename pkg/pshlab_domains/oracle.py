"""
Brute-force distance oracle.

Independent of the meridian search: the graph distance is the minimum of
|z - (y', g(y'))| over a dense grid of y', refined twice around the best
sample. In C^1 the grid runs over the full horizontal line, both sides of
the axis; in higher dimension it runs over the meridian radius.
"""

import logging

import numpy as np
import numpy.typing as npt

from pshlab_domains.exceptions import PointOutsideDomain
from pshlab_domains.geometry import (
    BoundedDomain,
    EpigraphConstraint,
    FloatArray,
    as_points,
)

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 10**6


def _graph_distance(
    epigraph: EpigraphConstraint,
    point: FloatArray,
    samples: int,
    refinements: int,
) -> float:
    height = float(point[epigraph.axis])
    horizontal = np.delete(point, epigraph.axis)
    rho = float(np.linalg.norm(horizontal))
    gap = height - float(epigraph.profile(np.array([rho]))[0])
    if horizontal.size == 1:
        # Signed horizontal coordinate; the grid straddles the axis.
        x = float(horizontal[0])
        lo, hi = x - gap, x + gap
    else:
        x = rho
        lo, hi = max(0.0, rho - gap), rho + gap
    best = np.inf
    for _ in range(refinements + 1):
        y = np.linspace(lo, hi, samples)
        squared = (x - y) ** 2 + (height - epigraph.profile(np.abs(y))) ** 2
        k = int(np.argmin(squared))
        best = min(best, float(squared[k]))
        step = (hi - lo) / (samples - 1)
        lo, hi = y[k] - step, y[k] + step
        if horizontal.size > 1:
            lo = max(lo, 0.0)
    return float(np.sqrt(best))


def oracle_distance(
    domain: BoundedDomain,
    points: npt.ArrayLike,
    samples: int = DEFAULT_SAMPLES,
    refinements: int = 2,
) -> FloatArray:
    pts = as_points(points, domain.real_dimension)
    if not domain.contains(pts).all():
        raise PointOutsideDomain(f"Oracle points must lie inside {domain.name}")
    out = np.empty(pts.shape[0])
    for i, point in enumerate(pts):
        values = []
        for constraint in domain.constraints:
            if isinstance(constraint, EpigraphConstraint):
                values.append(_graph_distance(constraint, point, samples, refinements))
            else:
                values.append(float(constraint.distance(point[None, :])[0]))
        out[i] = min(values)
    logger.debug("Oracle distances for %d points at %d samples", pts.shape[0], samples)
    return out
