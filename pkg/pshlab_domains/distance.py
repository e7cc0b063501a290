"""
Distance to the boundary.

delta(z) is the smaller of two upper bounds, each a distance to genuine
boundary points:

- per patch, |z - (y', g(y'))| minimised over the horizontal box
  |y'_i| <= r_j, seeded by a coarse grid and polished by Nelder-Mead;
- exits along the signed coordinate rays.

The nearest boundary point lies in some B(x_j, r_j), so the patch minimum
is exact up to the local search. Domains without an atlas fall back to
their constraint distances.
"""

import logging
import math

import numpy as np
import numpy.typing as npt
from scipy import optimize

from pshlab_domains.exceptions import PointOutsideDomain
from pshlab_domains.geometry import (
    BoundedDomain,
    FloatArray,
    GraphPatch,
    as_points,
    first_crossing,
)

logger = logging.getLogger(__name__)

SEED_POINTS = 33
LOCAL_ITERATIONS = 200
# Seed grids above this many points thin out to fewer points per axis.
_SEED_LIMIT = 4096


def ray_exit_bound(domain: BoundedDomain, point: FloatArray) -> float:
    """Smallest exit distance along the 2 * (2n) signed coordinate rays."""
    dim = domain.real_dimension
    directions = np.vstack([np.eye(dim), -np.eye(dim)])
    origins = np.broadcast_to(point, directions.shape).copy()
    t = first_crossing(domain.level, origins, directions, domain.diameter, enter=False)
    return float(np.nanmin(t)) if np.isfinite(t).any() else float(domain.diameter)


def seed_grid(dim: int, radius: float) -> FloatArray:
    per_axis = SEED_POINTS
    while per_axis > 3 and per_axis**dim > _SEED_LIMIT:
        per_axis -= 1
    axis = np.linspace(-radius, radius, per_axis)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, dim)


def graph_points(patch: GraphPatch, local: FloatArray) -> FloatArray:
    """Boundary points (y', g(y')) of a patch, NaN where the graph is undefined."""
    heights = patch.graph_fn(local)
    return patch.from_local(np.column_stack([local, heights]))


def patch_distance(patch: GraphPatch, point: FloatArray, best: float = math.inf) -> float:
    """
    Distance from `point` to the graph of one patch over |y'_i| <= r; inf if
    the graph is undefined there.

    Every box point is within half a grid diagonal h of a seed, so the
    patch minimum is at least the best seed less sqrt(h^2 + (M modulus(h))^2).
    When that already reaches `best` the local search is skipped.
    """
    dim = patch.horizontal.shape[0]
    radius = patch.radius

    def gaps(local: FloatArray) -> FloatArray:
        lengths = np.linalg.norm(graph_points(patch, local) - point, axis=1)
        return np.where(np.isfinite(lengths), lengths, np.inf)

    seeds = seed_grid(dim, radius)
    values = gaps(seeds)
    k = int(np.argmin(values))
    if not math.isfinite(values[k]):
        return math.inf
    spacing = seeds[1, -1] - seeds[0, -1]
    h = 0.5 * spacing * math.sqrt(dim)
    slack = math.hypot(h, patch.regularity.norm * float(patch.regularity.modulus(h)))
    if values[k] - slack >= best:
        return float(values[k])
    result = optimize.minimize(
        lambda y: float(gaps(y[None, :])[0]),
        seeds[k],
        method="Nelder-Mead",
        bounds=[(-radius, radius)] * dim,
        options={"maxiter": LOCAL_ITERATIONS, "xatol": 1e-9 * radius, "fatol": 1e-15},
    )
    return min(float(values[k]), float(result.fun))


def atlas_distance(domain: BoundedDomain, point: FloatArray, upper: float) -> float:
    """
    min over patches of patch_distance, starting from a known upper bound.

    Patches are visited nearest center first; a patch with
    |z - x_j| >= best + r_j cannot hold the nearest boundary point.
    """
    best = upper
    gaps = np.linalg.norm(domain.centers - point, axis=1)
    visited = 0
    for j in np.argsort(gaps):
        patch = domain.atlas[j]
        if gaps[j] >= best + patch.radius:
            continue
        visited += 1
        best = min(best, patch_distance(patch, point, best))
    logger.debug("Distance at %s searched %d patch(es)", point.tolist(), visited)
    return best


def distance_to_boundary(domain: BoundedDomain, z: npt.ArrayLike) -> float:
    point = as_points(z, domain.real_dimension)
    if domain.level(point)[0] <= 0.0:
        raise PointOutsideDomain(f"{point[0].tolist()} is not inside {domain.name}", point[0])
    ray = ray_exit_bound(domain, point[0])
    if not domain.atlas:
        return min(float(domain.distance(point)[0]), ray)
    return atlas_distance(domain, point[0], ray)


def distances(domain: BoundedDomain, points: npt.ArrayLike) -> FloatArray:
    """
    Vectorised delta for interior points from the constraint distances;
    raises on the first outside point.
    """
    pts = as_points(points, domain.real_dimension)
    inside = domain.contains(pts)
    if not inside.all():
        bad = pts[int(np.argmin(inside))]
        raise PointOutsideDomain(f"{bad.tolist()} is not inside {domain.name}", bad)
    return domain.distance(pts)
