"""
Open cover of the closure built from an atlas.

Piece 0 is the interior core W_0 = {delta > eps_w}; piece k >= 1 is the
ball W_k = B(x_k, 4 r_k) of patch k - 1. Every piece has a margin
function m_k, positive exactly on W_k:

    ball:      m_k(z) = 4 r_k - |z - x_k|
    interior:  m_0(z) = delta(z) - eps_w   (negative outside the domain)

and B_k = {m_k > eps_w / 2}, B_k^- = {m_k > eps_w}. For balls
|m_k - eps_w / 2| is the distance to the sphere bounding B_k; for the
interior piece it is a lower bound, which is all the cutoffs need.

K_k is kept twice: as its defining predicate and as a point cloud of the
sampled closure, whose KD-tree answers distance-to-K_k queries.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
from django.conf import settings
from scipy.spatial import cKDTree

from pshlab_domains.exceptions import CoverDegenerate
from pshlab_domains.geometry import (
    BOUNDARY_TOLERANCE,
    BoolArray,
    BoundedDomain,
    FloatArray,
    as_points,
    sample_boundary,
    sample_interior,
    sphere_directions,
)

logger = logging.getLogger(__name__)

INTERIOR = 0
# d_j is a sampled set distance; it is shrunk before use.
SHRINK = 0.9
EXIT_DIRECTIONS = 32
SPHERE_POINTS = 24
# Grid spacing of the closure cloud in units of eps_w (C^1 only).
CLOUD_SPACING = 1.0 / 32.0
CLOUD_SAMPLES = 2**16
_GRID_LIMIT = 2_000_000
_INTERIOR_RAY_STEPS = 8


@dataclass(frozen=True, eq=False)
class CoverPiece:
    index: int
    # None for the interior piece.
    center: FloatArray | None
    outer_radius: float
    direction: FloatArray
    d: float
    k_cloud: FloatArray
    _tree: cKDTree | None = field(default=None, repr=False)

    @property
    def is_interior(self) -> bool:
        return self.center is None


@dataclass(frozen=True, eq=False)
class Cover:
    domain: BoundedDomain
    eps_w: float
    pieces: tuple[CoverPiece, ...]
    # min over samples of delta(K_k, dB_k), per piece.
    k_clearance: tuple[float, ...]
    samples: int

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def d_list(self) -> tuple[float, ...]:
        return tuple(piece.d for piece in self.pieces)

    def margin(self, k: int, points: npt.ArrayLike) -> FloatArray:
        pts = as_points(points, self.domain.real_dimension)
        piece = self.pieces[k]
        if piece.center is None:
            inside = self.domain.contains(pts)
            return np.where(inside, self.domain.distance(pts) - self.eps_w, -self.eps_w)
        return np.asarray(piece.outer_radius - np.linalg.norm(pts - piece.center, axis=1))

    def in_W(self, k: int, points: npt.ArrayLike) -> BoolArray:
        return self.margin(k, points) > 0.0

    def in_B(self, k: int, points: npt.ArrayLike) -> BoolArray:
        return self.margin(k, points) > 0.5 * self.eps_w

    def in_B_closure(self, k: int, points: npt.ArrayLike) -> BoolArray:
        return self.margin(k, points) >= 0.5 * self.eps_w

    def in_Bminus(self, k: int, points: npt.ArrayLike) -> BoolArray:
        return self.margin(k, points) > self.eps_w

    def distance_to_B_boundary(self, k: int, points: npt.ArrayLike) -> FloatArray:
        return np.abs(self.margin(k, points) - 0.5 * self.eps_w)

    def in_K(self, k: int, points: npt.ArrayLike) -> BoolArray:
        """z in the closure, in the closure of B_k^-, and within d_j of some dB_j."""
        pts = as_points(points, self.domain.real_dimension)
        member = (self.domain.level(pts) >= -BOUNDARY_TOLERANCE) & (
            self.margin(k, pts) >= self.eps_w
        )
        near = np.zeros(pts.shape[0], dtype=bool)
        for j, piece in enumerate(self.pieces):
            near |= self.distance_to_B_boundary(j, pts) <= piece.d
        return member & near

    def distance_to_K(self, k: int, points: npt.ArrayLike) -> FloatArray:
        pts = as_points(points, self.domain.real_dimension)
        tree = self.pieces[k]._tree
        if tree is None:
            return np.full(pts.shape[0], np.inf)
        dist, _ = tree.query(pts)
        return np.asarray(dist)

    def covering_pieces(self, points: npt.ArrayLike) -> BoolArray:
        """(points, pieces) mask of B_k^- membership."""
        pts = as_points(points, self.domain.real_dimension)
        return np.stack([self.in_Bminus(k, pts) for k in range(len(self))], axis=1)

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "build_cover",
            "inputs": {"domain": self.domain.name, "samples": self.samples},
            "verdict": min(self.d_list) >= 0.5 * self.eps_w
            and min(self.k_clearance) >= 0.5 * self.eps_w * (1.0 - 1e-9),
            "fitted_constants": {"eps_w": self.eps_w},
            "measured": {
                "pieces": len(self),
                "min_d": min(self.d_list),
                "min_k_clearance": min(self.k_clearance),
            },
            "violations": [],
        }


def _closure_cloud(domain: BoundedDomain, eps_w: float, rng: np.random.Generator) -> FloatArray:
    """Sampled closure: a fine grid in C^1, uniform samples above, plus boundary samples."""
    lower = np.asarray(domain.lower)
    upper = np.asarray(domain.upper)
    spacing = CLOUD_SPACING * eps_w
    counts = np.ceil((upper - lower) / spacing).astype(int) + 1
    if domain.real_dimension == 2 and int(np.prod(counts)) <= _GRID_LIMIT:
        axes = [np.linspace(lo, hi, c) for lo, hi, c in zip(lower, upper, counts)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)
        interior = grid[domain.contains(grid)]
    else:
        interior = sample_interior(domain, CLOUD_SAMPLES, rng)
    boundary = sample_boundary(domain, 4096, rng)
    return np.vstack([interior, boundary])


def _check_coverage(cover: Cover, rng: np.random.Generator, samples: int) -> None:
    domain = cover.domain
    interior = sample_interior(domain, samples, rng)
    boundary = sample_boundary(domain, max(samples // 4, 1), rng)
    points = np.vstack([interior, boundary])
    covered = cover.covering_pieces(points).any(axis=1)
    if not covered.all():
        witness = points[int(np.argmin(covered))]
        raise CoverDegenerate(
            f"{int((~covered).sum())} sampled point(s) of {domain.name} lie in no B_k^-,"
            f" e.g. {witness.tolist()}",
            witness,
        )


def _ball_intervals(
    origin: FloatArray, directions: FloatArray, centers: FloatArray, radii: FloatArray
) -> tuple[FloatArray, FloatArray]:
    """Ray parameters (lo, hi) where origin + t u is inside each ball; empty as (inf, -inf)."""
    offset = origin - centers
    b = directions @ offset.T
    c = np.sum(offset * offset, axis=1) - radii * radii
    disc = b * b - c[None, :]
    root = np.sqrt(np.maximum(disc, 0.0))
    lo = np.where(disc > 0.0, -b - root, np.inf)
    hi = np.where(disc > 0.0, -b + root, -np.inf)
    return lo, hi


def _union_exit(lo: FloatArray, hi: FloatArray, cap: float) -> float:
    """Smallest, over rays, of the first t >= 0 where the union of intervals stops covering."""
    reach = np.zeros(lo.shape[0])
    if lo.shape[1] == 0:
        return 0.0
    while True:
        active = (lo < reach[:, None]) & (hi > reach[:, None])
        grown = np.maximum(reach, np.max(np.where(active, hi, -np.inf), axis=1))
        if np.all(grown <= reach) or np.all(grown >= cap):
            reach = grown
            break
        reach = np.minimum(grown, cap)
    return float(min(np.min(reach), cap))


def _exit_distance(
    cover: Cover,
    j: int,
    points: FloatArray,
    directions: FloatArray,
    centers: FloatArray,
    center_tree: cKDTree,
    cap: float,
) -> float:
    """min over `points` of the distance from each point to the complement of U_{k != j} B_k^-."""
    domain = cover.domain
    eps_w = cover.eps_w
    radii = np.array([piece.outer_radius - eps_w for piece in cover.pieces[1:]])
    ball_reach = float(radii.max()) + cap
    step = cap / _INTERIOR_RAY_STEPS
    ts = step * np.arange(_INTERIOR_RAY_STEPS + 1)
    best = cap
    for z in points:
        near = [i for i in center_tree.query_ball_point(z, ball_reach) if i + 1 != j]
        lo, hi = _ball_intervals(z, directions, centers[near], radii[near])
        if j != INTERIOR:
            # delta is 1-Lipschitz, so delta(z + t u) > 2 eps_w around each sample.
            probes = z[None, None, :] + ts[None, :, None] * directions[:, None, :]
            depth = domain.distance(probes.reshape(-1, z.size)).reshape(directions.shape[0], -1)
            slack = depth - 2.0 * eps_w
            lo = np.hstack([lo, np.where(slack > 0.0, ts - slack, np.inf)])
            hi = np.hstack([hi, np.where(slack > 0.0, ts + slack, -np.inf)])
        best = min(best, _union_exit(lo, hi, cap))
    return best


def _boundary_samples_of(
    cover: Cover,
    j: int,
    cloud: FloatArray,
    cloud_depth: FloatArray,
    directions: FloatArray,
    rng: np.random.Generator,
) -> FloatArray:
    """Sampled points of dB_j inside the closure."""
    eps_w = cover.eps_w
    piece = cover.pieces[j]
    if piece.center is None:
        band = np.abs(cloud_depth - 1.5 * eps_w) <= CLOUD_SPACING * eps_w
        points = cloud[band]
        if points.shape[0] > SPHERE_POINTS:
            points = points[rng.choice(points.shape[0], SPHERE_POINTS, replace=False)]
        return points
    points = piece.center + (piece.outer_radius - 0.5 * eps_w) * directions[:SPHERE_POINTS]
    return points[cover.domain.level(points) >= -BOUNDARY_TOLERANCE]


def build_cover(
    domain: BoundedDomain,
    rng: np.random.Generator | None = None,
    samples: int | None = None,
) -> Cover:
    """
    Cover of the closure by W_0 and the balls B(x_j, 4 r_j).

    Raises CoverDegenerate with a witness when sampled closure points lie
    outside every B_k^-, or when some d_j falls below eps_w / 2.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    samples = settings.PSHLAB_COVER_SAMPLES if samples is None else samples
    eps_w = domain.core_margin
    dim = domain.real_dimension
    zero = np.zeros(dim)

    draft = [CoverPiece(INTERIOR, None, math.inf, zero, math.inf, np.empty((0, dim)))]
    for index, patch in enumerate(domain.atlas, start=1):
        draft.append(
            CoverPiece(
                index,
                patch.center,
                4.0 * patch.radius,
                patch.direction,
                math.inf,
                np.empty((0, dim)),
            )
        )
    cover = Cover(domain, eps_w, tuple(draft), (), samples)
    _check_coverage(cover, rng, samples)

    cloud = _closure_cloud(domain, eps_w, rng)
    cloud_depth = domain.distance(cloud)
    centers = domain.centers
    center_tree = cKDTree(centers)
    directions = sphere_directions(EXIT_DIRECTIONS, dim, rng)
    directions = np.vstack([directions, -directions])
    cap = 2.0 * eps_w

    d_values: list[float] = []
    for j in range(len(draft)):
        sphere = _boundary_samples_of(cover, j, cloud, cloud_depth, directions, rng)
        if sphere.shape[0] == 0:
            d_values.append(SHRINK * cap)
            continue
        exit_distance = _exit_distance(cover, j, sphere, directions, centers, center_tree, cap)
        d_values.append(SHRINK * exit_distance)
    short = [j for j, d in enumerate(d_values) if d < 0.5 * eps_w]
    if short:
        j = short[0]
        raise CoverDegenerate(
            f"Cover of {domain.name}: d_j below eps_w/2 = {0.5 * eps_w:.4g} for"
            f" {len(short)} piece(s), first {j} (d={d_values[j]:.4g})",
            (j, d_values[j]),
        )

    cover = Cover(
        domain,
        eps_w,
        tuple(
            CoverPiece(p.index, p.center, p.outer_radius, p.direction, d, p.k_cloud)
            for p, d in zip(draft, d_values)
        ),
        (),
        samples,
    )
    near_any = np.zeros(cloud.shape[0], dtype=bool)
    for j, d in enumerate(d_values):
        near_any |= cover.distance_to_B_boundary(j, cloud) <= d

    pieces: list[CoverPiece] = []
    clearance: list[float] = []
    for k, piece in enumerate(cover.pieces):
        if piece.center is None:
            in_minus = cloud_depth >= 2.0 * eps_w
        else:
            in_minus = np.linalg.norm(cloud - piece.center, axis=1) <= piece.outer_radius - eps_w
        k_cloud = cloud[near_any & in_minus]
        tree = cKDTree(k_cloud) if k_cloud.shape[0] else None
        pieces.append(
            CoverPiece(
                piece.index,
                piece.center,
                piece.outer_radius,
                piece.direction,
                piece.d,
                k_cloud,
                tree,
            )
        )
        clearance.append(
            float(np.min(cover.distance_to_B_boundary(k, k_cloud)))
            if k_cloud.shape[0]
            else math.inf
        )
    result = Cover(domain, eps_w, tuple(pieces), tuple(clearance), samples)
    logger.info(
        "Built cover of %s: %d pieces, min d_j=%.4g, min K clearance=%.4g",
        domain.name,
        len(result),
        min(d_values),
        min(clearance),
    )
    return result
