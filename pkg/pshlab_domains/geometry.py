"""
Bounded domains in C^n stored as real points of R^{2n}, laid out as
(Re z1, Im z1, ..., Re zn, Im zn).

A domain is the intersection of a few constraints. Each constraint knows
its level (positive inside) and the exact distance from an inside point to
its own boundary, so the distance to the boundary of the intersection is
the minimum over constraints.
"""

import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import Any, Protocol

import numpy as np
import numpy.typing as npt
from scipy import stats
from scipy.stats import qmc

from pshlab_domains.exceptions import (
    ConvergenceFailure,
    GeometryError,
    InvalidAtlas,
)
from pshlab_domains.regularity import RegularitySpec
from pshlab_special.cusp import cusp_offset_array

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
BoolArray = npt.NDArray[np.bool_]
LevelFn = Callable[[FloatArray], FloatArray]
GraphFn = Callable[[FloatArray], FloatArray]

BOUNDARY_TOLERANCE = 1e-12
FRAME_TOLERANCE = 1e-12

# Meridian distance search: coarse seed grid, then golden-section refinement.
_SEED_POINTS = 33
_GOLDEN_ITERATIONS = 200
_GOLDEN_RTOL = 1e-10
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# Rays are scanned in chunks to bound the size of the (points, steps, dim) block.
_RAY_CHUNK = 4096


def as_points(points: npt.ArrayLike, dim: int) -> FloatArray:
    """Return an (m, dim) float array; a single point becomes one row."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise GeometryError(f"Expected points of real dimension {dim}, got shape {arr.shape}")
    return arr


def complex_to_real(z: npt.ArrayLike) -> FloatArray:
    """(..., n) complex -> (..., 2n) real, interleaving real and imaginary parts."""
    zc = np.asarray(z, dtype=complex)
    out = np.empty(zc.shape[:-1] + (2 * zc.shape[-1],), dtype=float)
    out[..., 0::2] = zc.real
    out[..., 1::2] = zc.imag
    return out


def real_to_complex(x: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    xr = np.asarray(x, dtype=float)
    return xr[..., 0::2] + 1j * xr[..., 1::2]


class Membership(StrEnum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


class Constraint(Protocol):
    def level(self, points: FloatArray) -> FloatArray: ...

    def distance(self, points: FloatArray) -> FloatArray: ...


@dataclass(frozen=True)
class BallConstraint:
    center: tuple[float, ...]
    radius: float

    def level(self, points: FloatArray) -> FloatArray:
        return self.radius - np.linalg.norm(points - np.asarray(self.center), axis=-1)

    def distance(self, points: FloatArray) -> FloatArray:
        return np.maximum(self.level(points), 0.0)


@dataclass(frozen=True)
class DiscFactorConstraint:
    """|z_k| < radius for one complex coordinate."""

    index: int
    radius: float = 1.0

    def level(self, points: FloatArray) -> FloatArray:
        k = 2 * self.index
        return self.radius - np.hypot(points[..., k], points[..., k + 1])

    def distance(self, points: FloatArray) -> FloatArray:
        return np.maximum(self.level(points), 0.0)


@dataclass(frozen=True)
class OrderConstraint:
    """
    |z_first| < |z_second|.

    The boundary {|z1| = |z2|} is a cone over the Clifford torus and the
    distance to it is (|z2| - |z1|) / sqrt(2).
    """

    first: int = 0
    second: int = 1

    def _moduli(self, points: FloatArray) -> tuple[FloatArray, FloatArray]:
        a, b = 2 * self.first, 2 * self.second
        return (
            np.hypot(points[..., a], points[..., a + 1]),
            np.hypot(points[..., b], points[..., b + 1]),
        )

    def level(self, points: FloatArray) -> FloatArray:
        small, large = self._moduli(points)
        return large - small

    def distance(self, points: FloatArray) -> FloatArray:
        return np.maximum(self.level(points), 0.0) / math.sqrt(2.0)


class RadialProfile(Protocol):
    def __call__(self, s: FloatArray) -> FloatArray: ...


@dataclass(frozen=True)
class PowerProfile:
    """C * s**gamma; gamma = 1 is the cone."""

    C: float
    gamma: float = 1.0

    def __call__(self, s: FloatArray) -> FloatArray:
        return self.C * np.power(np.abs(s), self.gamma)


@dataclass(frozen=True)
class CuspProfile:
    """s * W0(1/s), the Log-Lipschitz cusp with its tip at the origin."""

    def __call__(self, s: FloatArray) -> FloatArray:
        return cusp_offset_array(s)


@dataclass(frozen=True)
class EpigraphConstraint:
    """
    x_axis > g(|x'|) where x' collects the remaining real coordinates.

    The exact distance reduces to the meridian plane through the point:
    the nearest boundary point of a radial graph lies in the half-plane
    spanned by the axis and x'. For a point at meridian coordinates
    (rho, p) with vertical gap v = p - g(rho) > 0 the minimizer s lies in
    [max(0, rho - v), rho + v].
    """

    profile: RadialProfile
    axis: int

    def split(self, points: FloatArray) -> tuple[FloatArray, FloatArray]:
        height = points[..., self.axis]
        horizontal = np.delete(points, self.axis, axis=-1)
        return np.linalg.norm(horizontal, axis=-1), height

    def level(self, points: FloatArray) -> FloatArray:
        rho, height = self.split(points)
        return height - self.profile(rho)

    def distance(self, points: FloatArray) -> FloatArray:
        rho, height = self.split(points)
        gap = height - self.profile(rho)
        out = np.zeros_like(gap)
        inside = gap > 0.0
        if inside.any():
            out[inside] = self._meridian_distance(rho[inside], height[inside], gap[inside])
        return out

    def _squared(self, rho: FloatArray, height: FloatArray, s: FloatArray) -> FloatArray:
        return (rho - s) ** 2 + (height - self.profile(s)) ** 2

    def _meridian_distance(
        self, rho: FloatArray, height: FloatArray, gap: FloatArray
    ) -> FloatArray:
        lo = np.maximum(rho - gap, 0.0)
        hi = rho + gap
        grid = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, _SEED_POINTS)
        values = self._squared(rho[:, None], height[:, None], grid)
        k = np.argmin(values, axis=1)
        rows = np.arange(rho.size)
        best = values[rows, k]
        a = grid[rows, np.maximum(k - 1, 0)]
        b = grid[rows, np.minimum(k + 1, _SEED_POINTS - 1)]

        tol = _GOLDEN_RTOL * gap
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        fc = self._squared(rho, height, c)
        fd = self._squared(rho, height, d)
        for _ in range(_GOLDEN_ITERATIONS):
            if np.all(b - a <= tol):
                break
            left = fc < fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            c_new = b - _INV_PHI * (b - a)
            d_new = a + _INV_PHI * (b - a)
            c, d = np.where(left, c_new, d), np.where(left, c, d_new)
            fc, fd = np.where(left, self._squared(rho, height, c), fd), np.where(
                left, fc, self._squared(rho, height, d)
            )
        else:
            if np.any(b - a > tol):
                raise ConvergenceFailure(
                    f"Meridian distance search did not reach {_GOLDEN_RTOL:g} relative "
                    f"width in {_GOLDEN_ITERATIONS} iterations"
                )
        best = np.minimum(best, np.minimum(fc, fd))
        return np.sqrt(best)


@dataclass(frozen=True, eq=False)
class GraphPatch:
    """
    One chart of the boundary atlas.

    Frame rows are orthonormal; the last row is the inward graph direction
    w. Local coordinates are (y', h) with points = center + y' H + h w, and
    the boundary inside B(center, 4 radius) is {h = graph_fn(y')}.
    """

    center: FloatArray
    radius: float
    frame: FloatArray
    graph_fn: GraphFn
    regularity: RegularitySpec
    label: str = ""

    @property
    def direction(self) -> FloatArray:
        return self.frame[-1]

    @property
    def horizontal(self) -> FloatArray:
        return self.frame[:-1]

    def to_local(self, points: FloatArray) -> FloatArray:
        return (points - self.center) @ self.frame.T

    def from_local(self, local: FloatArray) -> FloatArray:
        return self.center + local @ self.frame

    def height_above_graph(self, points: FloatArray) -> FloatArray:
        local = self.to_local(points)
        return local[:, -1] - self.graph_fn(local[:, :-1])

    def check_frame(self) -> None:
        gram = self.frame @ self.frame.T
        defect = float(np.max(np.abs(gram - np.eye(self.frame.shape[0]))))
        if defect > FRAME_TOLERANCE:
            raise InvalidAtlas(
                f"Patch {self.label!r} frame is not orthonormal (defect {defect:.3g})"
            )


@dataclass(frozen=True, eq=False)
class BoundedDomain:
    name: str
    dimension: int
    constraints: tuple[Constraint, ...]
    diameter: float
    anchor: tuple[float, ...]
    # Axis-aligned box containing the closure, used for rejection sampling.
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    atlas: tuple[GraphPatch, ...] = ()
    probe_mode: bool = False
    params: Mapping[str, Any] = field(default_factory=dict)

    @property
    def real_dimension(self) -> int:
        return 2 * self.dimension

    @property
    def anchor_point(self) -> FloatArray:
        return np.asarray(self.anchor, dtype=float)

    @property
    def epigraph(self) -> EpigraphConstraint | None:
        for constraint in self.constraints:
            if isinstance(constraint, EpigraphConstraint):
                return constraint
        return None

    def level(self, points: npt.ArrayLike) -> FloatArray:
        pts = as_points(points, self.real_dimension)
        levels = np.stack([c.level(pts) for c in self.constraints])
        return np.asarray(np.min(levels, axis=0))

    def contains(self, points: npt.ArrayLike) -> BoolArray:
        return self.level(points) > 0.0

    def membership(self, point: npt.ArrayLike) -> Membership:
        value = float(self.level(point)[0])
        if abs(value) <= BOUNDARY_TOLERANCE:
            return Membership.BOUNDARY
        return Membership.INSIDE if value > 0.0 else Membership.OUTSIDE

    def distance(self, points: npt.ArrayLike) -> FloatArray:
        """delta for a batch of points; 0 for points outside the domain."""
        pts = as_points(points, self.real_dimension)
        inside = self.contains(pts)
        out = np.zeros(pts.shape[0])
        if inside.any():
            inner = pts[inside]
            out[inside] = np.min(np.stack([c.distance(inner) for c in self.constraints]), axis=0)
        return out

    @property
    def core_margin(self) -> float:
        """eps_w = min_j r_j."""
        if not self.atlas:
            raise InvalidAtlas(f"Domain {self.name!r} has no atlas")
        return min(patch.radius for patch in self.atlas)

    @property
    def eps1(self) -> float:
        return min(self.core_margin / 2.0, 0.1)

    @property
    def centers(self) -> FloatArray:
        return np.array([patch.center for patch in self.atlas])

    def with_atlas(self, atlas: tuple[GraphPatch, ...]) -> "BoundedDomain":
        return replace(self, atlas=atlas)


def sphere_directions(count: int, dim: int, rng: np.random.Generator) -> FloatArray:
    """Quasi-uniform unit vectors: scrambled Sobol points pushed through the normal ppf."""
    m = max(0, math.ceil(math.log2(max(count, 1))))
    sobol = qmc.Sobol(dim, scramble=True, rng=rng)
    u = np.clip(sobol.random_base2(m)[:count], 1e-12, 1.0 - 1e-12)
    g = stats.norm.ppf(u)
    return np.asarray(g / np.linalg.norm(g, axis=1, keepdims=True))


def first_crossing(
    level: LevelFn,
    origins: FloatArray,
    directions: FloatArray,
    t_max: float,
    *,
    enter: bool,
    steps: int = 64,
    iterations: int = 60,
) -> FloatArray:
    """
    First t in (0, t_max] where origin + t * direction changes side.

    With enter=False the origin must be inside and the exit is returned;
    with enter=True the origin must be outside or on the boundary and the
    entry is returned. Rays that never change side, or start on the wrong
    side, give NaN. The bracket found by the scan is bisected.
    """
    out = np.full(origins.shape[0], np.nan)
    ts = t_max * np.arange(1, steps + 1) / steps
    for start in range(0, origins.shape[0], _RAY_CHUNK):
        o = origins[start : start + _RAY_CHUNK]
        u = directions[start : start + _RAY_CHUNK]
        m, dim = o.shape
        cloud = (o[:, None, :] + ts[None, :, None] * u[:, None, :]).reshape(-1, dim)
        levels = level(cloud).reshape(m, steps)
        at_origin = level(o)
        hit = levels > 0.0 if enter else levels <= 0.0
        ok = hit.any(axis=1) & ((at_origin <= 0.0) if enter else (at_origin > 0.0))
        k = np.argmax(hit, axis=1)
        hi = ts[k]
        lo = np.where(k > 0, ts[np.maximum(k - 1, 0)], 0.0)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            value = level(o + mid[:, None] * u)
            flip = value > 0.0 if enter else value <= 0.0
            hi = np.where(flip, mid, hi)
            lo = np.where(flip, lo, mid)
        out[start : start + m] = np.where(ok, 0.5 * (lo + hi), np.nan)
    return out


def sample_boundary(domain: BoundedDomain, count: int, rng: np.random.Generator) -> FloatArray:
    """
    Boundary points where rays from the anchor first leave the domain.

    Every catalog domain with an atlas is star-shaped about its anchor;
    rays that miss (NaN) are dropped.
    """
    dim = domain.real_dimension
    directions = sphere_directions(count, dim, rng)
    origins = np.broadcast_to(domain.anchor_point, directions.shape).copy()
    if domain.level(origins[:1])[0] <= 0.0:
        raise GeometryError(f"Anchor of {domain.name!r} must be an interior point")
    t = first_crossing(domain.level, origins, directions, domain.diameter, enter=False)
    keep = np.isfinite(t)
    return np.asarray(origins[keep] + t[keep, None] * directions[keep])


def sample_interior(domain: BoundedDomain, count: int, rng: np.random.Generator) -> FloatArray:
    """Uniform points of the domain by rejection from its bounding box."""
    lower = np.asarray(domain.lower)
    upper = np.asarray(domain.upper)
    accepted: list[FloatArray] = []
    total = 0
    while total < count:
        batch = rng.uniform(lower, upper, size=(max(4 * count, 1024), lower.size))
        inside = batch[domain.contains(batch)]
        accepted.append(inside)
        total += inside.shape[0]
    return np.concatenate(accepted)[:count]


def sample_near_boundary(
    domain: BoundedDomain,
    count: int,
    rng: np.random.Generator,
    depths: FloatArray | None = None,
) -> FloatArray:
    """
    Interior points on rays from the anchor, just inside the exit point.

    `depths` are ray-parameter offsets measured back from the exit; by
    default they are log-uniform in [1e-6, 1e-2] times the diameter.
    """
    boundary = sample_boundary(domain, count, rng)
    toward = domain.anchor_point - boundary
    toward /= np.linalg.norm(toward, axis=1, keepdims=True)
    if depths is None:
        depths = domain.diameter * 10.0 ** rng.uniform(-6.0, -2.0, size=boundary.shape[0])
    points = boundary + np.asarray(depths)[:, None] * toward
    return np.asarray(points[domain.contains(points)])
