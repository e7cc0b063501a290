"""
Boundary atlases.

Centers come from a greedy spacing-net of boundary ray samples.
Each center gets a frame whose last row is the inward graph direction:

- near the tip of an epigraph domain, and wherever the epigraph is the
  active constraint well inside its ridge, the direction is the graph axis
  and the graph function is the closed-form profile;
- everywhere else the direction points at the domain anchor and the graph
  is found implicitly, by locating where the line through a local
  horizontal point first enters the domain.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from pshlab_domains.exceptions import InvalidAtlas
from pshlab_domains.geometry import (
    BoundedDomain,
    EpigraphConstraint,
    FloatArray,
    GraphFn,
    GraphPatch,
    LevelFn,
    first_crossing,
    sample_boundary,
    sample_interior,
)
from pshlab_domains.regularity import (
    RegularityClass,
    RegularitySpec,
    fit_modulus_constant,
    lipschitz_spec,
)

logger = logging.getLogger(__name__)

# Net spacing of the centers, as a fraction of r; below 1/3 so the balls
# B(x_j, r_j / 3) cover the boundary.
COVER_FRACTION = 0.3
GRAPH_REACH = 4.0

_ACTIVE_TOLERANCE = 1e-9
_IMPLICIT_STEPS = 16
_REGULARITY_PAIRS = 64
# Fitted Lipschitz norms of implicit patches are inflated by this factor.
_NORM_SAFETY = 1.5


@dataclass(frozen=True)
class AtlasPlan:
    radius: float
    samples: int
    epigraph_regularity: RegularitySpec | None = None
    # Horizontal radius inside which the boundary is the epigraph graph.
    epigraph_reach: float = 0.0
    seeds: tuple[tuple[float, ...], ...] = field(default_factory=tuple)


def orthonormal_frame(direction: FloatArray) -> FloatArray:
    w = direction / np.linalg.norm(direction)
    horizontal = linalg.null_space(w[None, :]).T
    return np.vstack([horizontal, w])


def net_centers(
    samples: FloatArray, spacing: float, seeds: FloatArray | None = None
) -> FloatArray:
    """
    Greedy spacing-net of the samples: every sample ends up within
    `spacing` of a chosen center. Seeds are taken first, then samples in
    their given order.
    """
    candidates = samples if seeds is None or len(seeds) == 0 else np.vstack([seeds, samples])
    tree = cKDTree(candidates)
    covered = np.zeros(candidates.shape[0], dtype=bool)
    chosen: list[int] = []
    for index in range(candidates.shape[0]):
        if covered[index]:
            continue
        chosen.append(index)
        covered[tree.query_ball_point(candidates[index], spacing)] = True
    return np.asarray(candidates[chosen])


def _uniform_ball(count: int, dim: int, radius: float, rng: np.random.Generator) -> FloatArray:
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.asarray(g * radius * rng.uniform(0.0, 1.0, (count, 1)) ** (1.0 / dim))


def epigraph_patch(
    epigraph: EpigraphConstraint,
    center: FloatArray,
    radius: float,
    regularity: RegularitySpec,
    label: str,
) -> GraphPatch:
    axis = epigraph.axis
    center = center.copy()
    rho, _ = epigraph.split(center[None, :])
    center[axis] = float(epigraph.profile(rho)[0])
    e = np.zeros(center.size)
    e[axis] = 1.0
    frame = orthonormal_frame(e)
    horizontal = frame[:-1]

    def graph_fn(local: FloatArray) -> FloatArray:
        points = center + local @ horizontal
        s, _ = epigraph.split(points)
        return epigraph.profile(s) - center[axis]

    return GraphPatch(center, radius, frame, graph_fn, regularity, label)


def _implicit_graph(
    level: LevelFn, center: FloatArray, frame: FloatArray, reach: float
) -> GraphFn:
    horizontal = frame[:-1]
    w = frame[-1]

    def graph_fn(local: FloatArray) -> FloatArray:
        origins = center + local @ horizontal - reach * w
        directions = np.broadcast_to(w, origins.shape)
        t = first_crossing(
            level, origins, directions, 2.0 * reach, enter=True, steps=_IMPLICIT_STEPS
        )
        return t - reach

    return graph_fn


def _implicit_norms(
    level: LevelFn,
    centers: FloatArray,
    frames: FloatArray,
    reach: float,
    rng: np.random.Generator,
) -> FloatArray:
    """
    Fitted Lipschitz constants of the implicit graphs, all patches at once.

    Each patch gets _REGULARITY_PAIRS random pairs in B'(0, reach); the
    graph values come from one batched ray scan.
    """
    count, dim = centers.shape[0], frames.shape[1] - 1
    first = _uniform_ball(count * _REGULARITY_PAIRS, dim, reach, rng)
    second = _uniform_ball(count * _REGULARITY_PAIRS, dim, reach, rng)
    local = np.concatenate(
        [
            first.reshape(count, _REGULARITY_PAIRS, dim),
            second.reshape(count, _REGULARITY_PAIRS, dim),
        ],
        axis=1,
    )
    w = frames[:, -1, :]
    origins = (
        centers[:, None, :]
        + np.einsum("cpk,ckd->cpd", local, frames[:, :-1, :])
        - reach * w[:, None, :]
    )
    directions = np.broadcast_to(w[:, None, :], origins.shape)
    real_dim = centers.shape[1]
    t = first_crossing(
        level,
        origins.reshape(-1, real_dim),
        np.ascontiguousarray(directions).reshape(-1, real_dim),
        2.0 * reach,
        enter=True,
        steps=_IMPLICIT_STEPS,
    ).reshape(count, 2 * _REGULARITY_PAIRS)
    diff = np.abs(t[:, :_REGULARITY_PAIRS] - t[:, _REGULARITY_PAIRS:])
    gap = np.linalg.norm(local[:, :_REGULARITY_PAIRS] - local[:, _REGULARITY_PAIRS:], axis=2)
    ratio = np.where(np.isfinite(diff) & (gap > 0.0), diff / np.where(gap > 0.0, gap, 1.0), 0.0)
    return np.asarray(np.max(ratio, axis=1))


def build_atlas(
    domain: BoundedDomain, plan: AtlasPlan, rng: np.random.Generator
) -> BoundedDomain:
    samples = sample_boundary(domain, plan.samples, rng)
    seeds = np.asarray(plan.seeds, dtype=float).reshape(-1, domain.real_dimension)
    centers = net_centers(samples, COVER_FRACTION * plan.radius, seeds)
    atlas = atlas_from_centers(domain, centers, plan, rng)
    logger.info(
        "Built %d-patch atlas for %s from %d boundary samples",
        len(atlas),
        domain.name,
        samples.shape[0],
    )
    return domain.with_atlas(atlas)


def atlas_from_centers(
    domain: BoundedDomain,
    centers: FloatArray,
    plan: AtlasPlan,
    rng: np.random.Generator,
) -> tuple[GraphPatch, ...]:
    """One patch per boundary point in `centers`, all of radius plan.radius."""
    epigraph = domain.epigraph
    reach = GRAPH_REACH * plan.radius

    patches: list[GraphPatch | None] = [None] * len(centers)
    implicit: list[int] = []
    for index, center in enumerate(centers):
        if epigraph is not None and plan.epigraph_regularity is not None:
            rho, _ = epigraph.split(center[None, :])
            active = abs(float(epigraph.level(center[None, :])[0])) <= _ACTIVE_TOLERANCE
            if active and float(rho[0]) + reach < plan.epigraph_reach:
                patches[index] = epigraph_patch(
                    epigraph,
                    center,
                    plan.radius,
                    plan.epigraph_regularity,
                    f"{domain.name}[{index}]",
                )
                continue
        implicit.append(index)

    if implicit:
        frames = np.stack([orthonormal_frame(domain.anchor_point - centers[i]) for i in implicit])
        norms = _implicit_norms(domain.level, centers[implicit], frames, reach, rng)
        for slot, index in enumerate(implicit):
            patches[index] = GraphPatch(
                centers[index],
                plan.radius,
                frames[slot],
                _implicit_graph(domain.level, centers[index], frames[slot], reach),
                lipschitz_spec(max(1.0, _NORM_SAFETY * float(norms[slot]))),
                f"{domain.name}[{index}]",
            )

    atlas = tuple(patch for patch in patches if patch is not None)
    for patch in atlas:
        patch.check_frame()
    logger.debug("%s: %d of %d patches are implicit", domain.name, len(implicit), len(atlas))
    return atlas


def covering_patch(domain: BoundedDomain, points: FloatArray) -> np.ndarray:
    """Index of the nearest atlas center whose ball B(x_j, r_j) holds each point, or -1."""
    tree = cKDTree(domain.centers)
    k = min(8, len(domain.atlas))
    dist, idx = tree.query(points, k=k)
    dist = np.asarray(dist).reshape(points.shape[0], k)
    idx = np.asarray(idx).reshape(points.shape[0], k)
    radii = np.array([patch.radius for patch in domain.atlas])
    inside = dist < radii[idx]
    first = np.argmax(inside, axis=1)
    found = inside[np.arange(points.shape[0]), first]
    return np.where(found, idx[np.arange(points.shape[0]), first], -1)


@dataclass(frozen=True)
class AtlasReport:
    domain: str
    patches: int
    frame_defect: float
    origin_defect: float
    modulus_excess: float
    separation_failures: int
    uncovered: int
    diameter: float
    sampled_diameter: float

    @property
    def passes(self) -> bool:
        return (
            self.frame_defect <= 1e-12
            and self.origin_defect <= 1e-9
            and self.modulus_excess <= 0.0
            and self.separation_failures == 0
            and self.uncovered == 0
            and self.sampled_diameter <= self.diameter * (1.0 + 1e-12)
            and self.sampled_diameter >= 0.99 * self.diameter
        )

    def as_record(self) -> dict[str, object]:
        return {
            "op": "domain_verify",
            "inputs": {"domain": self.domain, "patches": self.patches},
            "verdict": self.passes,
            "fitted_constants": {"sampled_diameter": self.sampled_diameter},
            "measured": {
                "frame_defect": self.frame_defect,
                "origin_defect": self.origin_defect,
                "modulus_excess": self.modulus_excess,
                "separation_failures": self.separation_failures,
                "uncovered": self.uncovered,
                "diameter": self.diameter,
            },
            "violations": [],
        }


def verify_atlas(
    domain: BoundedDomain,
    rng: np.random.Generator,
    cover_samples: int,
    pair_samples: int = 32,
    diameter_samples: int = 2048,
) -> AtlasReport:
    """
    Sampled checks of the atlas invariants.

    Per patch: frame orthonormality, graph_fn(0) = 0, the modulus bound on
    pairs in B'(0, 4 r_j), and that points just above (below) the graph
    are inside (outside). Globally: every fresh boundary sample lies in
    some B(x_j, r_j) and the closed-form diameter matches sampled pairs.
    """
    if not domain.atlas:
        raise InvalidAtlas(f"Domain {domain.name!r} has no atlas to verify")
    frame_defect = origin_defect = 0.0
    modulus_excess = -math.inf
    separation_failures = 0
    for patch in domain.atlas:
        gram = patch.frame @ patch.frame.T
        frame_defect = max(frame_defect, float(np.max(np.abs(gram - np.eye(gram.shape[0])))))
        dim = gram.shape[0] - 1
        origin_defect = max(origin_defect, abs(float(patch.graph_fn(np.zeros((1, dim)))[0])))

        reach = GRAPH_REACH * patch.radius
        pairs = (
            _uniform_ball(pair_samples, dim, reach, rng),
            _uniform_ball(pair_samples, dim, reach, rng),
        )
        spec = patch.regularity
        fitted = fit_modulus_constant(patch.graph_fn, spec.class_tag, pairs, spec.gamma)
        modulus_excess = max(modulus_excess, fitted - spec.norm * (1.0 + 1e-9))

        local = _uniform_ball(pair_samples, dim, 2.0 * patch.radius, rng)
        heights = patch.graph_fn(local)
        keep = np.isfinite(heights)
        offset = rng.uniform(0.05, 1.0, keep.sum()) * patch.radius
        above = np.column_stack([local[keep], heights[keep] + offset])
        below = np.column_stack([local[keep], heights[keep] - offset])
        separation_failures += int(np.sum(~domain.contains(patch.from_local(above))))
        separation_failures += int(np.sum(domain.contains(patch.from_local(below))))

    fresh = sample_boundary(domain, cover_samples, rng)
    uncovered = int(np.sum(covering_patch(domain, fresh) < 0))
    if uncovered:
        logger.warning(
            "%d of %d boundary samples of %s are uncovered",
            uncovered,
            fresh.shape[0],
            domain.name,
        )

    cloud = np.vstack(
        [sample_boundary(domain, diameter_samples, rng), sample_interior(domain, 256, rng)]
    )
    sampled_diameter = float(np.max(pdist(cloud)))
    return AtlasReport(
        domain=domain.name,
        patches=len(domain.atlas),
        frame_defect=frame_defect,
        origin_defect=origin_defect,
        modulus_excess=modulus_excess,
        separation_failures=separation_failures,
        uncovered=uncovered,
        diameter=domain.diameter,
        sampled_diameter=sampled_diameter,
    )
