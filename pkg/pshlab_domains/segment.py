"""
Segment-property checks.

With an atlas: every sampled boundary point is matched to a patch ball
B(x_j, r_j) and nearby points z of the closure are pushed along w_j by
t * eps_w; each push must land strictly inside.

In probe mode (Hartogs triangle) there is no atlas at the origin. The
probe tries candidate directions w at 0: either t w leaves the domain, or
t w is inside, and then so is the reflected point -t w, whose push by t w
lands back on 0, which is not in the domain. Either way w fails.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from pshlab_domains.atlas import covering_patch
from pshlab_domains.exceptions import GeometryError, NoCoveringPatch
from pshlab_domains.geometry import (
    BOUNDARY_TOLERANCE,
    BoundedDomain,
    FloatArray,
    sample_boundary,
    sphere_directions,
)

logger = logging.getLogger(__name__)

DEFAULT_T_GRID = (0.05, 0.1, 0.25, 0.5, 0.9)
PROBE_DIRECTIONS = 64


@dataclass(frozen=True)
class SegmentWitness:
    start: tuple[float, ...]
    direction: tuple[float, ...]
    t: float
    end: tuple[float, ...]
    patch_index: int | None = None
    # Probe mode: the reflected start -t w and the point it is pushed to.
    reflected: tuple[float, ...] | None = None

    def as_record(self) -> dict[str, Any]:
        return {
            "start": self.start,
            "direction": self.direction,
            "t": self.t,
            "end": self.end,
            "patch_index": self.patch_index,
            "reflected": self.reflected,
        }


@dataclass(frozen=True)
class SegmentReport:
    domain: str
    passes: bool
    tested: int
    witnesses: tuple[SegmentWitness, ...] = field(default_factory=tuple)
    probe_mode: bool = False
    failed_directions: int = 0

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "segment_check",
            "inputs": {"domain": self.domain, "tested": self.tested, "probe_mode": self.probe_mode},
            "verdict": self.passes,
            "fitted_constants": {},
            "measured": {"failed_directions": self.failed_directions},
            "violations": [w.as_record() for w in self.witnesses],
        }


def _tuple(x: FloatArray) -> tuple[float, ...]:
    return tuple(float(v) for v in x)


def check_segment_property(
    domain: BoundedDomain,
    boundary_samples: int,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    rng: np.random.Generator | None = None,
    neighbors: int = 8,
) -> SegmentReport:
    if boundary_samples < 1:
        raise GeometryError("boundary_samples must be >= 1")
    if any(not 0.0 < t < 1.0 for t in t_grid):
        raise GeometryError(f"t_grid values must lie in (0, 1), got {list(t_grid)}")
    rng = rng if rng is not None else np.random.default_rng(0)
    if domain.probe_mode:
        return probe_segment_property(domain, t_grid, rng)

    boundary = sample_boundary(domain, boundary_samples, rng)
    patch_idx = covering_patch(domain, boundary)
    if (patch_idx < 0).any():
        witness = boundary[int(np.argmin(patch_idx))]
        raise NoCoveringPatch(
            f"Boundary point {witness.tolist()} of {domain.name} lies in no atlas ball", witness
        )
    eps_w = domain.core_margin
    dim = domain.real_dimension
    witnesses: list[SegmentWitness] = []
    tested = 0
    for b, j in zip(boundary, patch_idx):
        patch = domain.atlas[int(j)]
        offsets = rng.standard_normal((neighbors, dim))
        offsets *= (
            rng.uniform(0.0, 0.25 * patch.radius, (neighbors, 1))
            / np.linalg.norm(offsets, axis=1, keepdims=True)
        )
        starts = np.vstack([b[None, :], b + offsets])
        in_ball = np.linalg.norm(starts - patch.center, axis=1) < patch.radius
        closure = domain.level(starts) >= -BOUNDARY_TOLERANCE
        starts = starts[in_ball & closure]
        t = np.asarray(t_grid)
        ends = starts[:, None, :] + (t[None, :, None] * eps_w) * patch.direction
        inside = domain.contains(ends.reshape(-1, dim)).reshape(starts.shape[0], t.size)
        tested += inside.size
        for a, k in zip(*np.nonzero(~inside)):
            witnesses.append(
                SegmentWitness(
                    _tuple(starts[a]),
                    _tuple(patch.direction),
                    float(t[k] * eps_w),
                    _tuple(ends[a, k]),
                    patch_index=int(j),
                )
            )
    report = SegmentReport(domain.name, not witnesses, tested, tuple(witnesses))
    logger.info(
        "Segment check on %s: %d pushes, %d failures", domain.name, tested, len(witnesses)
    )
    return report


def probe_segment_property(
    domain: BoundedDomain,
    t_grid: Sequence[float],
    rng: np.random.Generator,
    directions: int = PROBE_DIRECTIONS,
    base: FloatArray | None = None,
) -> SegmentReport:
    """Try `directions` candidate directions at the boundary point `base` (default 0)."""
    dim = domain.real_dimension
    origin = np.zeros(dim) if base is None else np.asarray(base, dtype=float)
    ws = sphere_directions(directions, dim, rng)
    ts = np.asarray(t_grid) * 0.5
    witnesses: list[SegmentWitness] = []
    tested = 0
    for w in ws:
        witness: SegmentWitness | None = None
        for t in ts:
            tested += 1
            pushed = origin + t * w
            if not domain.contains(pushed)[0]:
                witness = SegmentWitness(_tuple(origin), _tuple(w), float(t), _tuple(pushed))
                break
            reflected = origin - t * w
            if domain.contains(reflected)[0] and not domain.contains(origin)[0]:
                witness = SegmentWitness(
                    _tuple(reflected),
                    _tuple(w),
                    float(t),
                    _tuple(origin),
                    reflected=_tuple(reflected),
                )
                break
        if witness is not None:
            witnesses.append(witness)
    failed = len(witnesses)
    logger.info("Probe on %s: %d of %d directions fail", domain.name, failed, directions)
    return SegmentReport(
        domain.name,
        failed == 0,
        tested,
        tuple(witnesses),
        probe_mode=True,
        failed_directions=failed,
    )
