"""
Cutoff functions of the cover pieces.

    xi_k(z) = -S((delta(z, K_k) - eps_w/4) / (eps_w/4))

with the quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3 clamped to [0, 1].
xi_k vanishes within eps_w/4 of K_k and equals -1 from eps_w/2 on; K_k
keeps eps_w/2 away from dB_k, so xi_k is -1 outside B_k.

The distance to a point cloud is a minimum of Euclidean distances, so xi_k
is a maximum of radial profiles, and the complex Hessian of each profile
is bounded below by a multiple of S'' and S' scaled by (4/eps_w)^2.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from pshlab_domains.cover import Cover
from pshlab_domains.geometry import (
    BOUNDARY_TOLERANCE,
    FloatArray,
    as_points,
    sample_boundary,
    sample_interior,
)
from pshlab_mergelyan.exceptions import ApproximationError, DegenerateCover
from pshlab_psh.fields import ScalarField, everywhere

logger = logging.getLogger(__name__)

# max |S''| on [0, 1], reached at t = (3 - sqrt 3) / 6.
SMOOTHSTEP_SECOND_DERIVATIVE = 10.0 / math.sqrt(3.0)
# max S', at t = 1/2.
SMOOTHSTEP_DERIVATIVE = 15.0 / 8.0
CURVATURE_SAFETY = 2.0
_VALUE_TOLERANCE = 1e-12


def smoothstep(t: npt.ArrayLike) -> FloatArray:
    s = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return np.asarray(s * s * s * (10.0 + s * (6.0 * s - 15.0)))


def curvature_bound(eps_w: float) -> float:
    """c with xi_k + c |z|^2 plurisubharmonic."""
    return CURVATURE_SAFETY * SMOOTHSTEP_SECOND_DERIVATIVE * (4.0 / eps_w) ** 2


@dataclass(frozen=True, eq=False)
class CutoffFamily:
    cover: Cover
    eps_w: float
    curvature_bound: float

    def __len__(self) -> int:
        return len(self.cover)

    @property
    def sup_norm(self) -> float:
        """max |xi_k|, reached outside B_k."""
        return float(smoothstep(1.0))

    def values(self, k: int, points: npt.ArrayLike) -> FloatArray:
        pts = as_points(points, self.cover.domain.real_dimension)
        quarter = 0.25 * self.eps_w
        distance = self.cover.distance_to_K(k, pts)
        return -smoothstep((distance - quarter) / quarter)

    def field(self, k: int) -> ScalarField:
        return ScalarField(
            lambda p: self.values(k, p),
            everywhere,
            f"xi_{k}",
            self.cover.domain.dimension,
        )


def build_cutoffs(
    cover: Cover,
    eps_w: float | None = None,
    *,
    rng: np.random.Generator | None = None,
    samples: int = 2000,
) -> CutoffFamily:
    """
    One cutoff per cover piece.

    The plateau (0 on K_k), support (-1 outside B_k) and range are checked
    on sampled points; a failure means K_k reaches too close to dB_k and is
    raised as DegenerateCover.
    """
    eps_w = cover.eps_w if eps_w is None else float(eps_w)
    if not 0.0 < eps_w <= cover.eps_w:
        raise ApproximationError(f"eps_w must lie in (0, {cover.eps_w}], got {eps_w}")
    rng = rng if rng is not None else np.random.default_rng(0)
    family = CutoffFamily(cover, eps_w, curvature_bound(eps_w))

    domain = cover.domain
    sampled = np.vstack(
        [sample_interior(domain, samples, rng), sample_boundary(domain, samples // 4, rng)]
    )
    sampled = sampled[domain.level(sampled) >= -BOUNDARY_TOLERANCE]
    for k, piece in enumerate(cover.pieces):
        outside = sampled[cover.margin(k, sampled) <= 0.5 * eps_w]
        if outside.shape[0]:
            xi = family.values(k, outside)
            bad = np.abs(xi + 1.0) > _VALUE_TOLERANCE
            if bad.any():
                witness = outside[int(np.argmax(bad))]
                raise DegenerateCover(
                    f"xi_{k} is not -1 outside B_{k} at {witness.tolist()}", witness
                )
        if piece.k_cloud.shape[0]:
            on_k = piece.k_cloud[: min(piece.k_cloud.shape[0], samples)]
            xi = family.values(k, on_k)
            if np.any(xi != 0.0):
                witness = on_k[int(np.argmax(xi != 0.0))]
                raise DegenerateCover(f"xi_{k} is not 0 on K_{k} at {witness.tolist()}", witness)
    logger.info(
        "Built %d cutoffs for %s (eps_w=%.4g, c=%.6g)",
        len(family),
        domain.name,
        eps_w,
        family.curvature_bound,
    )
    return family
