"""
Continuous plurisubharmonic approximation from inside a neighbourhood.

For a cover W_0, ..., W_m of the closure with pieces B_j and cutoffs xi_j,
phi is replaced by

    f_j(z) = phi(z + nu w_j) + 3 omega(nu) (xi_j(z) + c q(z))   on U_j n cl(B_j)
    v(z)   = max_j f_j(z)

with U_j = (Omega n W_j) - nu w_j, w_0 = 0 and q(z) = |z - anchor|^2, which
differs from |z|^2 by a pluriharmonic term. f_j is -inf off its piece, and
v is defined on U, the union of the piece domains. Across dB_j the piece
f_j is dominated by a neighbour by at least omega(nu), which is what keeps v
plurisubharmonic there.
"""

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
from django.conf import settings

from pshlab_domains.cover import Cover, build_cover
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
from pshlab_mergelyan.cutoffs import CutoffFamily, build_cutoffs
from pshlab_mergelyan.exceptions import (
    ApproximationError,
    DegenerateCover,
    MarginViolated,
    NuTooLarge,
    TranslateEscapes,
)
from pshlab_psh.circle import PshReport, check_psh
from pshlab_psh.fields import ScalarField
from pshlab_psh.modulus import modulus_of_continuity
from pshlab_psh.mollify import mollify
from pshlab_special.gain import GainFunction

logger = logging.getLogger(__name__)

CORRECTION = 3.0
# Required domination slack, as a fraction of omega(nu).
SLACK_FRACTION = 1.0 - 1e-6
SPHERE_DIRECTIONS = 64
MARGIN_DIRECTIONS = 16
# Sampled balls are open: their radius is shrunk by this factor.
_OPEN = 1.0 - 1e-6
_LADDER = 24
_PAIR_SAMPLES = 20000
_PSH_POINTS = 100

Modulus = Callable[[float], float]


@dataclass(frozen=True)
class DominationWitness:
    piece: int
    point: tuple[float, ...]
    value: float
    best_other: float

    def as_record(self) -> dict[str, Any]:
        return {
            "piece": self.piece,
            "point": self.point,
            "value": self.value,
            "best_other": self.best_other,
        }


@dataclass(frozen=True)
class DominationReport:
    checked: int
    min_slack: float
    required: float
    witnesses: tuple[DominationWitness, ...] = field(default_factory=tuple)

    @property
    def passes(self) -> bool:
        return not self.witnesses


@dataclass(frozen=True, eq=False)
class ApproximantArtifact:
    domain: BoundedDomain
    phi: ScalarField
    cover: Cover
    cutoffs: CutoffFamily
    nu: float
    omega_nu: float
    c: float
    U_margin: float
    domination: DominationReport | None = None
    psh: PshReport | None = None

    def q(self, points: FloatArray) -> FloatArray:
        offset = points - self.domain.anchor_point
        return np.asarray(np.sum(offset * offset, axis=1))

    def piece_masks(self, points: npt.ArrayLike) -> BoolArray:
        """(points, pieces) membership in U_j n cl(B_j)."""
        pts = as_points(points, self.domain.real_dimension)
        masks = np.zeros((pts.shape[0], len(self.cover)), dtype=bool)
        for j, piece in enumerate(self.cover.pieces):
            mask = self.cover.in_B_closure(j, pts)
            if not mask.any():
                continue
            shifted = pts[mask] + self.nu * piece.direction
            ok = (
                self.domain.contains(shifted)
                & self.cover.in_W(j, shifted)
                & self.phi.inside(shifted)
            )
            mask[mask] = ok
            masks[:, j] = mask
        return masks

    def piece_values(self, points: npt.ArrayLike) -> FloatArray:
        """(points, pieces) matrix of f_j, -inf off each piece."""
        pts = as_points(points, self.domain.real_dimension)
        masks = self.piece_masks(pts)
        values = np.full(masks.shape, -np.inf)
        weight = CORRECTION * self.omega_nu
        for j, piece in enumerate(self.cover.pieces):
            mask = masks[:, j]
            if not mask.any():
                continue
            inside = pts[mask]
            translated = self.phi.evaluate(inside + self.nu * piece.direction)
            if weight == 0.0:
                values[mask, j] = translated
                continue
            xi = self.cutoffs.values(j, inside)
            values[mask, j] = translated + weight * (xi + self.c * self.q(inside))
        return values

    def in_U(self, points: npt.ArrayLike) -> BoolArray:
        return np.asarray(self.piece_masks(points).any(axis=1))

    @property
    def v(self) -> ScalarField:
        return ScalarField(
            lambda p: np.max(self.piece_values(p), axis=1),
            self.in_U,
            f"v[{self.phi.label}, nu={self.nu:.3g}]",
            self.domain.dimension,
        )

    def piece_field(self, j: int) -> ScalarField:
        """f_j as a field on its own piece domain."""
        return ScalarField(
            lambda p: self.piece_values(p)[:, j],
            lambda p: self.piece_masks(p)[:, j],
            f"f_{j}",
            self.domain.dimension,
        )

    def q_sup(self) -> float:
        """Bound on q over the closure: the farthest bounding-box corner, capped by diam^2."""
        anchor = self.domain.anchor_point
        reach = np.maximum(
            np.abs(np.asarray(self.domain.lower) - anchor),
            np.abs(np.asarray(self.domain.upper) - anchor),
        )
        return min(float(np.sum(reach * reach)), self.domain.diameter**2)

    def error_constant(self) -> float:
        """
        C in |v - phi| <= omega(nu) (1 + C diam).

        Above, xi_j <= 0 gives v - phi <= omega(nu) (1 + 3 c sup q). Below,
        any piece holding z gives v - phi >= -omega(nu) (1 + 3 |xi_j|).
        """
        spread = max(self.cutoffs.sup_norm, self.c * self.q_sup())
        return CORRECTION * spread / self.domain.diameter

    def as_record(self) -> dict[str, Any]:
        domination = self.domination
        psh = self.psh
        verdict = (domination is None or domination.passes) and (psh is None or psh.verdict)
        return {
            "op": "build_approximant",
            "inputs": {
                "domain": self.domain.name,
                "field": self.phi.label,
                "nu": self.nu,
                "pieces": len(self.cover),
            },
            "verdict": verdict,
            "fitted_constants": {
                "omega_nu": self.omega_nu,
                "c": self.c,
                "C": self.error_constant(),
                "U_margin": self.U_margin,
            },
            "measured": {
                "domination_checked": domination.checked if domination else 0,
                "min_slack": domination.min_slack if domination else math.inf,
                "psh_worst_defect": psh.worst_defect if psh else math.inf,
            },
            "violations": [w.as_record() for w in domination.witnesses] if domination else [],
        }


def closure_points(domain: BoundedDomain, count: int, rng: np.random.Generator) -> FloatArray:
    """About `count` points of the closure: a regular grid in C^1, uniform samples above."""
    if domain.real_dimension == 2:
        lower = np.asarray(domain.lower)
        upper = np.asarray(domain.upper)
        trial = rng.uniform(lower, upper, (4096, 2))
        fraction = max(float(np.mean(domain.contains(trial))), 1e-3)
        side = math.ceil(math.sqrt(count / fraction))
        axes = [np.linspace(lo, hi, side) for lo, hi in zip(lower, upper)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)
        interior = grid[domain.contains(grid)]
    else:
        interior = sample_interior(domain, count, rng)
    boundary = sample_boundary(domain, max(count // 10, 1), rng)
    return np.vstack([interior, boundary])


def _balls_inside(
    in_region: Callable[[FloatArray], BoolArray],
    centers: FloatArray,
    radius: float,
    directions: FloatArray,
) -> BoolArray:
    """Per center, whether the sampled sphere and half-sphere of `radius` lie in the region."""
    offsets = np.vstack([radius * directions, 0.5 * radius * directions])
    cloud = (centers[:, None, :] + offsets[None, :, :]).reshape(-1, centers.shape[1])
    return np.asarray(in_region(cloud).reshape(centers.shape[0], -1).all(axis=1))


def _sampled_margin(
    artifact: ApproximantArtifact, boundary: FloatArray, start: float, directions: FloatArray
) -> float:
    radius = start
    for _ in range(_LADDER):
        if _balls_inside(artifact.in_U, boundary, _OPEN * radius, directions).all():
            return radius
        radius *= 0.5
    return 0.0


def _domination_points(
    cover: Cover, j: int, directions: FloatArray, rng: np.random.Generator
) -> FloatArray:
    """Sampled points of dB_j in the closure, taken just inside cl(B_j)."""
    domain = cover.domain
    eps_w = cover.eps_w
    piece = cover.pieces[j]
    if piece.center is None:
        pool = sample_interior(domain, 4000, rng)
        margin = cover.margin(j, pool)
        points = pool[(margin >= 0.5 * eps_w) & (margin <= (0.5 + 1.0 / 32.0) * eps_w)]
    else:
        radius = piece.outer_radius - 0.5 * eps_w
        points = piece.center + radius * (1.0 - 1e-12) * directions
    return points[domain.level(points) >= -BOUNDARY_TOLERANCE]


def check_domination(
    artifact: ApproximantArtifact, rng: np.random.Generator | None = None
) -> DominationReport:
    """
    At sampled z in dB_j n cl(Omega) where f_j is finite, some other piece
    must beat f_j by at least omega(nu).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    cover = artifact.cover
    directions = sphere_directions(SPHERE_DIRECTIONS, artifact.domain.real_dimension, rng)
    required = SLACK_FRACTION * artifact.omega_nu
    checked = 0
    min_slack = math.inf
    witnesses: list[DominationWitness] = []
    for j in range(len(cover)):
        points = _domination_points(cover, j, directions, rng)
        if points.shape[0] == 0:
            continue
        values = artifact.piece_values(points)
        own = values[:, j]
        active = np.isfinite(own)
        if not active.any():
            continue
        others = np.delete(values[active], j, axis=1)
        best = others.max(axis=1) if others.shape[1] else np.full(int(active.sum()), -np.inf)
        slack = best - own[active]
        checked += slack.size
        min_slack = min(min_slack, float(slack.min()))
        for i in np.nonzero(~(slack >= required))[0][:4]:
            witnesses.append(
                DominationWitness(
                    j,
                    tuple(float(x) for x in points[active][i]),
                    float(own[active][i]),
                    float(best[i]),
                )
            )
    if witnesses:
        logger.warning(
            "Domination fails at %d sampled point(s) of %s", len(witnesses), artifact.domain.name
        )
    return DominationReport(checked, min_slack, required, tuple(witnesses))


def build_approximant(
    domain: BoundedDomain,
    phi: ScalarField,
    nu: float,
    *,
    cover: Cover | None = None,
    modulus: Modulus | None = None,
    rng: np.random.Generator | None = None,
    pair_samples: int = _PAIR_SAMPLES,
    psh_points: int = _PSH_POINTS,
) -> ApproximantArtifact:
    """
    v = max_j f_j for phi on `domain` with translation size nu.

    omega(nu) comes from `modulus` when given, else from the empirical
    modulus of continuity of phi. The closure must lie in U: a sampled
    closure point in no piece domain raises TranslateEscapes.
    """
    started = time.monotonic()
    rng = rng if rng is not None else np.random.default_rng(settings.PSHLAB_DEFAULT_SEED)
    eps_w = domain.core_margin
    if nu <= 0.0:
        raise ApproximationError(f"nu must be positive, got {nu}")
    if nu >= 0.5 * eps_w:
        raise NuTooLarge(f"nu={nu} must be below eps_w/2={0.5 * eps_w}")
    if cover is None:
        try:
            cover = build_cover(domain, rng)
        except CoverDegenerate as exc:
            raise DegenerateCover(str(exc), exc.witness) from exc
    cutoffs = build_cutoffs(cover, rng=rng)
    if modulus is None:
        modulus = modulus_of_continuity(phi, domain, pair_samples, rng)
    omega_nu = float(modulus(nu))

    artifact = ApproximantArtifact(
        domain, phi, cover, cutoffs, float(nu), omega_nu, cutoffs.curvature_bound, 0.0
    )
    closure = closure_points(domain, settings.PSHLAB_COVER_SAMPLES // 10, rng)
    covered = artifact.in_U(closure)
    if not covered.all():
        witness = closure[int(np.argmin(covered))]
        raise TranslateEscapes(
            f"no translate z + nu w_j of {witness.tolist()} stays in the domain",
            witness,
        )

    directions = sphere_directions(MARGIN_DIRECTIONS, domain.real_dimension, rng)
    boundary = sample_boundary(domain, 256, rng)
    margin = _sampled_margin(artifact, boundary, nu, directions)
    if margin <= 0.0:
        raise MarginViolated(f"U keeps no sampled margin around the boundary of {domain.name}")
    artifact = ApproximantArtifact(
        domain, phi, cover, cutoffs, artifact.nu, omega_nu, artifact.c, margin
    )
    domination = check_domination(artifact, rng)

    depth = domain.distance(closure)
    picks = rng.choice(closure.shape[0], min(psh_points, closure.shape[0]), replace=False)
    reach = np.minimum(np.maximum(depth[picks], margin), 0.125 * eps_w)
    radii = reach[:, None] * np.array([0.05, 0.25])[None, :]
    psh = check_psh(artifact.v, closure[picks], radii=radii, rng=rng)

    artifact = ApproximantArtifact(
        domain, phi, cover, cutoffs, artifact.nu, omega_nu, artifact.c, margin, domination, psh
    )
    logger.info(
        "Built approximant of %s on %s: nu=%.3g, omega=%.4g, margin=%.3g, %.2fs",
        phi.label,
        domain.name,
        nu,
        omega_nu,
        margin,
        time.monotonic() - started,
    )
    return artifact


def weakest_gain(domain: BoundedDomain, eps: float) -> GainFunction:
    """The patch gain with the smallest value at eps."""
    gains = [patch.regularity.gain() for patch in domain.atlas]
    if not gains:
        raise ApproximationError(f"Domain {domain.name!r} has no atlas")
    return min(gains, key=lambda g: g(eps))


def certify_neighborhood(
    artifact: ApproximantArtifact,
    f: GainFunction,
    *,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """
    Largest m = f(nu) 2^k (k >= 0) with B(z, m) in U for every sampled
    boundary point z. Raises MarginViolated when f(nu) itself fails.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    samples = settings.PSHLAB_COVER_SAMPLES if samples is None else samples
    domain = artifact.domain
    target = f(artifact.nu)
    boundary = sample_boundary(domain, samples, rng)
    directions = sphere_directions(MARGIN_DIRECTIONS, domain.real_dimension, rng)
    inside = _balls_inside(artifact.in_U, boundary, _OPEN * target, directions)
    if not inside.all():
        witness = boundary[int(np.argmin(inside))]
        raise MarginViolated(
            f"B(z, f(nu)={target:.4g}) leaves U at z={witness.tolist()}", witness
        )
    margin = target
    while margin < artifact.nu and _balls_inside(
        artifact.in_U, boundary, _OPEN * 2.0 * margin, directions
    ).all():
        margin *= 2.0
    logger.info(
        "Certified margin %.4g >= f(nu)=%.4g on %d boundary points of %s",
        margin,
        target,
        boundary.shape[0],
        domain.name,
    )
    return margin


def smooth_approximant(
    artifact: ApproximantArtifact,
    gain: GainFunction | None = None,
    margin: float | None = None,
    nodes_log2: int | None = None,
) -> ScalarField:
    """v mollified at radius f(nu)/4 when a gain is given, else at m/4."""
    if gain is not None:
        radius = 0.25 * gain(artifact.nu)
    else:
        m = artifact.U_margin if margin is None else margin
        if m <= 0.0:
            raise ApproximationError("smoothing needs a positive certified margin")
        radius = 0.25 * m
    return mollify(artifact.v, radius, nodes_log2)


@dataclass(frozen=True)
class ApproximationReport:
    domain: str
    field: str
    nu: float
    omega_nu: float
    sup_error: float
    bound: float
    C_fit: float
    margin: float
    psh_verdict: bool
    domination_passes: bool
    rows: tuple[tuple[float, ...], ...] = field(default_factory=tuple, repr=False)

    @property
    def passes(self) -> bool:
        return (
            self.sup_error <= self.bound * (1.0 + 1e-9) + 1e-12
            and self.psh_verdict
            and self.domination_passes
        )

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "check_approximant",
            "inputs": {"domain": self.domain, "field": self.field, "nu": self.nu},
            "verdict": self.passes,
            "fitted_constants": {"C_fit": self.C_fit, "omega_nu": self.omega_nu},
            "measured": {
                "sup_error": self.sup_error,
                "bound": self.bound,
                "margin": self.margin,
                "psh_verdict": self.psh_verdict,
            },
            "violations": [],
        }


def check_approximant(
    artifact: ApproximantArtifact,
    gain: GainFunction | None = None,
    *,
    grid: int = 10**4,
    rng: np.random.Generator | None = None,
) -> ApproximationReport:
    """
    sup |v - phi| over about `grid` closure points against the bound
    omega(nu) (1 + C diam); the per-point errors are kept as CSV rows.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    domain = artifact.domain
    points = closure_points(domain, grid, rng)
    points = points[artifact.phi.inside(points)]
    error = np.abs(artifact.v(points) - artifact.phi(points))
    sup_error = float(error.max()) if error.size else 0.0
    omega = artifact.omega_nu
    diam = domain.diameter
    bound = omega * (1.0 + artifact.error_constant() * diam)
    C_fit = max((sup_error / omega - 1.0) / diam, 0.0) if omega > 0.0 else 0.0
    margin = artifact.U_margin
    if gain is not None:
        margin = certify_neighborhood(artifact, gain, rng=rng)
    rows = tuple(tuple(float(x) for x in p) + (float(e),) for p, e in zip(points, error))
    report = ApproximationReport(
        domain.name,
        artifact.phi.label,
        artifact.nu,
        omega,
        sup_error,
        bound,
        C_fit,
        margin,
        artifact.psh.verdict if artifact.psh else True,
        artifact.domination.passes if artifact.domination else True,
        rows,
    )
    logger.info(
        "Approximant check on %s: sup error %.4g, bound %.4g, C_fit %.4g",
        domain.name,
        sup_error,
        bound,
        C_fit,
    )
    return report
