"""
Bounded plurisubharmonic exhaustion.

For eps in (0, eps0] and patches (x_j, r_j, w_j) the family is

    v_{eps,j}(z) = log 1/delta(z + eps w_j)                 on cl B(x_j, r_j/2)
    v_eps(z)     = max( max_j v_{eps,j} + psi_j + lam q - gamma lam,  q - lam )
    w_eps(z)     = v_eps(z) / log(1/eps) - 1
    w(z)         = sup_eps w_eps(z)

with q(z) = |z - anchor|^2, lam = lambda_constant * A(eps) and psi_j a
smoothstep bump equal to A(eps) = log(eps / f(eps)) on B(x_j, r_j/3) and 0
outside B(x_j, r_j/2). f is the weakest patch gain taken pointwise, so every
bump has the same plateau and a plateau candidate dominates across the
spheres dB(x_j, r_j/2) near the boundary. The sup runs over the geometric
grid eps0 rho^k >= floor plus eps = delta(z) when delta(z) <= eps0; w is 0 on
the boundary.
"""

import logging
import math
import time
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Any, NamedTuple

import numpy as np
import numpy.typing as npt
from django.conf import settings
from scipy.spatial import cKDTree

from pshlab_domains.exceptions import GeometryError
from pshlab_domains.geometry import (
    BOUNDARY_TOLERANCE,
    BoolArray,
    BoundedDomain,
    FloatArray,
    as_points,
    sample_interior,
    sample_near_boundary,
    sphere_directions,
)
from pshlab_exhaustion.exceptions import (
    ExhaustionError,
    GammaTooSmall,
    OmegaRatioViolation,
    TranslateEscapes,
)
from pshlab_mergelyan.cutoffs import SMOOTHSTEP_SECOND_DERIVATIVE, smoothstep
from pshlab_psh.circle import MIN_NODES, PshReport, check_psh
from pshlab_psh.fields import ScalarField
from pshlab_special.gain import GainForm, GainFunction, gain_array

logger = logging.getLogger(__name__)

IntArray = npt.NDArray[np.intp]

BUMP_INNER = 1.0 / 3.0
BUMP_OUTER = 0.5
DEFAULT_RHO = 0.9
DEFAULT_FLOOR = 1e-10
FALLBACK = -1
# Calibrated gamma is searched among powers of two up to 2**_GAMMA_LADDER.
_GAMMA_LADDER = 40
_DOMINATION_SAMPLES = 100
_CALIBRATION_EPS = 5
_TIE = 1e-12
# Domination spheres are sampled just inside cl B(x_j, r_j/2).
_SPHERE_SHRINK = 1.0 - 1e-9
_PSH_POINTS = 40
_PSH_RADII = (0.01, 0.05)


def bump_curvature(radius: float) -> float:
    """Bound on the complex Hessian of psi_j / A for a patch of radius r: S'' (6/r)^2."""
    return SMOOTHSTEP_SECOND_DERIVATIVE * (1.0 / ((BUMP_OUTER - BUMP_INNER) * radius)) ** 2


@dataclass(frozen=True)
class ExhaustionConfig:
    eps0: float
    lambda_constant: float
    gamma: float | None = None
    rho: float = DEFAULT_RHO
    floor: float = DEFAULT_FLOOR
    fitted_constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.floor < self.eps0 < 1.0:
            raise ExhaustionError(
                f"need 0 < floor < eps0 < 1, got floor={self.floor}, eps0={self.eps0}"
            )
        if not 0.0 < self.rho < 1.0:
            raise ExhaustionError(f"rho must lie in (0, 1), got {self.rho}")
        if self.lambda_constant <= 0.0:
            raise ExhaustionError(f"lambda_constant must be positive, got {self.lambda_constant}")
        if self.gamma is not None and self.gamma <= 1.0:
            raise ExhaustionError(f"gamma must exceed 1, got {self.gamma}")

    @property
    def eps_grid(self) -> FloatArray:
        """eps0 rho^k for every k with eps0 rho^k >= floor, decreasing."""
        k_max = math.floor(math.log(self.floor / self.eps0) / math.log(self.rho))
        grid = self.eps0 * self.rho ** np.arange(k_max + 1)
        return np.asarray(grid[grid >= self.floor])

    def as_record(self) -> dict[str, Any]:
        return {
            "eps0": self.eps0,
            "lambda_constant": self.lambda_constant,
            "gamma": self.gamma,
            "rho": self.rho,
            "floor": self.floor,
        }


def make_config(
    domain: BoundedDomain,
    *,
    c: float | None = None,
    rho: float = DEFAULT_RHO,
    floor: float = DEFAULT_FLOOR,
    gamma: float | None = None,
    lambda_constant: float | None = None,
) -> ExhaustionConfig:
    """
    Defaults for `domain`: eps0 = min(eps_w / c, eps1) and a lambda constant
    covering the bump curvature of the smallest patch.
    """
    c = settings.PSHLAB_SEGMENT_C if c is None else c
    if c <= 0.0:
        raise ExhaustionError(f"segment constant must be positive, got {c}")
    eps_w = domain.core_margin
    eps0 = min(eps_w / c, domain.eps1)
    constant = bump_curvature(eps_w) if lambda_constant is None else lambda_constant
    return ExhaustionConfig(eps0, constant, gamma, rho, floor)


@dataclass(frozen=True)
class WeakestGain:
    """Pointwise minimum of the patch gains."""

    gains: tuple[GainFunction, ...]

    def __call__(self, eps: npt.ArrayLike) -> FloatArray:
        values = np.asarray(eps, dtype=float)
        return np.asarray(np.min(np.stack([gain_array(g, values) for g in self.gains]), axis=0))

    def plateau(self, eps: npt.ArrayLike) -> FloatArray:
        """A(eps) = log(eps / f(eps))."""
        values = np.asarray(eps, dtype=float)
        return np.asarray(np.log(values / self(values)))

    def omega_ratio(self, eps: npt.ArrayLike) -> FloatArray:
        values = np.asarray(eps, dtype=float)
        return np.asarray(self.plateau(values) / np.log(1.0 / values))

    @property
    def C_tilde(self) -> float:
        """Smallest C_tilde among the Log-Lipschitz gains, 1 without any."""
        loglip = [
            g.C_tilde
            for g in self.gains
            if g.form in (GainForm.LOGLIP, GainForm.LOGLIP_SIMPLIFIED)
        ]
        return min(loglip, default=1.0)

    @property
    def is_loglip(self) -> bool:
        return any(g.form in (GainForm.LOGLIP, GainForm.LOGLIP_SIMPLIFIED) for g in self.gains)


def domain_gain(domain: BoundedDomain) -> WeakestGain:
    if not domain.atlas:
        raise ExhaustionError(f"Domain {domain.name!r} has no atlas")
    try:
        gains = tuple(dict.fromkeys(patch.regularity.gain() for patch in domain.atlas))
    except GeometryError as exc:
        raise ExhaustionError(f"{domain.name}: a patch has no translation gain ({exc})") from exc
    return WeakestGain(gains)


def check_omega_ratio(gain: WeakestGain, grid: FloatArray) -> FloatArray:
    """
    omega(eps) on the grid. It must be positive and decay towards 0: below
    omega(eps0) at the floor, with d A / d log(1/eps) there at most half of
    omega. Hoelder gains keep a positive limit and fail the second test.
    """
    omega = gain.omega_ratio(grid)
    if not np.all(omega > 0.0):
        bad = int(np.argmin(omega > 0.0))
        raise OmegaRatioViolation(
            f"omega({grid[bad]:.3g}) = {omega[bad]:.4g} is not positive",
            (float(grid[bad]), float(omega[bad])),
        )
    plateau = gain.plateau(grid)
    logs = np.log(1.0 / grid)
    slope = (plateau[-1] - plateau[-2]) / (logs[-1] - logs[-2]) if grid.size > 1 else 0.0
    if omega[-1] >= omega[0] or slope > 0.5 * omega[-1]:
        raise OmegaRatioViolation(
            f"omega does not decay: omega({grid[0]:.3g}) = {omega[0]:.4g},"
            f" omega({grid[-1]:.3g}) = {omega[-1]:.4g}, tail slope {slope:.4g}",
            (float(grid[-1]), float(omega[-1]), float(slope)),
        )
    return omega


class Pairs(NamedTuple):
    """Active (point, patch) pairs with |z - x_j| <= r_j / 2 and the bump profile."""

    rows: IntArray
    patches: IntArray
    profile: FloatArray


class PairValues(NamedTuple):
    pairs: Pairs
    values: FloatArray
    fallback: FloatArray
    lam: FloatArray


@dataclass(frozen=True, eq=False)
class ExhaustionFamily:
    domain: BoundedDomain
    config: ExhaustionConfig
    gain: WeakestGain
    gamma: float
    centers: FloatArray
    directions: FloatArray
    radii: FloatArray
    tree: cKDTree

    def plateau(self, eps: npt.ArrayLike) -> FloatArray:
        return self.gain.plateau(eps)

    def lam(self, eps: npt.ArrayLike) -> FloatArray:
        return self.config.lambda_constant * self.plateau(eps)

    def q(self, points: FloatArray) -> FloatArray:
        offset = points - self.domain.anchor_point
        return np.asarray(np.sum(offset * offset, axis=1))

    def pairs(self, points: FloatArray) -> Pairs:
        reach = BUMP_OUTER * float(self.radii.max())
        hits = self.tree.query_ball_point(points, reach)
        counts = np.fromiter((len(h) for h in hits), dtype=np.intp, count=len(hits))
        rows = np.repeat(np.arange(points.shape[0], dtype=np.intp), counts)
        patches = np.fromiter(
            (j for h in hits for j in h), dtype=np.intp, count=int(counts.sum())
        )
        distance = np.linalg.norm(points[rows] - self.centers[patches], axis=1)
        radius = self.radii[patches]
        keep = distance <= BUMP_OUTER * radius
        rows, patches = rows[keep], patches[keep]
        t = (distance[keep] - BUMP_INNER * radius[keep]) / (
            (BUMP_OUTER - BUMP_INNER) * radius[keep]
        )
        return Pairs(rows, patches, 1.0 - smoothstep(t))

    def pair_values(
        self, points: FloatArray, eps: npt.ArrayLike, pairs: Pairs | None = None
    ) -> PairValues:
        """Candidate values per active pair and the fallback q - lam per point."""
        m = points.shape[0]
        e = np.broadcast_to(np.asarray(eps, dtype=float), (m,))
        plateau = self.plateau(e)
        lam = self.config.lambda_constant * plateau
        q = self.q(points)
        pairs = self.pairs(points) if pairs is None else pairs
        rows, patches = pairs.rows, pairs.patches
        values = np.empty(rows.size)
        if rows.size:
            shifted = points[rows] + e[rows, None] * self.directions[patches]
            inside = self.domain.contains(shifted)
            if not inside.all():
                witness = points[rows][int(np.argmin(inside))]
                raise TranslateEscapes(
                    f"z + eps w_j leaves {self.domain.name} at z={witness.tolist()}", witness
                )
            values = (
                -np.log(self.domain.distance(shifted))
                + plateau[rows] * pairs.profile
                + lam[rows] * (q[rows] - self.gamma)
            )
        return PairValues(pairs, values, q - lam, lam)

    def candidates(
        self, points: npt.ArrayLike, eps: npt.ArrayLike, pairs: Pairs | None = None
    ) -> tuple[FloatArray, IntArray]:
        """v_eps and the winning branch: a patch index, or FALLBACK for q - lam."""
        pts = as_points(points, self.domain.real_dimension)
        pv = self.pair_values(pts, eps, pairs)
        best = pv.fallback.copy()
        branch = np.full(pts.shape[0], FALLBACK, dtype=np.intp)
        rows = pv.pairs.rows
        if rows.size:
            # Sorted by point, then by value: the last pair of each point is its best.
            order = np.lexsort((pv.values, rows))
            sorted_rows = rows[order]
            last = np.r_[sorted_rows[1:] != sorted_rows[:-1], True]
            top = order[last]
            wins = pv.values[top] > best[rows[top]]
            best[rows[top][wins]] = pv.values[top][wins]
            branch[rows[top][wins]] = pv.pairs.patches[top][wins]
        return best, branch

    def v(self, points: npt.ArrayLike, eps: npt.ArrayLike) -> FloatArray:
        return self.candidates(points, eps)[0]

    def w_eps(self, points: npt.ArrayLike, eps: npt.ArrayLike) -> FloatArray:
        e = np.asarray(eps, dtype=float)
        return np.asarray(self.v(points, e) / np.log(1.0 / e) - 1.0)

    def sup(self, points: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
        """
        w and the maximising eps per point. Points off the open domain get
        w = 0 and eps = NaN.
        """
        pts = as_points(points, self.domain.real_dimension)
        w = np.zeros(pts.shape[0])
        star = np.full(pts.shape[0], np.nan)
        inside = self.domain.contains(pts)
        if not inside.any():
            return w, star
        inner = pts[inside]
        pairs = self.pairs(inner)
        best = np.full(inner.shape[0], -np.inf)
        best_eps = np.full(inner.shape[0], np.nan)

        def offer(values: FloatArray, eps: FloatArray) -> None:
            better = values > best
            best[better] = values[better]
            best_eps[better] = eps[better]

        for eps in self.config.eps_grid:
            values, _ = self.candidates(inner, eps, pairs)
            offer(values / math.log(1.0 / eps) - 1.0, np.full(inner.shape[0], eps))

        delta = self.domain.distance(inner)
        near = (delta > 0.0) & (delta <= self.config.eps0)
        if near.any():
            e = np.where(near, delta, self.config.eps0)
            values, _ = self.candidates(inner, e, pairs)
            offer(np.where(near, values / np.log(1.0 / e) - 1.0, -np.inf), e)

        w[inside] = best
        star[inside] = best_eps
        return w, star

    def eps_values(self, point: FloatArray) -> FloatArray:
        """The grid plus delta(z) when it is at most eps0, decreasing."""
        grid = self.config.eps_grid
        delta = float(self.domain.distance(point[None, :])[0])
        if 0.0 < delta <= self.config.eps0:
            grid = np.append(grid, delta)
        return np.asarray(np.sort(np.unique(grid))[::-1])

    def trace(self, point: npt.ArrayLike) -> tuple[tuple[float, float, int], ...]:
        """Rows (eps, w_eps(z), branch) over every eps the sup looks at."""
        pts = as_points(point, self.domain.real_dimension)[:1]
        if not self.domain.contains(pts)[0]:
            raise ExhaustionError(f"trace needs an interior point, got {pts[0].tolist()}")
        eps = self.eps_values(pts[0])
        batch = np.repeat(pts, eps.size, axis=0)
        values, branch = self.candidates(batch, eps)
        w = values / np.log(1.0 / eps) - 1.0
        return tuple((float(e), float(x), int(b)) for e, x, b in zip(eps, w, branch))

    def with_gamma(self, gamma: float) -> "ExhaustionFamily":
        return replace(self, gamma=float(gamma), config=replace(self.config, gamma=float(gamma)))

    def without_gamma(self) -> "ExhaustionFamily":
        """Candidates without the -gamma lam shift. The config keeps its validated gamma."""
        return replace(self, gamma=0.0)


def build_family(
    domain: BoundedDomain, config: ExhaustionConfig, gamma: float | None = None
) -> ExhaustionFamily:
    """The family with the given gamma; calibration uses gamma = 0."""
    if domain.probe_mode or not domain.atlas:
        raise ExhaustionError(f"Domain {domain.name!r} has no atlas to build an exhaustion from")
    centers = domain.centers
    value = config.gamma if gamma is None else gamma
    return ExhaustionFamily(
        domain,
        config,
        domain_gain(domain),
        0.0 if value is None else float(value),
        centers,
        np.array([patch.direction for patch in domain.atlas]),
        np.array([patch.radius for patch in domain.atlas]),
        cKDTree(centers),
    )


def _sphere_points(
    family: ExhaustionFamily, j: int, directions: FloatArray
) -> FloatArray:
    radius = BUMP_OUTER * family.radii[j] * _SPHERE_SHRINK
    points = family.centers[j] + radius * directions
    return np.asarray(points[family.domain.contains(points)])


def required_gamma(
    family: ExhaustionFamily,
    eps_values: FloatArray,
    *,
    rng: np.random.Generator,
    samples: int = _DOMINATION_SAMPLES,
) -> tuple[float, tuple[float, ...] | None]:
    """
    Smallest gamma for which, at sampled points of dB(x_j, r_j/2) where no
    other patched candidate reaches base_j, the fallback q - lam beats the
    patched candidate of x_j. base_j is the candidate without -gamma lam.
    Returns the requirement and the point that sets it.
    """
    dim = family.domain.real_dimension
    needed = -math.inf
    witness: tuple[float, ...] | None = None
    directions = sphere_directions(samples, dim, rng)
    base = family.without_gamma()
    for j in range(family.centers.shape[0]):
        points = _sphere_points(family, j, directions)
        if points.shape[0] == 0:
            continue
        pairs = base.pairs(points)
        for eps in eps_values:
            pv = base.pair_values(points, eps, pairs)
            own_mask = pv.pairs.patches == j
            own = np.full(points.shape[0], -np.inf)
            own[pv.pairs.rows[own_mask]] = pv.values[own_mask]
            other = np.full(points.shape[0], -np.inf)
            np.maximum.at(other, pv.pairs.rows[~own_mask], pv.values[~own_mask])
            tie = _TIE * (1.0 + np.abs(own))
            exposed = np.isfinite(own) & (other < own - tie)
            if not exposed.any():
                continue
            gap = (own[exposed] - pv.fallback[exposed]) / pv.lam[exposed]
            worst = int(np.argmax(gap))
            if gap[worst] > needed:
                needed = float(gap[worst])
                witness = tuple(float(x) for x in points[exposed][worst])
    return needed, witness


def calibration_eps(config: ExhaustionConfig) -> FloatArray:
    grid = config.eps_grid
    return np.asarray(np.geomspace(grid[0], grid[-1], min(_CALIBRATION_EPS, grid.size)))


def calibrate_gamma(
    family: ExhaustionFamily, *, rng: np.random.Generator, samples: int = _DOMINATION_SAMPLES
) -> float:
    """Twice the smallest power of two, at least 1, covering the sampled requirement."""
    needed, witness = required_gamma(
        family, calibration_eps(family.config), rng=rng, samples=samples
    )
    target = max(needed, 1.0)
    if not math.isfinite(target) or target > 2.0**_GAMMA_LADDER:
        raise GammaTooSmall(
            f"no gamma up to 2^{_GAMMA_LADDER} dominates on {family.domain.name}"
            f" (needs {needed:.4g})",
            witness,
        )
    gamma = 2.0 * 2.0 ** math.ceil(math.log2(target))
    logger.debug(
        "Calibrated gamma=%g on %s (sampled requirement %.4g)", gamma, family.domain.name, needed
    )
    return gamma


def check_gamma(
    family: ExhaustionFamily,
    eps_values: FloatArray,
    *,
    rng: np.random.Generator,
    samples: int = _DOMINATION_SAMPLES,
) -> float:
    """The sampled requirement; raises GammaTooSmall when family.gamma is below it."""
    needed, witness = required_gamma(family, eps_values, rng=rng, samples=samples)
    if needed > family.gamma:
        raise GammaTooSmall(
            f"gamma={family.gamma:g} is below the sampled requirement {needed:.4g}"
            f" on {family.domain.name}",
            witness,
        )
    return needed


def v_eps_j(domain: BoundedDomain, j: int, eps: float) -> ScalarField:
    """log 1/delta(z + eps w_j) on Omega n cl B(x_j, r_j/2)."""
    if not 0.0 < eps <= domain.eps1:
        raise ExhaustionError(f"eps must lie in (0, {domain.eps1}], got {eps}")
    patch = domain.atlas[j]
    reach = BUMP_OUTER * patch.radius

    def region(points: FloatArray) -> BoolArray:
        near = np.linalg.norm(points - patch.center, axis=1) <= reach
        return np.asarray(domain.contains(points) & near)

    def value(points: FloatArray) -> FloatArray:
        shifted = points + eps * patch.direction
        inside = domain.contains(shifted)
        if not inside.all():
            witness = points[int(np.argmin(inside))]
            raise TranslateEscapes(
                f"z + eps w_{j} leaves {domain.name} at z={witness.tolist()}", witness
            )
        return np.asarray(-np.log(domain.distance(shifted)))

    return ScalarField(value, region, f"v[eps={eps:.3g}, j={j}]", domain.dimension)


def build_bump(
    domain: BoundedDomain, j: int, eps: float, lambda_constant: float | None = None
) -> tuple[ScalarField, float]:
    """psi_j at eps and the lam(eps) that keeps psi_j + lam q plurisubharmonic."""
    gain = domain_gain(domain)
    plateau = float(gain.plateau(eps))
    patch = domain.atlas[j]
    constant = bump_curvature(domain.core_margin) if lambda_constant is None else lambda_constant

    def value(points: FloatArray) -> FloatArray:
        rho = np.linalg.norm(points - patch.center, axis=1)
        t = (rho - BUMP_INNER * patch.radius) / ((BUMP_OUTER - BUMP_INNER) * patch.radius)
        return np.asarray(plateau * (1.0 - smoothstep(t)))

    bump = ScalarField(
        value,
        lambda p: np.ones(p.shape[0], dtype=bool),
        f"psi[eps={eps:.3g}, j={j}]",
        domain.dimension,
    )
    return bump, constant * plateau


def v_eps(
    domain: BoundedDomain,
    eps: float,
    config: ExhaustionConfig | None = None,
    *,
    rng: np.random.Generator | None = None,
) -> ScalarField:
    """
    v_eps on the domain. Without a configured gamma one is calibrated; a
    configured gamma is checked at eps and raises GammaTooSmall when short.
    """
    rng = rng if rng is not None else np.random.default_rng(settings.PSHLAB_DEFAULT_SEED)
    config = make_config(domain) if config is None else config
    if not 0.0 < eps <= config.eps0:
        raise ExhaustionError(f"eps must lie in (0, {config.eps0}], got {eps}")
    family = build_family(domain, config)
    if config.gamma is None:
        family = family.with_gamma(calibrate_gamma(family, rng=rng))
    else:
        check_gamma(family, np.array([eps]), rng=rng)
    return ScalarField(
        lambda p: family.v(p, eps),
        domain.contains,
        f"v[{domain.name}, eps={eps:.3g}]",
        domain.dimension,
    )


@dataclass(frozen=True)
class BoundRecord:
    point: tuple[float, ...]
    delta: float
    eps_star: float
    lower: float
    w: float
    upper: float

    def as_row(self) -> tuple[float, ...]:
        return self.point + (self.delta, self.eps_star, self.lower, self.w, self.upper)


@dataclass(frozen=True, eq=False)
class ExhaustionArtifact:
    domain: BoundedDomain
    config: ExhaustionConfig
    family: ExhaustionFamily
    bound_records: tuple[BoundRecord, ...] = ()
    psh: PshReport | None = None

    @property
    def fitted_constants(self) -> Mapping[str, float]:
        return self.config.fitted_constants

    @property
    def w(self) -> ScalarField:
        return ScalarField(
            lambda p: self.family.sup(p)[0],
            lambda p: self.domain.level(p) >= -BOUNDARY_TOLERANCE,
            f"w[{self.domain.name}]",
            self.domain.dimension,
        )

    def w_eps(self, eps: float) -> ScalarField:
        return ScalarField(
            lambda p: self.family.w_eps(p, eps),
            self.domain.contains,
            f"w[{self.domain.name}, eps={eps:.3g}]",
            self.domain.dimension,
        )

    def lower_bound(self, delta: npt.ArrayLike, C1: float | None = None) -> FloatArray:
        """-log 2 / log(1/delta) - C1 omega(delta) for 0 < delta <= eps0."""
        d = np.asarray(delta, dtype=float)
        C1 = self.fitted_constants.get("C1", 0.0) if C1 is None else C1
        return np.asarray(-math.log(2.0) / np.log(1.0 / d) - C1 * self.family.gain.omega_ratio(d))

    def upper_bound(self, delta: npt.ArrayLike) -> FloatArray:
        """log(f(eps0) / (delta + f(eps0))) / log(1/eps0) for delta < eps0."""
        d = np.asarray(delta, dtype=float)
        eps0 = self.config.eps0
        f0 = float(self.family.gain(eps0))
        return np.asarray(np.log(f0 / (d + f0)) / math.log(1.0 / eps0))

    def as_record(self) -> dict[str, Any]:
        records = self.bound_records
        lower_bad = [r for r in records if r.w < r.lower - _TIE]
        upper_bad = [r for r in records if r.w > r.upper + _TIE]
        negative = all(r.w < 0.0 for r in records)
        psh = self.psh
        return {
            "op": "build_exhaustion",
            "inputs": {"domain": self.domain.name, **self.config.as_record()},
            "verdict": (
                negative and not upper_bad and not lower_bad and (psh is None or psh.verdict)
            ),
            "fitted_constants": dict(self.fitted_constants),
            "measured": {
                "points": len(records),
                "max_w": max((r.w for r in records), default=-math.inf),
                "psh_worst_defect": psh.worst_defect if psh else math.inf,
            },
            "violations": [
                {"point": r.point, "delta": r.delta, "w": r.w, "lower": r.lower, "upper": r.upper}
                for r in (lower_bad + upper_bad)[:20]
            ],
        }


def fit_lower_constant(
    gain: WeakestGain, delta: FloatArray, w: FloatArray
) -> float:
    """Smallest C1 >= 0 with w >= -log 2 / log(1/delta) - C1 omega(delta) at the samples."""
    if delta.size == 0:
        return 0.0
    base = -math.log(2.0) / np.log(1.0 / delta)
    return max(float(np.max((base - w) / gain.omega_ratio(delta))), 0.0)


def sandwich_constants(
    family: ExhaustionFamily, points: FloatArray
) -> tuple[float, float]:
    """
    C1_hat and C2_hat with log 1/(delta + eps) - C1_hat lam <= v_eps and
    v_eps <= log 1/(delta + f(eps)) - C2_hat lam near the boundary, over the grid.
    """
    delta = family.domain.distance(points)
    pairs = family.pairs(points)
    low = -math.inf
    high = math.inf
    for eps in family.config.eps_grid:
        values, _ = family.candidates(points, eps, pairs)
        lam = float(family.lam(eps))
        f = float(family.gain(eps))
        low = max(low, float(np.max((np.log(1.0 / (delta + eps)) - values) / lam)))
        high = min(high, float(np.min((np.log(1.0 / (delta + f)) - values) / lam)))
    return low, high


def build_exhaustion(
    domain: BoundedDomain,
    config: ExhaustionConfig | None = None,
    *,
    rng: np.random.Generator | None = None,
    samples: int = 2000,
    sandwich_points: int = 200,
    psh_points: int = _PSH_POINTS,
) -> ExhaustionArtifact:
    """
    w for `domain`, with its bounds measured on sampled interior and
    near-boundary points and the constants fitted from them.
    """
    started = time.monotonic()
    rng = rng if rng is not None else np.random.default_rng(settings.PSHLAB_DEFAULT_SEED)
    config = make_config(domain) if config is None else config
    family = build_family(domain, config)
    check_omega_ratio(family.gain, config.eps_grid)
    if config.gamma is None:
        family = family.with_gamma(calibrate_gamma(family, rng=rng))
    else:
        check_gamma(family, calibration_eps(config), rng=rng)
    config = family.config

    eps0 = config.eps0
    points = np.vstack(
        [sample_interior(domain, samples, rng), sample_near_boundary(domain, samples // 2, rng)]
    )
    delta = domain.distance(points)
    points, delta = points[delta > 0.0], delta[delta > 0.0]
    w, star = family.sup(points)

    near = delta < eps0
    gain = family.gain
    C1 = fit_lower_constant(gain, delta[near], w[near])
    upper = np.full(delta.size, np.inf)
    lower = np.full(delta.size, -np.inf)
    artifact = ExhaustionArtifact(domain, config, family)
    upper[near] = artifact.upper_bound(delta[near])
    lower[near] = artifact.lower_bound(delta[near], C1)
    records = tuple(
        BoundRecord(tuple(float(x) for x in p), float(d), float(e), float(lo), float(v), float(up))
        for p, d, e, lo, v, up in zip(points, delta, star, lower, w, upper)
    )

    sandwich = points[near][:sandwich_points]
    C1_hat, C2_hat = sandwich_constants(family, sandwich) if sandwich.size else (math.nan, math.nan)
    c_hat = float(np.min(star[near] / delta[near])) if near.any() else math.nan
    lam0 = float(family.lam(eps0))
    fitted: dict[str, float] = {
        "gamma": family.gamma,
        "lambda_constant": config.lambda_constant,
        "lambda_eps0": lam0,
        "C1": C1,
        "C1_hat": C1_hat,
        "C2_hat": C2_hat,
        "C3_hat": C2_hat - 1.0 / config.lambda_constant,
        "c_hat": c_hat,
        "C_tilde_1": gain.C_tilde,
    }
    if gain.is_loglip:
        fitted["eta"] = (-math.log(2.0) - C1_hat * lam0) / math.log(1.0 / eps0)
    config = replace(config, fitted_constants=fitted)
    family = replace(family, config=config)

    artifact = ExhaustionArtifact(domain, config, family, records)
    picks = rng.choice(points.shape[0], min(psh_points, points.shape[0]), replace=False)
    radii = delta[picks][:, None] * np.asarray(_PSH_RADII)[None, :]
    psh = check_psh(artifact.w, points[picks], directions=4, radii=radii, rng=rng, nodes=MIN_NODES)
    artifact = ExhaustionArtifact(domain, config, family, records, psh)
    logger.info(
        "Built exhaustion on %s: gamma=%g, lam(eps0)=%.4g, %d eps values, C1=%.4g, %.2fs",
        domain.name,
        family.gamma,
        lam0,
        config.eps_grid.size,
        C1,
        time.monotonic() - started,
    )
    return artifact
