"""
Checks on a built exhaustion: the two-sided bounds, the limit along
boundary rays, where the sup over eps is attained, and the Levi floor.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy.optimize import brentq

from pshlab_domains.geometry import FloatArray, as_points
from pshlab_exhaustion.construction import (
    ExhaustionArtifact,
    fit_lower_constant,
)
from pshlab_exhaustion.exceptions import AttainmentViolation, ExhaustionError, NonSmoothPoint
from pshlab_psh.fields import ScalarField
from pshlab_psh.levi import levi_form, stencil_points
from pshlab_psh.mollify import mollify

logger = logging.getLogger(__name__)

TraceRow = tuple[float, float, int]

_TOLERANCE = 1e-12
_RAY_EXPONENTS = range(3, 21)
SMOOTH_FRACTION = 0.8
# -w at the deepest ray point may exceed the rate of the lower bound by this factor.
RAY_GAP_FACTOR = 2.0


@dataclass(frozen=True)
class BoundsReport:
    domain: str
    checked: int
    C1: float
    lower_violations: int
    upper_violations: int
    negative: bool
    rows: tuple[tuple[float, ...], ...] = field(default_factory=tuple, repr=False)

    @property
    def passes(self) -> bool:
        return self.negative and not self.lower_violations and not self.upper_violations

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "check_bounds",
            "inputs": {"domain": self.domain, "checked": self.checked},
            "verdict": self.passes,
            "fitted_constants": {"C1": self.C1},
            "measured": {
                "lower_violations": self.lower_violations,
                "upper_violations": self.upper_violations,
                "negative": self.negative,
            },
            "violations": [],
        }


def check_bounds(
    artifact: ExhaustionArtifact, points: npt.ArrayLike | None = None
) -> BoundsReport:
    """
    w against both bounds at points with delta < eps0 and w < 0 everywhere.
    Without points the artifact's own samples are used; with points the
    fitted C1 is tested on them as a fresh set.
    """
    domain = artifact.domain
    eps0 = artifact.config.eps0
    C1 = artifact.fitted_constants.get("C1", 0.0)
    if points is None:
        records = artifact.bound_records
        pts = np.array([r.point for r in records]).reshape(-1, domain.real_dimension)
        delta = np.array([r.delta for r in records])
        w = np.array([r.w for r in records])
    else:
        pts = as_points(points, domain.real_dimension)
        pts = pts[domain.contains(pts)]
        delta = domain.distance(pts)
        w = artifact.w(pts)
    near = delta < eps0
    lower = np.full(delta.size, -np.inf)
    upper = np.full(delta.size, np.inf)
    lower[near] = artifact.lower_bound(delta[near], C1)
    upper[near] = artifact.upper_bound(delta[near])
    lower_bad = int(np.sum(w < lower - _TOLERANCE))
    upper_bad = int(np.sum(w > upper + _TOLERANCE))
    negative = bool(np.all(w < 0.0))
    rows = tuple(
        tuple(float(x) for x in p) + (float(d), float(lo), float(v), float(up))
        for p, d, lo, v, up in zip(pts, delta, lower, w, upper)
    )
    report = BoundsReport(domain.name, int(w.size), C1, lower_bad, upper_bad, negative, rows)
    logger.info(
        "Bounds on %s: %d points, %d lower and %d upper violation(s)",
        domain.name,
        w.size,
        lower_bad,
        upper_bad,
    )
    return report


@dataclass(frozen=True)
class RayReport:
    domain: str
    patch: int
    rows: tuple[tuple[float, float, float], ...]
    increasing: bool
    negative: bool
    tolerance: float

    @property
    def passes(self) -> bool:
        return self.increasing and self.negative and self.gap <= self.tolerance

    @property
    def gap(self) -> float:
        """-w at the deepest point of the ray, which tends to 0."""
        return -self.rows[-1][2]

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "check_boundary_limit",
            "inputs": {"domain": self.domain, "patch": self.patch},
            "verdict": self.passes,
            "fitted_constants": {},
            "measured": {
                "increasing": self.increasing,
                "negative": self.negative,
                "gap": self.gap,
            },
            "bound": {"gap": self.tolerance},
            "violations": [],
        }


def ray_point(artifact: ExhaustionArtifact, patch: int, delta: float) -> FloatArray:
    """The point x_j + t w_j with delta(x_j + t w_j) = delta, t found by brentq."""
    domain = artifact.domain
    center = domain.atlas[patch].center
    direction = domain.atlas[patch].direction
    reach = float(np.linalg.norm(domain.anchor_point - center))

    def gap(t: float) -> float:
        return float(domain.distance((center + t * direction)[None, :])[0]) - delta

    if gap(reach) <= 0.0:
        raise ExhaustionError(
            f"delta={delta:.3g} is not reached along the normal ray of patch {patch}"
        )
    t = brentq(gap, 0.0, reach, xtol=1e-15, rtol=1e-12)
    return np.asarray(center + t * direction)


def boundary_gap_tolerance(artifact: ExhaustionArtifact, delta: float) -> float:
    """
    Largest -w accepted at distance delta: RAY_GAP_FACTOR times
    log 2 / log(1/delta) + C1 omega(delta), which tends to 0 with delta.
    """
    return RAY_GAP_FACTOR * float(-artifact.lower_bound(np.array([delta]))[0])


def check_boundary_limit(
    artifact: ExhaustionArtifact, patch: int = 0, exponents: range = _RAY_EXPONENTS
) -> RayReport:
    """
    w at delta = 2^-k along the inward normal ray of a patch: increasing,
    negative, and within boundary_gap_tolerance of 0 at the deepest point.
    """
    rows: list[tuple[float, float, float]] = []
    for k in exponents:
        delta = 2.0**-k
        point = ray_point(artifact, patch, delta)
        t = float(np.linalg.norm(point - artifact.domain.atlas[patch].center))
        rows.append((delta, t, float(artifact.w(point[None, :])[0])))
    w = np.array([row[2] for row in rows])
    increasing = bool(np.all(np.diff(w) >= -_TOLERANCE * (1.0 + np.abs(w[1:]))))
    tolerance = boundary_gap_tolerance(artifact, rows[-1][0])
    report = RayReport(
        artifact.domain.name,
        patch,
        tuple(rows),
        increasing,
        bool(np.all(w < 0.0)),
        tolerance,
    )
    logger.info(
        "Boundary ray %d on %s: w from %.4g to %.4g (gap tolerance %.4g), increasing=%s",
        patch,
        artifact.domain.name,
        w[0],
        w[-1],
        tolerance,
        increasing,
    )
    return report


def trace(artifact: ExhaustionArtifact, z: npt.ArrayLike) -> tuple[TraceRow, ...]:
    return artifact.family.trace(z)


@dataclass(frozen=True)
class AttainmentReport:
    point: tuple[float, ...]
    delta: float
    eps_star: float
    lower_fraction: float
    w: float
    holds: bool

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "check_sup_attainment",
            "inputs": {"point": self.point, "delta": self.delta},
            "verdict": self.holds,
            "fitted_constants": {"lower_fraction": self.lower_fraction},
            "measured": {"eps_star": self.eps_star, "w": self.w},
            "violations": [],
        }


def check_sup_attainment(
    artifact: ExhaustionArtifact, z: npt.ArrayLike, c_hat: float | None = None
) -> AttainmentReport:
    """
    eps* maximising w_eps(z) must satisfy eps* >= c_hat delta(z). The default
    c_hat is the one fitted when the artifact was built.
    """
    point = as_points(z, artifact.domain.real_dimension)[0]
    delta = float(artifact.domain.distance(point[None, :])[0])
    if not 0.0 < delta <= artifact.config.eps0:
        raise ExhaustionError(
            f"attainment needs 0 < delta <= eps0={artifact.config.eps0}, got {delta}"
        )
    c_hat = artifact.fitted_constants.get("c_hat", 0.0) if c_hat is None else c_hat
    rows = trace(artifact, point)
    best = max(rows, key=lambda row: row[1])
    eps_star = best[0]
    fraction = eps_star / delta
    if eps_star < c_hat * delta * (1.0 - _TOLERANCE):
        raise AttainmentViolation(
            f"sup at {point.tolist()} is attained at eps={eps_star:.4g} < {c_hat:g} delta",
            rows,
        )
    return AttainmentReport(
        tuple(float(x) for x in point), delta, eps_star, fraction, best[1], True
    )


@dataclass(frozen=True)
class LeviSample:
    point: tuple[float, ...]
    delta: float
    eps_star: float
    min_eigenvalue: float
    floor: float

    @property
    def ratio(self) -> float:
        return self.min_eigenvalue / self.floor


@dataclass(frozen=True)
class LeviFloorReport:
    domain: str
    C_fit: float
    checked: int
    skipped: int
    step: float
    samples: tuple[LeviSample, ...] = field(default_factory=tuple, repr=False)

    @property
    def passes(self) -> bool:
        total = self.checked + self.skipped
        return self.C_fit > 0.0 and self.checked >= SMOOTH_FRACTION * total

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "check_levi_floor",
            "inputs": {"domain": self.domain, "step": self.step},
            "verdict": self.passes,
            "fitted_constants": {"C_fit": self.C_fit},
            "measured": {"checked": self.checked, "skipped": self.skipped},
            "violations": [
                {"point": s.point, "min_eigenvalue": s.min_eigenvalue, "floor": s.floor}
                for s in self.samples
                if s.min_eigenvalue <= 0.0
            ],
        }


def levi_floor(artifact: ExhaustionArtifact, delta: float) -> float:
    """log(C_tilde log(1/delta)) / log(1/delta)."""
    log_inv = math.log(1.0 / delta)
    value = math.log(artifact.family.gain.C_tilde * log_inv) / log_inv
    if value <= 0.0:
        raise ExhaustionError(f"the Levi floor is not positive at delta={delta:.3g}")
    return value


def levi_sample(
    artifact: ExhaustionArtifact, z: npt.ArrayLike, h: float, eps: float | None = None
) -> LeviSample:
    """
    Smallest Levi eigenvalue of w_eps at z, eps defaulting to the maximiser.
    Raises NonSmoothPoint when the branch of v_eps changes inside the stencil.
    """
    family = artifact.family
    domain = artifact.domain
    point = as_points(z, domain.real_dimension)[:1]
    delta = float(domain.distance(point)[0])
    if eps is None:
        eps = float(family.sup(point)[1][0])
    nodes = stencil_points(point, h, domain.dimension).reshape(-1, domain.real_dimension)
    _, branch = family.candidates(nodes, eps)
    if np.unique(branch).size > 1:
        raise NonSmoothPoint(
            f"branch changes inside the stencil at {point[0].tolist()} (eps={eps:.3g})",
            point[0],
        )
    u = ScalarField(
        lambda p: family.w_eps(p, eps), domain.contains, f"w_eps[{eps:.3g}]", domain.dimension
    )
    report = levi_form(u, point[0], h)
    return LeviSample(
        tuple(float(x) for x in point[0]),
        delta,
        eps,
        report.min_eigenvalue,
        levi_floor(artifact, delta),
    )


def check_levi_floor(
    artifact: ExhaustionArtifact, samples: npt.ArrayLike, h: float
) -> LeviFloorReport:
    """
    C_fit = min lambda_min(w_eps*) / floor(delta) over the samples where
    the active branch is constant across the stencil; the rest are skipped.
    """
    domain = artifact.domain
    points = as_points(samples, domain.real_dimension)
    delta = domain.distance(points)
    if np.any(delta >= artifact.config.eps0) or np.any(delta <= 2.0 * h):
        raise ExhaustionError(f"Levi samples need 2h < delta < eps0={artifact.config.eps0}")
    checked: list[LeviSample] = []
    skipped: list[FloatArray] = []
    for point in points:
        try:
            checked.append(levi_sample(artifact, point, h))
        except NonSmoothPoint as exc:
            logger.debug("%s", exc)
            skipped.append(point)
    if not checked:
        raise NonSmoothPoint(
            f"no sample of {domain.name} has a constant branch across its stencil",
            skipped[0] if skipped else None,
        )
    C_fit = min(sample.ratio for sample in checked)
    report = LeviFloorReport(domain.name, C_fit, len(checked), len(skipped), h, tuple(checked))
    logger.info(
        "Levi floor on %s: C_fit=%.4g over %d point(s), %d skipped",
        domain.name,
        C_fit,
        len(checked),
        len(skipped),
    )
    return report


def smooth_exhaustion(
    artifact: ExhaustionArtifact, radius: float, nodes_log2: int | None = None
) -> ScalarField:
    """w mollified at `radius`, defined where the whole kernel stays in the closure."""
    return mollify(artifact.w, radius, nodes_log2)


@dataclass(frozen=True)
class SmoothedBoundsReport:
    domain: str
    radius_label: str
    checked: int
    C1: float
    upper_violations: int
    negative: bool

    @property
    def passes(self) -> bool:
        return self.negative and not self.upper_violations and math.isfinite(self.C1)

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "recheck_smoothed",
            "inputs": {"domain": self.domain, "field": self.radius_label},
            "verdict": self.passes,
            "fitted_constants": {"C1": self.C1},
            "measured": {
                "checked": self.checked,
                "upper_violations": self.upper_violations,
                "negative": self.negative,
            },
            "violations": [],
        }


def recheck_smoothed(
    artifact: ExhaustionArtifact, smoothed: ScalarField, points: npt.ArrayLike
) -> SmoothedBoundsReport:
    """
    The bounds for a mollified w: the lower constant is refitted and the
    upper bound is relaxed to half its value.
    """
    domain = artifact.domain
    pts = as_points(points, domain.real_dimension)
    pts = pts[smoothed.inside(pts)]
    delta = domain.distance(pts)
    values = smoothed(pts)
    near = (delta > 0.0) & (delta < artifact.config.eps0)
    C1 = fit_lower_constant(artifact.family.gain, delta[near], values[near])
    upper = 0.5 * artifact.upper_bound(delta[near])
    upper_bad = int(np.sum(values[near] > upper + _TOLERANCE))
    report = SmoothedBoundsReport(
        domain.name,
        smoothed.label,
        int(values.size),
        C1,
        upper_bad,
        bool(np.all(values < 0.0)),
    )
    logger.info(
        "Smoothed bounds on %s: C1=%.4g, %d upper violation(s)", domain.name, C1, upper_bad
    )
    return report
