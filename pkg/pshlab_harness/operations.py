"""
One function per operation a config can name.

Each takes the validated config and returns an OperationResult: check
records for the report and, where the operation produces them, CSV series.
Sampling goes through generators seeded from `numeric.seed`.
"""

import logging

import numpy as np

from pshlab.util import make_rng
from pshlab_domains.atlas import verify_atlas
from pshlab_domains.catalog import build_domain
from pshlab_domains.distance import distance_to_boundary
from pshlab_domains.geometry import (
    BoundedDomain,
    FloatArray,
    as_points,
    sample_boundary,
)
from pshlab_domains.oracle import oracle_distance
from pshlab_domains.segment import check_segment_property
from pshlab_domains.translation import (
    UPPER_TOLERANCE,
    check_translation_estimate,
    default_eps_grid,
    sample_patch_points,
)
from pshlab_exhaustion.checks import (
    check_boundary_limit,
    check_bounds,
    check_levi_floor,
    check_sup_attainment,
    ray_point,
    trace,
)
from pshlab_exhaustion.construction import ExhaustionArtifact, build_exhaustion, make_config
from pshlab_exhaustion.exceptions import AttainmentViolation
from pshlab_harness.config import ExperimentConfig
from pshlab_harness.exceptions import ConfigError
from pshlab_harness.reports import CheckRecord, OperationResult, Series
from pshlab_mergelyan.approximant import (
    ApproximantArtifact,
    build_approximant,
    check_approximant,
    weakest_gain,
)
from pshlab_psh.fields import build_field
from pshlab_special.gain import GainForm, GainFunction
from pshlab_special.tables import GAIN_TABLE_HEADER, default_eps_values, gain_table

logger = logging.getLogger(__name__)

# Relative agreement required between delta and the brute-force oracle.
ORACLE_RTOL = 1e-4
TRANSLATION_POINTS = 20
EVALUATION_POINTS = 10


def config_domain(config: ExperimentConfig) -> BoundedDomain:
    return build_domain(config.domain_name, config.domain_params, seed=config.seed)


def config_gain(config: ExperimentConfig) -> GainFunction:
    return GainFunction(
        GainForm(config["gain.form"]),
        C=config["gain.C"],
        C_tilde=config["gain.C_tilde"],
        gamma=config["gain.gamma"],
    )


def config_points(config: ExperimentConfig, domain: BoundedDomain) -> FloatArray | None:
    points = config["numeric.points"]
    if not points:
        return None
    if any(len(p) != domain.real_dimension for p in points):
        raise ConfigError(
            f"points of {domain.name} need {domain.real_dimension} real coordinates",
            "numeric.points",
        )
    return as_points(points, domain.real_dimension)


def config_patch(config: ExperimentConfig, domain: BoundedDomain) -> int:
    patch = int(config["numeric.patch"])
    if patch >= len(domain.atlas):
        raise ConfigError(
            f"{domain.name} has {len(domain.atlas)} patch(es), got index {patch}",
            "numeric.patch",
        )
    return patch


def shell_points(
    domain: BoundedDomain,
    count: int,
    rng: np.random.Generator,
    low: float,
    high: float,
) -> FloatArray:
    """
    Up to `count` interior points with low < delta < high, pulled in from
    sampled boundary points towards the anchor by log-uniform depths.
    """
    boundary = sample_boundary(domain, 4 * count, rng)
    toward = domain.anchor_point - boundary
    toward /= np.linalg.norm(toward, axis=1, keepdims=True)
    depths = 10.0 ** rng.uniform(np.log10(low), np.log10(high), boundary.shape[0])
    points = boundary + depths[:, None] * toward
    points = points[domain.contains(points)]
    delta = domain.distance(points)
    keep = (delta > low) & (delta < high)
    return np.asarray(points[keep][:count])


def point_header(domain: BoundedDomain) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(domain.real_dimension))


def verify_domain(config: ExperimentConfig) -> OperationResult:
    domain = config_domain(config)
    rng = make_rng(config.seed)
    report = verify_atlas(domain, rng, config["numeric.boundary_samples"])
    check = CheckRecord.from_record("verify_atlas", report.as_record())
    return OperationResult((check,))


def segment_check(config: ExperimentConfig) -> OperationResult:
    domain = config_domain(config)
    rng = make_rng(config.seed)
    report = check_segment_property(domain, config["numeric.boundary_samples"], rng=rng)
    check = CheckRecord.from_record("segment_check", report.as_record())
    return OperationResult((check,))


def oracle_check(
    name: str, domain: BoundedDomain, points: FloatArray, samples: int
) -> CheckRecord:
    searched = np.array([distance_to_boundary(domain, point) for point in points])
    brute = oracle_distance(domain, points, samples=samples)
    error = float(np.max(np.abs(brute - searched) / searched))
    return CheckRecord(
        name,
        error <= ORACLE_RTOL,
        measured={"max_relative_error": error, "points": int(points.shape[0])},
        bound={"max_relative_error": ORACLE_RTOL},
        inputs={"domain": domain.name, "oracle_samples": samples},
    )


def translation_check(config: ExperimentConfig) -> OperationResult:
    domain = config_domain(config)
    patch = config_patch(config, domain)
    rng = make_rng(config.seed)
    points = config_points(config, domain)
    if points is None:
        points = sample_patch_points(domain, patch, TRANSLATION_POINTS, rng)
    eps = default_eps_grid(domain, TRANSLATION_POINTS)
    report = check_translation_estimate(domain, patch, points, eps)
    checks = [
        CheckRecord.from_record(
            "translation_check",
            report.as_record(),
            bound={"c_fit_min": 0.0, "upper_tolerance": UPPER_TOLERANCE},
        )
    ]
    samples = config["numeric.oracle_samples"]
    if samples > 0:
        checks.append(oracle_check("distance_oracle", domain, points, samples))
    series = Series("translation_gain", ("eps", "min_gain"), report.gain_rows)
    return OperationResult(tuple(checks), (series,))


def gain_table_op(config: ExperimentConfig) -> OperationResult:
    f = config_gain(config)
    rows = gain_table(f, default_eps_values(f, config["gain.decades"]))
    eps = np.array([row[0] for row in rows])
    values = np.array([row[1] for row in rows])
    below = bool(np.all((values > 0.0) & (values <= eps)))
    check = CheckRecord(
        "gain_table",
        below and bool(rows),
        measured={"rows": len(rows), "omega_last": rows[-1][2] if rows else None},
        bound={"f_over_eps_max": 1.0},
        inputs={"form": str(f.form), "C": f.C, "C_tilde": f.C_tilde, "gamma": f.gamma},
    )
    return OperationResult((check,), (Series("gain_table", GAIN_TABLE_HEADER, tuple(rows)),))


def config_approximant(
    config: ExperimentConfig, rng: np.random.Generator
) -> ApproximantArtifact:
    domain = config_domain(config)
    phi = build_field(config["field.name"], domain, config.field_params)
    return build_approximant(
        domain, phi, config["numeric.nu"], rng=rng, pair_samples=config["numeric.pair_samples"]
    )


def build_approximant_op(config: ExperimentConfig) -> OperationResult:
    rng = make_rng(config.seed)
    artifact = config_approximant(config, rng)
    return OperationResult((CheckRecord.from_record("build_approximant", artifact.as_record()),))


def check_approximant_op(config: ExperimentConfig) -> OperationResult:
    rng = make_rng(config.seed)
    artifact = config_approximant(config, rng)
    nu = artifact.nu
    gain = weakest_gain(artifact.domain, nu)
    report = check_approximant(artifact, gain, grid=config["numeric.grid"], rng=rng)
    checks = (
        CheckRecord.from_record("build_approximant", artifact.as_record()),
        CheckRecord.from_record(
            "check_approximant",
            report.as_record(),
            bound={"sup_error": report.bound, "margin_min": gain(nu)},
        ),
    )
    header = point_header(artifact.domain) + ("error",)
    return OperationResult(checks, (Series("approximant_error", header, report.rows),))


def config_exhaustion(
    config: ExperimentConfig, rng: np.random.Generator, samples: int | None = None
) -> ExhaustionArtifact:
    domain = config_domain(config)
    exhaustion_config = make_config(
        domain,
        rho=config["exhaustion.rho"],
        floor=config["exhaustion.floor"],
        gamma=config["exhaustion.gamma"],
        lambda_constant=config["exhaustion.lambda_constant"],
    )
    samples = config["numeric.samples"] if samples is None else samples
    return build_exhaustion(domain, exhaustion_config, rng=rng, samples=samples)


def bounds_series(artifact: ExhaustionArtifact) -> Series:
    header = point_header(artifact.domain) + ("delta", "eps_star", "lower", "w", "upper")
    return Series(
        "exhaustion_bounds", header, tuple(r.as_row() for r in artifact.bound_records)
    )


def build_exhaustion_op(config: ExperimentConfig) -> OperationResult:
    artifact = config_exhaustion(config, make_rng(config.seed))
    check = CheckRecord.from_record("build_exhaustion", artifact.as_record())
    return OperationResult((check,), (bounds_series(artifact),))


def evaluate_exhaustion(config: ExperimentConfig) -> OperationResult:
    rng = make_rng(config.seed)
    artifact = config_exhaustion(config, rng)
    domain = artifact.domain
    points = config_points(config, domain)
    if points is None:
        points = shell_points(domain, EVALUATION_POINTS, rng, 1e-9, artifact.config.eps0)
    w, eps_star = artifact.family.sup(points)
    inside = domain.contains(points)
    eps = config["numeric.eps"]
    header = point_header(domain) + ("delta", "w", "eps_star")
    delta = np.where(inside, domain.distance(points), 0.0)
    columns = [delta, w, eps_star]
    if eps is not None:
        header += ("w_eps",)
        columns.append(np.where(inside, artifact.family.w_eps(points, eps), np.nan))
    rows = tuple(
        tuple(float(x) for x in p) + tuple(float(c[i]) for c in columns)
        for i, p in enumerate(points)
    )
    check = CheckRecord(
        "evaluate_exhaustion",
        bool(np.all(w[inside] < 0.0)),
        measured={
            "points": int(points.shape[0]),
            "outside": int(np.sum(~inside)),
            "max_w": float(np.max(w[inside])) if inside.any() else None,
        },
        bound={"w_max": 0.0},
        inputs={"domain": domain.name, "eps": eps},
    )
    return OperationResult((check,), (Series("exhaustion_values", header, rows),))


def check_bounds_op(config: ExperimentConfig) -> OperationResult:
    rng = make_rng(config.seed)
    artifact = config_exhaustion(config, rng)
    domain = artifact.domain
    count = config["numeric.boundary_samples"]
    fresh = shell_points(domain, count, rng, 1e-9, artifact.config.eps0)
    own = check_bounds(artifact)
    report = check_bounds(artifact, fresh)
    ray = check_boundary_limit(artifact, config_patch(config, domain))
    checks = (
        CheckRecord.from_record("check_bounds.samples", own.as_record()),
        CheckRecord.from_record("check_bounds.fresh", report.as_record()),
        CheckRecord.from_record("check_boundary_limit", ray.as_record()),
    )
    header = point_header(domain) + ("delta", "lower", "w", "upper")
    series = (
        Series("exhaustion_bounds", header, report.rows),
        Series("exhaustion_ray", ("delta", "t", "w"), ray.rows),
    )
    return OperationResult(checks, series)


def check_levi_op(config: ExperimentConfig) -> OperationResult:
    rng = make_rng(config.seed)
    artifact = config_exhaustion(config, rng)
    h = config["numeric.levi_step"]
    points = shell_points(
        artifact.domain, config["numeric.levi_samples"], rng, 10.0 * h, 0.5 * artifact.config.eps0
    )
    report = check_levi_floor(artifact, points, h)
    rows = tuple(
        s.point + (s.delta, s.eps_star, s.min_eigenvalue, s.floor) for s in report.samples
    )
    header = point_header(artifact.domain) + ("delta", "eps_star", "min_eigenvalue", "floor")
    check = CheckRecord.from_record(
        "check_levi_floor", report.as_record(), bound={"C_fit_min": 0.0}
    )
    return OperationResult((check,), (Series("levi_floor", header, rows),))


def attainment_check(artifact: ExhaustionArtifact, z: FloatArray) -> CheckRecord:
    try:
        record = check_sup_attainment(artifact, z).as_record()
    except AttainmentViolation as exc:
        return CheckRecord(
            "check_sup_attainment",
            False,
            measured={"error": str(exc)},
            violations=tuple(exc.trace or ()),
        )
    return CheckRecord.from_record(
        "check_sup_attainment",
        record,
        bound={"c_hat": artifact.fitted_constants.get("c_hat")},
    )


def trace_op(config: ExperimentConfig) -> OperationResult:
    rng = make_rng(config.seed)
    artifact = config_exhaustion(config, rng)
    domain = artifact.domain
    points = config_points(config, domain)
    if points is None:
        z = ray_point(artifact, config_patch(config, domain), config["numeric.depth"])
    else:
        z = points[0]
    rows = trace(artifact, z)
    delta = float(domain.distance(z[None, :])[0])
    checks = [
        CheckRecord(
            "trace",
            all(row[1] < 0.0 for row in rows),
            measured={"rows": len(rows), "delta": delta, "max_w_eps": max(r[1] for r in rows)},
            bound={"w_max": 0.0},
            inputs={"domain": domain.name, "point": tuple(float(x) for x in z)},
        )
    ]
    if delta <= artifact.config.eps0:
        checks.append(attainment_check(artifact, z))
    return OperationResult(tuple(checks), (Series("trace", ("eps", "w_eps", "branch"), rows),))

