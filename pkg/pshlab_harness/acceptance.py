"""
The acceptance suite.

 1. Lambert W round trip on both branches and the branch-point values.
 2. omega(eps) for the Log-Lipschitz gain is positive, decreasing and
    below 1/4 at eps = 1e-10.
 3. Translation estimate on the Log-Lipschitz cusp, with distances
    cross-checked against the brute-force oracle.
 4. Segment property on the catalog; the Hartogs probe fails in every
    direction.
 5. Approximants for three fields on three domains.
 6. Bounded exhaustion on the Log-Lipschitz cusp.
 7. The sup over eps is attained at eps comparable to delta.
 8. Levi floor of the attained branch, and the finite-difference order.
 9. Two runs give byte-identical reports.

Tasks run through `ordered_map`. Each draws from its own generator
stream, so the merged report does not depend on scheduling. Runtime
budgets are reported next to the measurements but do not enter the
verdicts.
"""

import hashlib
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from pshlab.exceptions import PshlabException
from pshlab.util import dump_json, make_rng, ordered_map
from pshlab_domains.catalog import build_domain
from pshlab_domains.geometry import FloatArray, sample_interior
from pshlab_domains.segment import PROBE_DIRECTIONS, check_segment_property
from pshlab_domains.translation import (
    check_translation_estimate,
    default_eps_grid,
    sample_patch_points,
)
from pshlab_exhaustion.checks import (
    check_boundary_limit,
    check_bounds,
    check_levi_floor,
    check_sup_attainment,
)
from pshlab_exhaustion.construction import ExhaustionArtifact, build_exhaustion
from pshlab_harness.config import ACCEPTANCE_CRITERIA, ExperimentConfig
from pshlab_harness.operations import oracle_check, shell_points
from pshlab_harness.reports import CheckRecord, merge_checks, timed
from pshlab_mergelyan.approximant import build_approximant, check_approximant, weakest_gain
from pshlab_psh.fields import ScalarField, build_field, everywhere
from pshlab_psh.levi import levi_form
from pshlab_special.gain import loglip_gain, omega_ratio
from pshlab_special.lambert import INV_E, LambertBranch, lambert_w, lambert_w_array

logger = logging.getLogger(__name__)

ROUNDTRIP_TOLERANCE = 1e-12
BRANCH_POINT_TOLERANCE = 1e-8
OMEGA_LIMIT = 0.25
STABILITY = 0.2
EXACT_TOLERANCE = 1e-12
LEVI_EXACT_TOLERANCE = 1e-7
ORDER_FACTOR = 1.5
ORDER_STEPS = (1e-2, 5e-3, 2.5e-3)
ORDER_POINT = (0.3, -0.2, 0.1, 0.4)

SEGMENT_DOMAINS = ("unit_ball", "polydisc", "cone", "hoelder_cusp", "loglip_cusp")
APPROXIMANT_DOMAINS = ("unit_ball", "cone", "loglip_cusp")
APPROXIMANT_FIELDS = ("constant", "re_z1", "abs_sq")
EXHAUSTION_DOMAIN = "loglip_cusp"

# Wall-time budgets in ms, per check.
BUDGET_MS = {
    1: 1e3,
    2: 1e3,
    3: 6e4,
    4: 3e4,
    5: 3e5,
    6: 3e5,
    7: 1.2e5,
    8: 3e5,
    9: 1.2e6,
}


@dataclass(frozen=True)
class Counts:
    lambert: int
    translation_points: int
    oracle_samples: int
    boundary_samples: int
    pair_samples: int
    grid: int
    interior: int
    near: int


FULL = Counts(1000, 20, 10**6, 1000, 20000, 10**4, 10**4, 100)
REDUCED = Counts(1000, 20, 10**5, 64, 2000, 1000, 400, 20)


def counts(config: ExperimentConfig) -> Counts:
    return REDUCED if config.reduced else FULL


def failure(name: str, exc: PshlabException) -> CheckRecord:
    witness = getattr(exc, "witness", None)
    return CheckRecord(
        name,
        False,
        measured={"error": str(exc), "error_type": type(exc).__name__},
        violations=(witness,) if witness is not None else (),
    )


def measure(name: str, fn: Callable[[], CheckRecord]) -> CheckRecord:
    """Time one check; library failures become a failed record instead of aborting the suite."""

    def attempt() -> CheckRecord:
        try:
            return fn()
        except PshlabException as exc:
            logger.warning("Acceptance check %s failed with %s: %s", name, type(exc).__name__, exc)
            return failure(name, exc)

    return timed(name, attempt)


def within(first: float, second: float, fraction: float) -> bool:
    return abs(first - second) <= fraction * max(abs(first), abs(second))


def budget(criterion: int, **bound: float) -> dict[str, float]:
    return {**bound, "runtime_ms": BUDGET_MS[criterion]}


# 1. Lambert W


def lambert_arguments(branch: LambertBranch, count: int) -> FloatArray:
    """Log-spaced arguments over the branch domain, the branch point included for W-1."""
    if branch is LambertBranch.PRINCIPAL:
        return np.asarray(-INV_E + np.geomspace(1e-12, 1e6, count))
    return np.asarray(-np.geomspace(1e-12, INV_E, count))


def lambert_roundtrip(branch: LambertBranch, count: int) -> CheckRecord:
    x = lambert_arguments(branch, count)
    w = lambert_w_array(branch, x)
    residual = np.abs(w * np.exp(w) - x)
    scaled = np.where(np.abs(x) <= 1.0, residual, residual / np.abs(x))
    worst = float(np.max(scaled))
    return CheckRecord(
        f"1.lambert_roundtrip.W{int(branch)}",
        worst <= ROUNDTRIP_TOLERANCE,
        measured={"max_residual": worst},
        bound=budget(1, max_residual=ROUNDTRIP_TOLERANCE),
        inputs={"branch": int(branch), "arguments": count},
    )


def lambert_branch_point() -> CheckRecord:
    values = {str(int(b)): lambert_w(b, -INV_E) for b in LambertBranch}
    defect = max(abs(v + 1.0) for v in values.values())
    return CheckRecord(
        "1.lambert_branch_point",
        defect <= BRANCH_POINT_TOLERANCE,
        measured={"values": values, "max_defect": defect},
        bound=budget(1, max_defect=BRANCH_POINT_TOLERANCE),
    )


def lambert_checks(config: ExperimentConfig) -> list[CheckRecord]:
    n = counts(config).lambert
    checks = [
        measure(f"1.lambert_roundtrip.W{int(b)}", lambda b=b: lambert_roundtrip(b, n))
        for b in LambertBranch
    ]
    checks.append(measure("1.lambert_branch_point", lambert_branch_point))
    return checks


# 2. omega for the Log-Lipschitz gain


def omega_limit() -> CheckRecord:
    f = loglip_gain(1.0, 1.0)
    eps = 10.0 ** -np.arange(2, 11)
    omega = np.array([omega_ratio(f, float(e)) for e in eps])
    positive = bool(np.all(omega > 0.0))
    decreasing = bool(np.all(np.diff(omega) < 0.0))
    verdict = positive and decreasing and omega[-1] < OMEGA_LIMIT
    return CheckRecord(
        "2.loglip_omega",
        verdict,
        measured={
            "omega": omega,
            "positive": positive,
            "decreasing": decreasing,
            "omega_last": float(omega[-1]),
        },
        bound=budget(2, omega_last=OMEGA_LIMIT),
        inputs={"C": f.C, "C_tilde": f.C_tilde, "eps": eps},
    )


def omega_checks(config: ExperimentConfig) -> list[CheckRecord]:
    return [measure("2.loglip_omega", omega_limit)]


# 3. Translation estimate


def translation_checks(config: ExperimentConfig) -> list[CheckRecord]:
    sizes = counts(config)
    domain = build_domain(EXHAUSTION_DOMAIN, seed=config.seed)
    rng = make_rng(config.seed, 3)
    points = sample_patch_points(domain, 0, sizes.translation_points, rng)

    def estimate() -> CheckRecord:
        eps = default_eps_grid(domain, sizes.translation_points)
        report = check_translation_estimate(domain, 0, points, eps)
        return CheckRecord.from_record(
            "3.translation_estimate", report.as_record(), bound=budget(3, c_fit_min=0.0)
        )

    def oracle() -> CheckRecord:
        record = oracle_check("3.distance_oracle", domain, points, sizes.oracle_samples)
        return CheckRecord(
            record.name,
            record.verdict,
            measured=record.measured,
            bound=budget(3, **record.bound),
            inputs=record.inputs,
        )

    return [measure("3.translation_estimate", estimate), measure("3.distance_oracle", oracle)]


# 4. Segment property


def segment_checks(config: ExperimentConfig) -> list[CheckRecord]:
    samples = counts(config).boundary_samples
    checks = []
    for stream, name in enumerate(SEGMENT_DOMAINS, start=40):

        def passes(name: str = name, stream: int = stream) -> CheckRecord:
            domain = build_domain(name, seed=config.seed)
            report = check_segment_property(domain, samples, rng=make_rng(config.seed, stream))
            return CheckRecord.from_record(f"4.segment.{name}", report.as_record(), bound=budget(4))

        checks.append(measure(f"4.segment.{name}", passes))

    def probe() -> CheckRecord:
        domain = build_domain("hartogs", seed=config.seed)
        report = check_segment_property(domain, 1, rng=make_rng(config.seed, 49))
        record = report.as_record()
        failed_everywhere = not report.passes and report.failed_directions == PROBE_DIRECTIONS
        return CheckRecord(
            "4.segment.hartogs_probe",
            failed_everywhere,
            measured={"failed_directions": report.failed_directions, "tested": report.tested},
            bound=budget(4, failed_directions=PROBE_DIRECTIONS),
            inputs=record["inputs"],
            violations=tuple(record["violations"][:4]),
        )

    checks.append(measure("4.segment.hartogs_probe", probe))
    return checks


# 5. Approximants


def approximant_check(
    config: ExperimentConfig, domain_name: str, field_name: str, stream: int
) -> CheckRecord:
    sizes = counts(config)
    domain = build_domain(domain_name, seed=config.seed)
    rng = make_rng(config.seed, stream)
    phi = build_field(field_name, domain)
    nu = config["numeric.nu"]
    artifact = build_approximant(domain, phi, nu, rng=rng, pair_samples=sizes.pair_samples)
    gain = weakest_gain(domain, nu)
    first = check_approximant(artifact, gain, grid=sizes.grid, rng=rng)
    second = check_approximant(artifact, grid=sizes.grid, rng=rng)
    stable = within(first.C_fit, second.C_fit, STABILITY)
    certified = first.margin >= gain(nu)
    sup_error = max(first.sup_error, second.sup_error)
    exact = field_name != "constant" or sup_error <= EXACT_TOLERANCE
    return CheckRecord(
        f"5.approximant.{domain_name}.{field_name}",
        first.passes and second.passes and stable and certified and exact,
        measured={
            "sup_error": sup_error,
            "margin": first.margin,
            "psh_verdict": first.psh_verdict,
            "domination_passes": first.domination_passes,
            "stable": stable,
        },
        bound=budget(5, sup_error=min(first.bound, second.bound), margin_min=gain(nu)),
        fitted_constants={
            "C_fit": first.C_fit,
            "C_fit_second": second.C_fit,
            "omega_nu": artifact.omega_nu,
        },
        inputs={"domain": domain_name, "field": field_name, "nu": nu},
    )


def approximant_checks(config: ExperimentConfig) -> list[CheckRecord]:
    checks = []
    pairs = [(d, f) for d in APPROXIMANT_DOMAINS for f in APPROXIMANT_FIELDS]
    for stream, (domain_name, field_name) in enumerate(pairs, start=50):
        name = f"5.approximant.{domain_name}.{field_name}"
        checks.append(
            measure(
                name,
                lambda d=domain_name, f=field_name, s=stream: approximant_check(config, d, f, s),
            )
        )
    return checks


# 6-8. Exhaustion


def exhaustion_build_check(artifact: ExhaustionArtifact) -> CheckRecord:
    report = check_bounds(artifact)
    record = artifact.as_record()
    return CheckRecord(
        "6.exhaustion.bounds",
        bool(record["verdict"]) and report.passes,
        measured={**record["measured"], **report.as_record()["measured"]},
        bound=budget(6, w_max=0.0),
        fitted_constants=record["fitted_constants"],
        inputs=record["inputs"],
        violations=tuple(record["violations"]),
    )


def exhaustion_negative_check(
    artifact: ExhaustionArtifact, rng: np.random.Generator, count: int
) -> CheckRecord:
    points = sample_interior(artifact.domain, count, rng)
    w = artifact.w(points)
    return CheckRecord(
        "6.exhaustion.negative",
        bool(np.all(w < 0.0)),
        measured={"points": count, "max_w": float(np.max(w))},
        bound=budget(6, w_max=0.0),
    )


def exhaustion_fresh_check(
    artifact: ExhaustionArtifact, rng: np.random.Generator, count: int
) -> CheckRecord:
    points = shell_points(artifact.domain, count, rng, 1e-9, artifact.config.eps0)
    report = check_bounds(artifact, points)
    record = report.as_record()
    return CheckRecord(
        "6.exhaustion.upper_bound_fresh",
        report.negative and report.upper_violations == 0,
        measured=record["measured"],
        bound=budget(6, upper_violations=0),
        fitted_constants=record["fitted_constants"],
        inputs=record["inputs"],
    )


def exhaustion_ray_check(artifact: ExhaustionArtifact) -> CheckRecord:
    report = check_boundary_limit(artifact, 0)
    return CheckRecord.from_record("6.exhaustion.boundary_ray", report.as_record(), bound=budget(6))


def attainment_fraction(artifact: ExhaustionArtifact, points: FloatArray) -> float:
    """min eps*/delta over the points: the attainment constant c_hat of one sample set."""
    return min(check_sup_attainment(artifact, z, c_hat=0.0).lower_fraction for z in points)


def attainment_check(
    artifact: ExhaustionArtifact, rng: np.random.Generator, count: int
) -> CheckRecord:
    points = shell_points(artifact.domain, 2 * count, rng, 1e-9, artifact.config.eps0)
    first, second = points[: points.shape[0] // 2], points[points.shape[0] // 2 :]
    c_first = attainment_fraction(artifact, first)
    c_second = attainment_fraction(artifact, second)
    stable = within(c_first, c_second, STABILITY)
    return CheckRecord(
        "7.sup_attainment",
        c_first > 0.0 and c_second > 0.0 and stable,
        measured={"points": [first.shape[0], second.shape[0]], "stable": stable},
        bound=budget(7, c_hat_min=0.0, relative_spread=STABILITY),
        fitted_constants={"c_hat": c_first, "c_hat_second": c_second},
    )


def levi_floor_check(
    artifact: ExhaustionArtifact, rng: np.random.Generator, count: int, h: float
) -> CheckRecord:
    points = shell_points(artifact.domain, count, rng, 10.0 * h, 0.5 * artifact.config.eps0)
    report = check_levi_floor(artifact, points, h)
    return CheckRecord.from_record(
        "8.levi_floor", report.as_record(), bound=budget(8, C_fit_min=0.0)
    )


def exhaustion_checks(config: ExperimentConfig, selected: frozenset[int]) -> list[CheckRecord]:
    sizes = counts(config)
    domain = build_domain(EXHAUSTION_DOMAIN, seed=config.seed)
    try:
        artifact = build_exhaustion(domain, rng=make_rng(config.seed, 6), samples=sizes.interior)
    except PshlabException as exc:
        logger.warning("Exhaustion build failed: %s", exc)
        return [failure(f"{n}.exhaustion_build", exc) for n in sorted(selected & {6, 7, 8})]

    checks = []
    if 6 in selected:
        checks += [
            measure("6.exhaustion.bounds", lambda: exhaustion_build_check(artifact)),
            measure(
                "6.exhaustion.negative",
                lambda: exhaustion_negative_check(
                    artifact, make_rng(config.seed, 61), sizes.interior
                ),
            ),
            measure(
                "6.exhaustion.upper_bound_fresh",
                lambda: exhaustion_fresh_check(artifact, make_rng(config.seed, 62), sizes.near),
            ),
            measure("6.exhaustion.boundary_ray", lambda: exhaustion_ray_check(artifact)),
        ]
    if 7 in selected:
        checks.append(
            measure(
                "7.sup_attainment",
                lambda: attainment_check(artifact, make_rng(config.seed, 7), sizes.near),
            )
        )
    if 8 in selected:
        h = config["numeric.levi_step"]
        checks.append(
            measure(
                "8.levi_floor",
                lambda: levi_floor_check(artifact, make_rng(config.seed, 8), sizes.near, h),
            )
        )
    return checks


def order_field(quartic: bool) -> ScalarField:
    """|z|^2 + Re z1^3 on C^2, plus |z1|^4 when `quartic`."""

    def value(points: FloatArray) -> FloatArray:
        z1 = points[:, 0] + 1j * points[:, 1]
        out = np.sum(points * points, axis=1) + np.real(z1**3)
        if quartic:
            out = out + np.abs(z1) ** 4
        return np.asarray(out)

    label = "|z|^2 + Re z1^3" + (" + |z1|^4" if quartic else "")
    return ScalarField(value, everywhere, label, 2)


def levi_order() -> CheckRecord:
    """
    Central second differences reproduce |z|^2 + Re z1^3 exactly; adding
    |z1|^4 exposes the h^2 error, which drops by about 4 per halving.
    """
    point = np.array(ORDER_POINT)
    defect = float(np.max(np.abs(levi_form(order_field(False), point, 1e-3).hessian - np.eye(2))))
    z1 = complex(point[0], point[1])
    exact = 1.0 + 4.0 * abs(z1) ** 2
    quartic = order_field(True)
    errors = [abs(levi_form(quartic, point, h).hessian[0, 0] - exact) for h in ORDER_STEPS]
    ratios = [coarse / fine for coarse, fine in zip(errors, errors[1:])]
    in_band = all(4.0 / ORDER_FACTOR <= r <= 4.0 * ORDER_FACTOR for r in ratios)
    return CheckRecord(
        "8.levi_order",
        defect <= LEVI_EXACT_TOLERANCE and in_band,
        measured={"cubic_defect": defect, "errors": errors, "ratios": ratios},
        bound=budget(8, cubic_defect=LEVI_EXACT_TOLERANCE, ratio=4.0, factor=ORDER_FACTOR),
        inputs={"steps": ORDER_STEPS, "point": ORDER_POINT},
    )


def order_checks(config: ExperimentConfig) -> list[CheckRecord]:
    return [measure("8.levi_order", levi_order)]


# Orchestration


type TaskFn = Callable[[ExperimentConfig, frozenset[int]], list[CheckRecord]]


@dataclass(frozen=True)
class Task:
    criteria: frozenset[int]
    run: TaskFn


def _simple(fn: Callable[[ExperimentConfig], list[CheckRecord]]) -> TaskFn:
    return lambda config, selected: fn(config)


# Expensive tasks first so the pool is not left waiting on them.
TASKS = (
    Task(frozenset({6, 7, 8}), exhaustion_checks),
    Task(frozenset({5}), _simple(approximant_checks)),
    Task(frozenset({3}), _simple(translation_checks)),
    Task(frozenset({4}), _simple(segment_checks)),
    Task(frozenset({8}), _simple(order_checks)),
    Task(frozenset({1}), _simple(lambert_checks)),
    Task(frozenset({2}), _simple(omega_checks)),
)


def selected_criteria(config: ExperimentConfig) -> frozenset[int]:
    return frozenset(config["acceptance.only"] or ACCEPTANCE_CRITERIA)


def run_criteria(
    config: ExperimentConfig, selected: frozenset[int]
) -> tuple[CheckRecord, ...]:
    tasks = [task for task in TASKS if task.criteria & selected]
    groups = ordered_map(lambda task: task.run(config, selected), tasks)
    return merge_checks(groups)


def digest(checks: Sequence[CheckRecord]) -> str:
    text = dump_json([check.as_record() for check in checks])
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def determinism_check(
    config: ExperimentConfig, selected: frozenset[int], first: Sequence[CheckRecord]
) -> CheckRecord:
    """Rerun the selected criteria (1 and 2 when none are) and compare report bytes."""
    if not selected:
        selected = frozenset({1, 2})
        first = run_criteria(config, selected)
    second = run_criteria(config, selected)
    first_digest, second_digest = digest(first), digest(second)
    return CheckRecord(
        "9.determinism",
        first_digest == second_digest,
        measured={"first": first_digest, "second": second_digest, "checks": len(second)},
        bound=budget(9),
        inputs={"criteria": sorted(selected)},
    )


def run_acceptance(config: ExperimentConfig) -> tuple[CheckRecord, ...]:
    selected = selected_criteria(config)
    logger.info("Acceptance run: criteria %s, reduced=%s", sorted(selected), config.reduced)
    checks = run_criteria(config, selected - {9})
    if 9 in selected:
        rest = selected - {9}
        checks = merge_checks(
            [checks, [measure("9.determinism", lambda: determinism_check(config, rest, checks))]]
        )
    failed = [check.name for check in checks if not check.verdict]
    if failed:
        logger.warning("Acceptance: %d of %d checks fail", len(failed), len(checks))
    else:
        logger.info("Acceptance: all %d checks pass", len(checks))
    return checks
