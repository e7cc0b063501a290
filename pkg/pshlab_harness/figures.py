"""
Plot data for the three figures: the cusp profile, the exhaustion sandwich
along an inward ray, and the approximation error as nu is halved. Only
the CSV series are produced; plotting is left to the reader's tools.
"""

import logging

import numpy as np

from pshlab.util import make_rng
from pshlab_domains.cover import build_cover
from pshlab_exhaustion.checks import ray_point
from pshlab_harness.config import ExperimentConfig, FigureName, parse_config
from pshlab_harness.operations import config_domain, config_exhaustion
from pshlab_harness.reports import CheckRecord, Series
from pshlab_mergelyan.approximant import build_approximant, check_approximant
from pshlab_psh.fields import build_field
from pshlab_psh.modulus import modulus_of_continuity
from pshlab_special.tables import CUSP_TABLE_HEADER, cusp_table

logger = logging.getLogger(__name__)

PROFILE_HEADER = ("delta", "lower", "w", "upper")
ERROR_HEADER = ("nu", "sup_error", "bound")
PROFILE_EXPONENTS = range(3, 21)
HALVINGS = 5
# The coarsest nu is this multiple of numeric.nu, capped below eps_w / 2.
NU_SPAN = 2.0 ** (HALVINGS - 1)


def exhaustion_profile(config: ExperimentConfig) -> Series:
    """(delta, lower, w, upper) at delta = 2^-k along the inward normal of a patch."""
    artifact = config_exhaustion(config, make_rng(config.seed))
    domain = artifact.domain
    patch = int(config["numeric.patch"])
    rows = []
    for k in PROFILE_EXPONENTS:
        target = 2.0**-k
        if target >= artifact.config.eps0:
            continue
        point = ray_point(artifact, patch, target)[None, :]
        delta = domain.distance(point)
        rows.append(
            (
                float(delta[0]),
                float(artifact.lower_bound(delta)[0]),
                float(artifact.w(point)[0]),
                float(artifact.upper_bound(delta)[0]),
            )
        )
    return Series(FigureName.EXHAUSTION_PROFILE.value, PROFILE_HEADER, tuple(rows))


def error_vs_nu(config: ExperimentConfig) -> Series:
    """
    (nu, sup |v - phi|, omega(nu)(1 + C diam)) for nu halved HALVINGS - 1
    times. Cover and modulus are shared by every nu, so the bound column
    follows the monotone modulus.
    """
    rng = make_rng(config.seed)
    domain = config_domain(config)
    phi = build_field(config["field.name"], domain, config.field_params)
    cover = build_cover(domain, rng)
    modulus = modulus_of_continuity(phi, domain, config["numeric.pair_samples"], rng)
    top = min(NU_SPAN * config["numeric.nu"], 0.45 * domain.core_margin)
    rows = []
    for k in range(HALVINGS):
        nu = top * 2.0**-k
        artifact = build_approximant(
            domain, phi, nu, cover=cover, modulus=modulus, rng=rng, psh_points=10
        )
        report = check_approximant(artifact, grid=config["numeric.grid"], rng=rng)
        rows.append((nu, report.sup_error, report.bound))
    return Series(FigureName.ERROR_VS_NU.value, ERROR_HEADER, tuple(rows))


def emit_figure_data(
    which: FigureName | str, config: ExperimentConfig | None = None
) -> Series:
    config = parse_config({}) if config is None else config
    match FigureName(which):
        case FigureName.CUSP_FIG1:
            series = Series(FigureName.CUSP_FIG1.value, CUSP_TABLE_HEADER, tuple(cusp_table()))
        case FigureName.EXHAUSTION_PROFILE:
            series = exhaustion_profile(config)
        case FigureName.ERROR_VS_NU:
            series = error_vs_nu(config)
    logger.info("Figure data %s: %d rows", series.name, len(series.rows))
    return series


def figure_check(series: Series) -> CheckRecord:
    """Shape checks on emitted figure data."""
    if not series.rows:
        return CheckRecord(f"figure.{series.name}", False, measured={"rows": 0})
    rows = np.array(series.rows, dtype=float).reshape(len(series.rows), -1)
    measured: dict[str, object] = {"rows": len(series.rows)}
    verdict = bool(np.all(np.isfinite(rows)))
    match series.name:
        case FigureName.CUSP_FIG1:
            verdict = verdict and bool(np.all(rows[:, 1] >= 1.0))
        case FigureName.EXHAUSTION_PROFILE:
            sandwiched = (rows[:, 1] <= rows[:, 2] + 1e-12) & (rows[:, 2] <= rows[:, 3] + 1e-12)
            measured["sandwiched"] = int(np.sum(sandwiched))
            increasing = bool(np.all(np.diff(rows[:, 2]) >= -1e-12))
            verdict = verdict and bool(sandwiched.all()) and increasing
        case FigureName.ERROR_VS_NU:
            measured["bound_non_increasing"] = bool(np.all(np.diff(rows[:, 2]) <= 0.0))
            verdict = verdict and bool(measured["bound_non_increasing"])
    return CheckRecord(f"figure.{series.name}", verdict, measured=measured)
