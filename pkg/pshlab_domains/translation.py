"""
Translation estimate on one patch:

    delta(z) + f(eps) <= delta(z + eps * w_j) <= delta(z) + eps

for z in the domain near x_j. The constants in f are generic, so the
lower bound is reported as the largest rescaling kappa of f that holds
on the samples. A sample whose distance does not grow at all is a lower
violation, since no positive rescaling covers it; one that grows by more
than eps is an upper violation. The estimate holds when there are no
violations of either kind.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from django.conf import settings

from pshlab_domains.distance import distances
from pshlab_domains.exceptions import GeometryError
from pshlab_domains.geometry import BoundedDomain, FloatArray, as_points
from pshlab_special.gain import GainFunction, gain_array

logger = logging.getLogger(__name__)

UPPER_TOLERANCE = 1e-9

DistanceFn = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class TranslationViolation:
    kind: str
    point: tuple[float, ...]
    eps: float
    delta: float
    delta_translated: float
    bound: float

    def as_record(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "point": self.point,
            "eps": self.eps,
            "delta": self.delta,
            "delta_translated": self.delta_translated,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class TranslationReport:
    domain: str
    patch_index: int
    holds: bool
    fitted_constant: float
    upper_defect: float
    samples: int
    violations: tuple[TranslationViolation, ...] = field(default_factory=tuple)
    # (eps, min over z of the gain delta(z + eps w) - delta(z)) per eps.
    gain_rows: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def as_record(self) -> dict[str, Any]:
        return {
            "op": "translation_check",
            "inputs": {
                "domain": self.domain,
                "patch_index": self.patch_index,
                "samples": self.samples,
            },
            "verdict": self.holds,
            "fitted_constants": {"c_fit": self.fitted_constant},
            "measured": {"upper_defect": self.upper_defect, "gain_rows": self.gain_rows},
            "violations": [v.as_record() for v in self.violations],
        }


def sample_patch_points(
    domain: BoundedDomain,
    patch_index: int,
    count: int,
    rng: np.random.Generator,
    c: float | None = None,
) -> FloatArray:
    """Uniform points of the domain inside B(x_j, r_j / c)."""
    c = settings.PSHLAB_SEGMENT_C if c is None else c
    patch = domain.atlas[patch_index]
    radius = patch.radius / c
    dim = domain.real_dimension
    accepted: list[FloatArray] = []
    total = 0
    for _ in range(1000):
        g = rng.standard_normal((4 * count, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        batch = patch.center + g * radius * rng.uniform(0.0, 1.0, (4 * count, 1)) ** (1.0 / dim)
        inside = batch[domain.contains(batch)]
        accepted.append(inside)
        total += inside.shape[0]
        if total >= count:
            break
    else:
        raise GeometryError(f"Could not sample {count} domain points near patch {patch_index}")
    return np.concatenate(accepted)[:count]


def default_eps_grid(domain: BoundedDomain, count: int = 20) -> FloatArray:
    """Log-spaced eps in (0, eps1)."""
    upper = 0.9 * domain.eps1
    return np.geomspace(upper * 1e-5, upper, count)


def check_translation_estimate(
    domain: BoundedDomain,
    patch_index: int,
    sample_points: Sequence[Sequence[float]] | FloatArray,
    eps_grid: Sequence[float] | FloatArray,
    *,
    gain_fn: GainFunction | None = None,
    distance_fn: DistanceFn | None = None,
    c: float | None = None,
) -> TranslationReport:
    """
    `distance_fn` replaces the built-in distance (the brute-force oracle is
    the usual substitute); `gain_fn` overrides the patch gain.
    """
    c = settings.PSHLAB_SEGMENT_C if c is None else c
    patch = domain.atlas[patch_index]
    points = as_points(sample_points, domain.real_dimension)
    eps = np.asarray(eps_grid, dtype=float)
    if eps.size == 0 or eps.min() <= 0.0 or eps.max() >= domain.eps1:
        raise GeometryError(f"eps grid must lie in (0, {domain.eps1})")
    far = np.linalg.norm(points - patch.center, axis=1) >= patch.radius / c
    if far.any():
        raise GeometryError(
            f"{int(far.sum())} sample point(s) lie outside B(x_j, r_j/{c}) for patch {patch_index}"
        )
    measure = distance_fn if distance_fn is not None else (lambda p: distances(domain, p))
    f = gain_fn if gain_fn is not None else patch.regularity.gain()

    dim = domain.real_dimension
    base = measure(points)
    moved = points[:, None, :] + eps[None, :, None] * patch.direction
    shifted = measure(moved.reshape(-1, dim)).reshape(points.shape[0], eps.size)
    f_eps = gain_array(f, eps)

    increase = shifted - base[:, None]
    kappa = float(np.min(increase / f_eps[None, :]))
    upper_excess = increase - eps[None, :]
    upper_defect = float(np.max(upper_excess))

    violations: list[TranslationViolation] = []
    for a, k in zip(*np.nonzero(upper_excess > UPPER_TOLERANCE)):
        violations.append(
            TranslationViolation(
                "upper",
                tuple(float(v) for v in points[a]),
                float(eps[k]),
                float(base[a]),
                float(shifted[a, k]),
                float(base[a] + eps[k]),
            )
        )
    for a, k in zip(*np.nonzero(increase <= 0.0)):
        violations.append(
            TranslationViolation(
                "lower",
                tuple(float(v) for v in points[a]),
                float(eps[k]),
                float(base[a]),
                float(shifted[a, k]),
                float(base[a]),
            )
        )
    holds = not violations and kappa > 0.0 and math.isfinite(kappa)
    rows = tuple((float(e), float(np.min(increase[:, k]))) for k, e in enumerate(eps))
    logger.info(
        "Translation check on %s patch %d: kappa=%.6g, upper defect %.3g",
        domain.name,
        patch_index,
        kappa,
        upper_defect,
    )
    return TranslationReport(
        domain=domain.name,
        patch_index=patch_index,
        holds=holds,
        fitted_constant=kappa,
        upper_defect=upper_defect,
        samples=int(increase.size),
        violations=tuple(violations),
        gain_rows=rows,
    )
