"""
Scalar fields on regions of C^n.

Points are real arrays of shape (m, 2n) with z_k = x_{2k} + i x_{2k+1}.
Values are extended reals: -inf is allowed, +inf and NaN are not.
"""

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from pshlab_domains.geometry import BoolArray, BoundedDomain, FloatArray, as_points
from pshlab_psh.exceptions import PshError, RegionViolation

logger = logging.getLogger(__name__)

FieldFn = Callable[[FloatArray], FloatArray]
RegionFn = Callable[[FloatArray], BoolArray]


def everywhere(points: FloatArray) -> BoolArray:
    return np.ones(points.shape[0], dtype=bool)


@dataclass(frozen=True, eq=False)
class ScalarField:
    eval_fn: FieldFn
    region: RegionFn
    label: str
    dimension: int

    @property
    def real_dimension(self) -> int:
        return 2 * self.dimension

    def inside(self, points: npt.ArrayLike) -> BoolArray:
        return np.asarray(self.region(as_points(points, self.real_dimension)), dtype=bool)

    def evaluate(self, points: npt.ArrayLike) -> FloatArray:
        pts = as_points(points, self.real_dimension)
        ok = np.asarray(self.region(pts), dtype=bool)
        if not ok.all():
            witness = pts[int(np.argmin(ok))]
            raise RegionViolation(
                f"{self.label}: {int((~ok).sum())} point(s) outside the definition region,"
                f" e.g. {witness.tolist()}",
                witness,
            )
        return np.asarray(self.eval_fn(pts), dtype=float)

    def __call__(self, points: npt.ArrayLike) -> FloatArray:
        return self.evaluate(points)

    def translate(self, offset: FloatArray, label: str | None = None) -> "ScalarField":
        """z -> u(z + offset), defined where z + offset is in the region."""
        shift = np.asarray(offset, dtype=float)
        return ScalarField(
            lambda p: self.eval_fn(p + shift),
            lambda p: self.region(p + shift),
            label or f"{self.label}(z+{shift.tolist()})",
            self.dimension,
        )

    def restrict(self, region: RegionFn, label: str | None = None) -> "ScalarField":
        return ScalarField(
            self.eval_fn,
            lambda p: self.region(p) & region(p),
            label or self.label,
            self.dimension,
        )


def field_max(fields: Sequence[ScalarField], label: str) -> ScalarField:
    """
    Pointwise max, each member taken only on its own region.

    The region is the union; -inf is the identity, so a point covered by
    no member would be -inf, and such points are outside the union anyway.
    """
    if not fields:
        raise PshError("field_max needs at least one field")
    dimension = fields[0].dimension

    def region(points: FloatArray) -> BoolArray:
        out = np.zeros(points.shape[0], dtype=bool)
        for f in fields:
            out |= f.region(points)
        return out

    def value(points: FloatArray) -> FloatArray:
        out = np.full(points.shape[0], -np.inf)
        for f in fields:
            mask = np.asarray(f.region(points), dtype=bool)
            if mask.any():
                out[mask] = np.maximum(out[mask], f.eval_fn(points[mask]))
        return out

    return ScalarField(value, region, label, dimension)


def _complex(points: FloatArray) -> npt.NDArray[np.complex128]:
    return points[:, 0::2] + 1j * points[:, 1::2]


class FieldName(StrEnum):
    CONSTANT = "constant"
    RE_Z1 = "re_z1"
    ABS_SQ = "abs_sq"
    NEG_ABS_SQ = "neg_abs_sq"
    LOG_ABS_Z1 = "log_abs_z1"
    NEG_LOG_DELTA = "neg_log_delta"


def constant_field(dimension: int, value: float = 1.0) -> ScalarField:
    return ScalarField(
        lambda p: np.full(p.shape[0], float(value)), everywhere, f"constant({value})", dimension
    )


def re_z1_field(dimension: int) -> ScalarField:
    return ScalarField(lambda p: p[:, 0].copy(), everywhere, "Re z1", dimension)


def abs_sq_field(dimension: int, sign: float = 1.0) -> ScalarField:
    label = "|z|^2" if sign > 0 else "-|z|^2"
    return ScalarField(lambda p: sign * np.sum(p * p, axis=1), everywhere, label, dimension)


def log_abs_z1_field(dimension: int) -> ScalarField:
    def value(points: FloatArray) -> FloatArray:
        modulus = np.abs(_complex(points)[:, 0])
        with np.errstate(divide="ignore"):
            return np.log(modulus)

    return ScalarField(value, everywhere, "log|z1|", dimension)


def neg_log_delta_field(domain: BoundedDomain) -> ScalarField:
    """-log delta, plurisubharmonic on pseudoconvex domains."""
    return ScalarField(
        lambda p: -np.log(domain.distance(p)),
        domain.contains,
        f"-log delta[{domain.name}]",
        domain.dimension,
    )


def build_field(
    name: str, domain: BoundedDomain, params: Mapping[str, float] | None = None
) -> ScalarField:
    """Look a test field up by label; fields addressable from the command line."""
    params = dict(params or {})
    try:
        key = FieldName(name)
    except ValueError as exc:
        raise PshError(
            f"Unknown field {name!r}; expected one of {', '.join(FieldName)}"
        ) from exc
    n = domain.dimension
    match key:
        case FieldName.CONSTANT:
            return constant_field(n, params.get("value", 1.0))
        case FieldName.RE_Z1:
            return re_z1_field(n)
        case FieldName.ABS_SQ:
            return abs_sq_field(n)
        case FieldName.NEG_ABS_SQ:
            return abs_sq_field(n, -1.0)
        case FieldName.LOG_ABS_Z1:
            return log_abs_z1_field(n)
        case FieldName.NEG_LOG_DELTA:
            return neg_log_delta_field(domain)
    raise PshError(f"No builder for field {name!r}")
