"""
Named catalog of test domains.

Every entry is addressed by name plus a flat parameter mapping, e.g.
build_domain("cone", {"C": 3.0}). Epigraph domains are the region above a
radial profile g(|x'|) inside the ball B(R e_2n, R), so the tip of the
profile sits at the origin, on the sphere.
"""

import functools
import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import StrEnum
from typing import Any

import numpy as np
from django.conf import settings
from scipy import optimize

from pshlab.util import make_rng
from pshlab_domains.atlas import GRAPH_REACH, AtlasPlan, build_atlas
from pshlab_domains.exceptions import GeometryError, UnknownDomain
from pshlab_domains.geometry import (
    BallConstraint,
    BoundedDomain,
    CuspProfile,
    DiscFactorConstraint,
    EpigraphConstraint,
    OrderConstraint,
    PowerProfile,
    RadialProfile,
)
from pshlab_domains.regularity import (
    RegularitySpec,
    hoelder_spec,
    lipschitz_spec,
    loglip_spec,
)

logger = logging.getLogger(__name__)


class CatalogName(StrEnum):
    UNIT_BALL = "unit_ball"
    POLYDISC = "polydisc"
    CONE = "cone"
    HOELDER_CUSP = "hoelder_cusp"
    LOGLIP_CUSP = "loglip_cusp"
    HARTOGS = "hartogs"


@dataclass(frozen=True)
class DomainCatalogEntry:
    name: CatalogName
    builder: Callable[..., BoundedDomain]
    defaults: Mapping[str, float]
    description: str


def _boundary_samples(n: int) -> int:
    # Enough ray samples that a fresh sample is within r of a center.
    return 2 ** (12 + 5 * (n - 1))


def _check_patch_radius(patch_radius: float, max_reach: float) -> None:
    if not 0.0 < GRAPH_REACH * patch_radius < max_reach:
        raise GeometryError(
            f"patch_radius={patch_radius} puts the graph reach past {max_reach}"
        )


def ridge_radius(profile: RadialProfile, R: float) -> float:
    """Horizontal radius where the profile meets the sphere |x - R e_d| = R."""

    def excess(s: float) -> float:
        g = float(profile(np.array([s]))[0])
        return s * s + (g - R) ** 2 - R * R

    return float(optimize.brentq(excess, 1e-9 * R, 2.0 * R, xtol=1e-14))


def unit_ball(
    rng: np.random.Generator,
    *,
    n: int = 1,
    radius: float = 1.0,
    patch_radius: float = 0.2,
) -> BoundedDomain:
    n = int(n)
    _check_patch_radius(patch_radius, radius)
    origin = (0.0,) * (2 * n)
    base = BoundedDomain(
        name=CatalogName.UNIT_BALL,
        dimension=n,
        constraints=(BallConstraint(origin, radius),),
        diameter=2.0 * radius,
        anchor=origin,
        lower=(-radius,) * (2 * n),
        upper=(radius,) * (2 * n),
        params={"n": n, "radius": radius, "patch_radius": patch_radius},
    )
    return build_atlas(base, AtlasPlan(patch_radius, _boundary_samples(n)), rng)


def polydisc(
    rng: np.random.Generator, *, n: int = 2, patch_radius: float = 0.24
) -> BoundedDomain:
    n = int(n)
    # Lines through B'(0, reach) must hit the inscribed unit ball.
    _check_patch_radius(patch_radius, 1.0)
    origin = (0.0,) * (2 * n)
    base = BoundedDomain(
        name=CatalogName.POLYDISC,
        dimension=n,
        constraints=tuple(DiscFactorConstraint(k) for k in range(n)),
        diameter=2.0 * math.sqrt(n),
        anchor=origin,
        lower=(-1.0,) * (2 * n),
        upper=(1.0,) * (2 * n),
        params={"n": n, "patch_radius": patch_radius},
    )
    return build_atlas(base, AtlasPlan(patch_radius, _boundary_samples(n)), rng)


def _epigraph_domain(
    name: CatalogName,
    profile: RadialProfile,
    regularity: RegularitySpec,
    rng: np.random.Generator,
    patch_radius: float,
    params: dict[str, Any],
    n: int = 1,
    R: float = 1.0,
) -> BoundedDomain:
    """
    The region above `profile` inside B(R e_2n, R) in C^n: the graph axis is
    the last real coordinate and |x'| runs over the other 2n - 1.
    """
    n = int(n)
    if n < 1:
        raise GeometryError(f"{name} needs n >= 1, got {n}")
    _check_patch_radius(patch_radius, 0.6 * R)
    axis = 2 * n - 1
    center = (0.0,) * axis + (R,)
    base = BoundedDomain(
        name=name,
        dimension=n,
        constraints=(BallConstraint(center, R), EpigraphConstraint(profile, axis=axis)),
        diameter=2.0 * R,
        anchor=center,
        lower=(-R,) * axis + (0.0,),
        upper=(R,) * axis + (2.0 * R,),
        params={**params, "n": n, "patch_radius": patch_radius},
    )
    reach = ridge_radius(profile, R)
    logger.debug("%s ridge at horizontal radius %.6f", name, reach)
    plan = AtlasPlan(
        patch_radius,
        _boundary_samples(n),
        epigraph_regularity=regularity,
        epigraph_reach=reach,
        seeds=((0.0,) * (2 * n),),
    )
    return build_atlas(base, plan, rng)


def cone(
    rng: np.random.Generator, *, C: float = 2.0, n: int = 1, patch_radius: float = 0.12
) -> BoundedDomain:
    return _epigraph_domain(
        CatalogName.CONE,
        PowerProfile(C),
        lipschitz_spec(C),
        rng,
        patch_radius,
        {"C": C},
        n,
    )


def hoelder_cusp(
    rng: np.random.Generator,
    *,
    gamma: float = 0.5,
    C: float = 1.0,
    n: int = 1,
    patch_radius: float = 0.12,
) -> BoundedDomain:
    return _epigraph_domain(
        CatalogName.HOELDER_CUSP,
        PowerProfile(C, gamma),
        hoelder_spec(gamma, C),
        rng,
        patch_radius,
        {"gamma": gamma, "C": C},
        n,
    )


def loglip_cusp(
    rng: np.random.Generator,
    *,
    C_tilde: float = 1.0,
    n: int = 1,
    patch_radius: float = 0.12,
) -> BoundedDomain:
    # s * W0(1/s) <= s * max(log(1/s), 1), so the profile norm is 1.
    return _epigraph_domain(
        CatalogName.LOGLIP_CUSP,
        CuspProfile(),
        loglip_spec(1.0, C_tilde),
        rng,
        patch_radius,
        {"C_tilde": C_tilde},
        n,
    )


def hartogs(rng: np.random.Generator) -> BoundedDomain:
    """
    {|z1| < |z2| < 1}. There is no graph atlas at the origin, so the domain
    is built in probe mode: membership and distance only.
    """
    return BoundedDomain(
        name=CatalogName.HARTOGS,
        dimension=2,
        constraints=(OrderConstraint(0, 1), DiscFactorConstraint(1)),
        diameter=2.0 * math.sqrt(2.0),
        anchor=(0.0, 0.0, 0.5, 0.0),
        lower=(-1.0,) * 4,
        upper=(1.0,) * 4,
        probe_mode=True,
    )


CATALOG: dict[CatalogName, DomainCatalogEntry] = {
    entry.name: entry
    for entry in (
        DomainCatalogEntry(
            CatalogName.UNIT_BALL,
            unit_ball,
            {"n": 1, "radius": 1.0, "patch_radius": 0.2},
            "Euclidean ball in C^n",
        ),
        DomainCatalogEntry(
            CatalogName.POLYDISC,
            polydisc,
            {"n": 2, "patch_radius": 0.24},
            "Unit polydisc in C^n",
        ),
        DomainCatalogEntry(
            CatalogName.CONE,
            cone,
            {"C": 2.0, "n": 1, "patch_radius": 0.12},
            "Lipschitz cone C|x'| capped by a ball",
        ),
        DomainCatalogEntry(
            CatalogName.HOELDER_CUSP,
            hoelder_cusp,
            {"gamma": 0.5, "C": 1.0, "n": 1, "patch_radius": 0.12},
            "Hoelder cusp C|x'|^gamma capped by a ball",
        ),
        DomainCatalogEntry(
            CatalogName.LOGLIP_CUSP,
            loglip_cusp,
            {"C_tilde": 1.0, "n": 1, "patch_radius": 0.12},
            "Log-Lipschitz cusp |x'| W0(1/|x'|) capped by a ball",
        ),
        DomainCatalogEntry(
            CatalogName.HARTOGS,
            hartogs,
            {},
            "Hartogs triangle, probe mode",
        ),
    )
}


@functools.cache
def _build(name: CatalogName, params: tuple[tuple[str, float], ...], seed: int) -> BoundedDomain:
    entry = CATALOG[name]
    return entry.builder(make_rng(seed), **dict(params))


def build_domain(
    name: str, params: Mapping[str, float] | None = None, seed: int | None = None
) -> BoundedDomain:
    """
    Build a catalog domain by name.

    Domains are immutable, so identical (name, params, seed) requests share
    one instance.
    """
    try:
        key = CatalogName(name)
    except ValueError as exc:
        raise UnknownDomain(
            f"Unknown domain {name!r}; expected one of {', '.join(CatalogName)}"
        ) from exc
    entry = CATALOG[key]
    params = dict(params or {})
    unknown = sorted(set(params) - set(entry.defaults))
    if unknown:
        raise GeometryError(f"Unknown parameter(s) for {name}: {', '.join(unknown)}")
    if seed is None:
        seed = settings.PSHLAB_DEFAULT_SEED
    return _build(key, tuple(sorted(params.items())), seed)
