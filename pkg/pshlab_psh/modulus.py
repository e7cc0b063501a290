"""
Empirical modulus of continuity.

Pairs (p, q) are drawn with p uniform in the domain and q = p + t u with
t log-uniform between 1e-5 and 1 times the diameter. Half the offsets are
along coordinate axes, which gives near-collinear pairs for fields like
Re z1. The envelope omega(r) is the running maximum of |u(p) - u(q)| over
pairs sorted by |p - q|, so it is non-decreasing by construction.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from pshlab_domains.geometry import BoundedDomain, FloatArray, sample_interior
from pshlab_psh.exceptions import PshError
from pshlab_psh.fields import ScalarField

logger = logging.getLogger(__name__)

MIN_PAIRS = 1000


@dataclass(frozen=True, eq=False)
class ModulusTable:
    label: str
    distances: FloatArray
    envelope: FloatArray

    def at(self, r: npt.ArrayLike) -> FloatArray:
        """omega(r): largest sampled oscillation over pairs at most r apart."""
        idx = np.searchsorted(self.distances, np.asarray(r, dtype=float), side="right") - 1
        safe = np.clip(idx, 0, max(self.distances.size - 1, 0))
        values = self.envelope[safe] if self.envelope.size else np.zeros_like(safe, dtype=float)
        return np.where(idx >= 0, values, 0.0)

    def __call__(self, r: float) -> float:
        return float(self.at(r))

    def rows(self, count: int = 32) -> list[tuple[float, float]]:
        """(r, omega(r)) on a log grid spanning the sampled distances."""
        if self.distances.size == 0:
            return []
        grid = np.geomspace(self.distances[0], self.distances[-1], count)
        return [(float(r), float(w)) for r, w in zip(grid, self.at(grid))]


def modulus_of_continuity(
    u: ScalarField,
    domain: BoundedDomain,
    pair_samples: int,
    rng: np.random.Generator | None = None,
) -> ModulusTable:
    if pair_samples < MIN_PAIRS:
        raise PshError(f"pair_samples must be at least {MIN_PAIRS}, got {pair_samples}")
    rng = rng if rng is not None else np.random.default_rng(0)
    dim = domain.real_dimension
    diam = domain.diameter

    first_parts: list[FloatArray] = []
    second_parts: list[FloatArray] = []
    kept = 0
    for _ in range(100):
        p = sample_interior(domain, pair_samples, rng)
        t = diam * 10.0 ** rng.uniform(-5.0, 0.0, pair_samples)
        g = rng.standard_normal((pair_samples, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        axial = np.zeros((pair_samples, dim))
        axial[np.arange(pair_samples), rng.integers(0, dim, pair_samples)] = rng.choice(
            [-1.0, 1.0], pair_samples
        )
        use_axis = rng.random(pair_samples) < 0.5
        q = p + t[:, None] * np.where(use_axis[:, None], axial, g)
        ok = domain.contains(q) & u.inside(p) & u.inside(q)
        first_parts.append(p[ok])
        second_parts.append(q[ok])
        kept += int(ok.sum())
        if kept >= pair_samples:
            break
    first = np.concatenate(first_parts)[:pair_samples]
    second = np.concatenate(second_parts)[:pair_samples]

    diff = np.abs(u.evaluate(first) - u.evaluate(second))
    dist = np.linalg.norm(first - second, axis=1)
    order = np.argsort(dist)
    table = ModulusTable(u.label, dist[order], np.maximum.accumulate(diff[order]))
    logger.debug("Modulus of %s from %d pairs", u.label, dist.size)
    return table
