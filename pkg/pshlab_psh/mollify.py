"""
Convolution with a smooth radial kernel.

The kernel exp(-1 / (1 - |y|^2)) on the unit ball is discretised once per
(dimension, node count) by scrambled Sobol points mapped into the ball,
each paired with its negative. The pairing makes the rule exact for
affine functions; the kernel constant c_kernel = sum w |y|^2 makes it
exact for |z|^2:

    mollify(|z|^2, r)(p) = |p|^2 + c_kernel r^2.
"""

import functools
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy import stats
from scipy.stats import qmc

from pshlab_domains.geometry import BoolArray, FloatArray
from pshlab_psh.exceptions import PshError
from pshlab_psh.fields import ScalarField

logger = logging.getLogger(__name__)

_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class KernelNodes:
    points: FloatArray
    weights: FloatArray

    @property
    def c_kernel(self) -> float:
        return float(np.sum(self.weights * np.sum(self.points * self.points, axis=1)))


@functools.cache
def kernel_nodes(dim: int, nodes_log2: int, seed: int) -> KernelNodes:
    """2**nodes_log2 weighted nodes of the unit ball in R^dim, symmetric under y -> -y."""
    if nodes_log2 < 2:
        raise PshError("the mollifier needs at least 4 nodes")
    sobol = qmc.Sobol(dim + 1, scramble=True, rng=np.random.default_rng(seed))
    u = np.clip(sobol.random_base2(nodes_log2 - 1), 1e-12, 1.0 - 1e-12)
    g = stats.norm.ppf(u[:, :dim])
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rho = u[:, dim] ** (1.0 / dim)
    half = g * rho[:, None]
    points = np.vstack([half, -half])
    rho_all = np.concatenate([rho, rho])
    weights = np.exp(-1.0 / (1.0 - rho_all * rho_all))
    weights /= weights.sum()
    return KernelNodes(points, weights)


def mollify(u: ScalarField, radius: float, nodes_log2: int | None = None) -> ScalarField:
    """
    u * kernel_radius as a new field.

    The result is defined where every node p + radius * y lies in the
    region of u, which is the region shrunk by (at most) radius.
    """
    if radius <= 0.0:
        raise PshError(f"mollifier radius must be positive, got {radius}")
    log2 = settings.PSHLAB_MOLLIFIER_NODES_LOG2 if nodes_log2 is None else nodes_log2
    kernel = kernel_nodes(u.real_dimension, log2, settings.PSHLAB_DEFAULT_SEED)
    offsets = radius * kernel.points
    count = offsets.shape[0]
    rows = max(1, _CHUNK // count)

    def region(points: FloatArray) -> BoolArray:
        out = np.empty(points.shape[0], dtype=bool)
        for start in range(0, points.shape[0], rows):
            p = points[start : start + rows]
            cloud = (p[:, None, :] + offsets[None, :, :]).reshape(-1, p.shape[1])
            inside = np.asarray(u.region(cloud)).reshape(p.shape[0], count)
            out[start : start + rows] = inside.all(axis=1)
        return out

    def value(points: FloatArray) -> FloatArray:
        out = np.empty(points.shape[0])
        for start in range(0, points.shape[0], rows):
            p = points[start : start + rows]
            cloud = (p[:, None, :] + offsets[None, :, :]).reshape(-1, p.shape[1])
            samples = np.asarray(u.eval_fn(cloud)).reshape(p.shape[0], count)
            out[start : start + rows] = samples @ kernel.weights
        return out

    logger.debug("Mollifying %s at radius %.3g with %d nodes", u.label, radius, count)
    return ScalarField(value, region, f"{u.label}*k[{radius:.3g}]", u.dimension)


def kernel_constant(dim: int, nodes_log2: int | None = None) -> float:
    log2 = settings.PSHLAB_MOLLIFIER_NODES_LOG2 if nodes_log2 is None else nodes_log2
    return kernel_nodes(dim, log2, settings.PSHLAB_DEFAULT_SEED).c_kernel
