"""The unit disc with a hand-made atlas, shared by the approximation tests."""

import math

import numpy as np

from pshlab_domains.atlas import orthonormal_frame
from pshlab_domains.catalog import build_domain
from pshlab_domains.geometry import BoundedDomain, GraphPatch
from pshlab_domains.regularity import lipschitz_spec


def _flat(local: np.ndarray) -> np.ndarray:
    return np.zeros(local.shape[0])


def six_patch_disc(radius: float = 0.6) -> BoundedDomain:
    """Six wide patches with inward directions; each B_k holds the whole disc."""
    patches = []
    for k in range(6):
        angle = 2.0 * math.pi * k / 6
        center = np.array([math.cos(angle), math.sin(angle)])
        frame = orthonormal_frame(-center)
        patches.append(GraphPatch(center, radius, frame, _flat, lipschitz_spec(1.0), f"p{k}"))
    return build_domain("unit_ball").with_atlas(tuple(patches))
