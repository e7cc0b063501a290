import logging

import numpy as np

from pshlab_special.cusp import cusp_profile_array
from pshlab_special.gain import GainFunction, gain, omega_ratio

logger = logging.getLogger(__name__)

GAIN_TABLE_HEADER = ("eps", "f_eps", "omega_eps")
CUSP_TABLE_HEADER = ("x", "cusp_profile")

_CUSP_POINTS = 2001
_CUSP_HALF_WIDTH = 0.5


def default_eps_values(f: GainFunction, decades: int = 10) -> list[float]:
    """eps = 10^-k for k = 1..decades, clipped to the gain's validity interval."""
    top = min(f.upper, 0.5)
    values = [10.0**-k for k in range(1, decades + 1)]
    return [eps for eps in values if eps <= top]


def gain_table(
    f: GainFunction, eps_values: list[float] | None = None
) -> list[tuple[float, float, float]]:
    """Rows of (eps, f(eps), omega(eps)) for plotting."""
    if eps_values is None:
        eps_values = default_eps_values(f)
    rows = [(eps, gain(f, eps), omega_ratio(f, eps)) for eps in eps_values]
    logger.debug("Built %d-row gain table for %s", len(rows), f.form)
    return rows


def cusp_table(
    points: int = _CUSP_POINTS, half_width: float = _CUSP_HALF_WIDTH
) -> list[tuple[float, float]]:
    """(x, cusp_profile(x)) on a uniform grid of [-half_width, half_width]."""
    xs = np.linspace(-half_width, half_width, points)
    ys = cusp_profile_array(xs)
    return [(float(x), float(y)) for x, y in zip(xs, ys, strict=True)]
