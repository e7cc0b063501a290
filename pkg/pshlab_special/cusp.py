"""
The Log-Lipschitz cusp profile

    g(x) = 1 + |x| * W0(1 / |x|),    g(0) = 1.

x * W0(1/x) behaves like x log(1/x) near 0, so the profile is Hoelder for
every exponent below 1 but not Lipschitz at the tip.
"""

import numpy as np
import numpy.typing as npt

from pshlab_special.lambert import LambertBranch, lambert_w_array


def cusp_offset_array(x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """|x| * W0(1/|x|), the profile minus its tip value, with 0 at x = 0."""
    s = np.abs(np.asarray(x, dtype=float))
    out = np.zeros_like(s)
    positive = s > 0.0
    if positive.any():
        sp = s[positive]
        out[positive] = sp * lambert_w_array(LambertBranch.PRINCIPAL, 1.0 / sp)
    return out


def cusp_profile_array(x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    return 1.0 + cusp_offset_array(x)


def cusp_profile(x: float) -> float:
    return float(cusp_profile_array(x).reshape(-1)[0])
