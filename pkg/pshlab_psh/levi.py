"""
Finite-difference complex Hessians.

For a complex vector v, the real second difference along v and along iv
average to the Levi form

    L(v) = (D2u(v, v) + D2u(iv, iv)) / 4 = sum_jk H_jk v_j conj(v_k),

with H_jk = d2u / dz_j dzbar_k. The diagonal is L(e_j); off the diagonal

    Re H_jk = (L(e_j + e_k) - L(e_j) - L(e_k)) / 2
    Im H_jk = (L(e_j + i e_k) - L(e_j) - L(e_k)) / 2.

Both H_jk and H_kj are computed, so the Hermitian defect of the raw
estimate is measured before symmetrising.
"""

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import linalg

from pshlab_domains.geometry import FloatArray, as_points
from pshlab_psh.circle import to_real
from pshlab_psh.exceptions import NonFinite, PshError
from pshlab_psh.fields import ScalarField

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class LeviReport:
    point: tuple[float, ...]
    hessian: ComplexMatrix
    min_eigenvalue: float
    step: float
    asymmetry: float

    def as_record(self) -> dict[str, Any]:
        return {
            "point": self.point,
            "hessian_real": self.hessian.real.tolist(),
            "hessian_imag": self.hessian.imag.tolist(),
            "min_eigenvalue": self.min_eigenvalue,
            "step": self.step,
            "asymmetry": self.asymmetry,
        }


def _stencil_directions(n: int) -> tuple[ComplexMatrix, dict[tuple[int, int, str], int]]:
    """Complex directions e_j, e_j + e_k and e_j + i e_k, with their row index."""
    rows: list[ComplexMatrix] = []
    index: dict[tuple[int, int, str], int] = {}
    eye = np.eye(n, dtype=complex)
    for j in range(n):
        index[(j, j, "d")] = len(rows)
        rows.append(eye[j])
    for j in range(n):
        for k in range(n):
            if j == k:
                continue
            if j < k:
                index[(j, k, "re")] = len(rows)
                rows.append(eye[j] + eye[k])
            index[(j, k, "im")] = len(rows)
            rows.append(eye[j] + 1j * eye[k])
    return np.array(rows), index


def stencil_points(points: FloatArray, step: float, dimension: int) -> FloatArray:
    """
    (m, 1 + k, 2n) stencil nodes: the center, then +v for every stencil
    direction v, then -v.
    """
    dirs, _ = _stencil_directions(dimension)
    both = np.concatenate([dirs, 1j * dirs])
    offsets = to_real(step * np.concatenate([both, -both]))
    return np.concatenate([points[:, None, :], points[:, None, :] + offsets[None, :, :]], axis=1)


def levi_forms(u: ScalarField, points: npt.ArrayLike, step: float) -> list[LeviReport]:
    """Levi reports for a batch of points; all stencils go through one evaluation."""
    if step <= 0.0:
        raise PshError(f"step must be positive, got {step}")
    n = u.dimension
    pts = as_points(points, u.real_dimension)
    dirs, index = _stencil_directions(n)
    both = np.concatenate([dirs, 1j * dirs])
    nodes = stencil_points(pts, step, n)
    values = u.evaluate(nodes.reshape(-1, u.real_dimension)).reshape(nodes.shape[:2])
    if not np.isfinite(values).all():
        bad = int(np.argmin(np.isfinite(values).all(axis=1)))
        raise NonFinite(
            f"{u.label}: non-finite value in the Levi stencil at {pts[bad].tolist()}", pts[bad]
        )

    half = both.shape[0]
    center = values[:, :1]
    plus = values[:, 1 : 1 + half]
    minus = values[:, 1 + half :]
    second = (plus + minus - 2.0 * center) / (step * step)
    count = dirs.shape[0]
    levi = 0.25 * (second[:, :count] + second[:, count:])

    reports: list[LeviReport] = []
    for row, point in zip(levi, pts):
        h = np.zeros((n, n), dtype=complex)
        for j in range(n):
            h[j, j] = row[index[(j, j, "d")]]
        for j in range(n):
            for k in range(n):
                if j == k:
                    continue
                diag = row[index[(j, j, "d")]] + row[index[(k, k, "d")]]
                real = 0.5 * (row[index[(min(j, k), max(j, k), "re")]] - diag)
                imag = 0.5 * (row[index[(j, k, "im")]] - diag)
                h[j, k] = real + 1j * imag
        asymmetry = float(np.max(np.abs(h - h.conj().T)))
        hermitian = 0.5 * (h + h.conj().T)
        eigenvalues = linalg.eigvalsh(hermitian)
        reports.append(
            LeviReport(
                tuple(float(v) for v in point),
                hermitian,
                float(eigenvalues[0]),
                float(step),
                asymmetry,
            )
        )
    return reports


def levi_form(u: ScalarField, point: npt.ArrayLike, step: float) -> LeviReport:
    return levi_forms(u, as_points(point, u.real_dimension)[:1], step)[0]


def min_eigenvalues(u: ScalarField, points: FloatArray, step: float) -> FloatArray:
    return np.array([report.min_eigenvalue for report in levi_forms(u, points, step)])
