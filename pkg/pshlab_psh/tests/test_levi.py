"""
Tests for finite-difference complex Hessians.

Covers:
- levi_form: |z|^2, Re z1^2 and Re(a z1 zbar2) closed forms
- levi_form: second-order convergence in the step
- levi_forms: non-finite stencils, region violations and bad steps
"""

import numpy as np
from django.test import SimpleTestCase

from pshlab_domains.geometry import FloatArray
from pshlab_psh.exceptions import NonFinite, PshError, RegionViolation
from pshlab_psh.fields import ScalarField, abs_sq_field, everywhere, log_abs_z1_field
from pshlab_psh.levi import levi_form, levi_forms, min_eigenvalues


def _z(points: FloatArray) -> tuple[np.ndarray, np.ndarray]:
    return points[:, 0] + 1j * points[:, 1], points[:, 2] + 1j * points[:, 3]


def _mixed_field(a: complex) -> ScalarField:
    def value(points: FloatArray) -> FloatArray:
        z1, z2 = _z(points)
        return np.real(a * z1 * np.conj(z2))

    return ScalarField(value, everywhere, "Re(a z1 zbar2)", 2)


def _quartic_field(with_quartic: bool) -> ScalarField:
    def value(points: FloatArray) -> FloatArray:
        z1, _ = _z(points)
        out = np.sum(points * points, axis=1) + np.real(z1**3)
        if with_quartic:
            out = out + np.abs(z1) ** 4
        return out

    return ScalarField(value, everywhere, "quartic", 2)


class LeviFormTests(SimpleTestCase):
    """Tests for levi_form on fields with known Hessians."""

    point = np.array([0.3, -0.2, 0.1, 0.4])

    def test_abs_sq_is_identity(self) -> None:
        """|z|^2 has the identity as complex Hessian."""
        report = levi_form(abs_sq_field(2), self.point, 1e-3)
        np.testing.assert_allclose(report.hessian, np.eye(2), atol=1e-6)
        self.assertAlmostEqual(report.min_eigenvalue, 1.0, delta=1e-6)

    def test_pluriharmonic_is_zero(self) -> None:
        """Re z1^2 is pluriharmonic."""
        u = ScalarField(lambda p: np.real(_z(p)[0] ** 2), everywhere, "Re z1^2", 2)
        report = levi_form(u, self.point, 1e-3)
        np.testing.assert_allclose(report.hessian, np.zeros((2, 2)), atol=1e-6)

    def test_mixed_term(self) -> None:
        """Re(a z1 zbar2) has H_12 = a / 2 and eigenvalues +-|a| / 2."""
        a = 1.0 + 1.0j
        report = levi_form(_mixed_field(a), self.point, 1e-3)
        self.assertAlmostEqual(report.hessian[0, 1], a / 2, delta=1e-6)
        self.assertAlmostEqual(report.hessian[1, 0], np.conj(a) / 2, delta=1e-6)
        self.assertAlmostEqual(report.min_eigenvalue, -abs(a) / 2, delta=1e-6)
        self.assertLess(report.asymmetry, 1e-6)

    def test_cubic_term_is_exact(self) -> None:
        """|z|^2 + Re z1^3 is reproduced up to rounding."""
        report = levi_form(_quartic_field(False), self.point, 1e-3)
        np.testing.assert_allclose(report.hessian, np.eye(2), atol=1e-7)

    def test_second_order_in_step(self) -> None:
        """Halving the step divides the error by about four."""
        u = _quartic_field(True)
        z1 = complex(self.point[0], self.point[1])
        exact = 1.0 + 4.0 * abs(z1) ** 2
        errors = [
            abs(levi_form(u, self.point, h).hessian[0, 0] - exact)
            for h in (1e-2, 5e-3, 2.5e-3)
        ]
        for coarse, fine in zip(errors, errors[1:]):
            self.assertGreater(coarse / fine, 4.0 / 1.5)
            self.assertLess(coarse / fine, 6.0)

    def test_batched_matches_single(self) -> None:
        """levi_forms and min_eigenvalues agree with levi_form row by row."""
        points = np.random.default_rng(3).uniform(-1.0, 1.0, (5, 4))
        u = _mixed_field(2.0)
        batched = levi_forms(u, points, 1e-3)
        lows = min_eigenvalues(u, points, 1e-3)
        for point, report, low in zip(points, batched, lows):
            single = levi_form(u, point, 1e-3)
            np.testing.assert_allclose(report.hessian, single.hessian, atol=1e-12)
            self.assertEqual(low, report.min_eigenvalue)


class LeviErrorTests(SimpleTestCase):
    """Tests for levi_forms failure modes."""

    def test_non_finite_stencil(self) -> None:
        """A stencil touching z1 = 0 for log|z1| raises NonFinite."""
        with self.assertRaises(NonFinite) as ctx:
            levi_form(log_abs_z1_field(2), [0.01, 0.0, 0.0, 0.0], 0.01)
        self.assertEqual(ctx.exception.witness.tolist(), [0.01, 0.0, 0.0, 0.0])

    def test_region_violation(self) -> None:
        """A stencil leaving the region raises RegionViolation."""
        ball = abs_sq_field(2).restrict(lambda p: np.sum(p * p, axis=1) < 1.0)
        with self.assertRaises(RegionViolation):
            levi_form(ball, [0.999, 0.0, 0.0, 0.0], 0.01)

    def test_step_must_be_positive(self) -> None:
        """A zero step is rejected."""
        with self.assertRaises(PshError):
            levi_form(abs_sq_field(2), [0.0, 0.0, 0.0, 0.0], 0.0)
