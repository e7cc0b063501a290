"""
Tests for the translation estimate.

Covers:
- check_translation_estimate: cone tip closed form, Log-Lipschitz cusp grid,
  oracle-backed distances, one-sided failures, input validation
- sample_patch_points: points inside the domain and the shrunk patch ball
- default_eps_grid: inside (0, eps1)
"""

import math

import numpy as np
from django.test import SimpleTestCase

from pshlab_domains.catalog import build_domain
from pshlab_domains.exceptions import GeometryError
from pshlab_domains.oracle import oracle_distance
from pshlab_domains.translation import (
    check_translation_estimate,
    default_eps_grid,
    sample_patch_points,
)


class ConeTranslationTests(SimpleTestCase):
    """Tests for the translation estimate at the cone tip."""

    def setUp(self) -> None:
        self.domain = build_domain("cone")

    def test_axis_points(self) -> None:
        """Axis points gain exactly eps / sqrt(5), so the fitted constant is 1."""
        points = np.array([[0.0, h] for h in (0.01, 0.02, 0.04)])
        report = check_translation_estimate(
            self.domain, 0, points, default_eps_grid(self.domain)
        )
        self.assertTrue(report.holds)
        self.assertGreaterEqual(report.fitted_constant, 1.0 / math.sqrt(5.0))
        self.assertAlmostEqual(report.fitted_constant, 1.0, places=6)
        self.assertLessEqual(report.upper_defect, 0.0)

    def test_sampled_points(self) -> None:
        """Sampled patch points satisfy both bounds."""
        rng = np.random.default_rng(4)
        points = sample_patch_points(self.domain, 0, 20, rng)
        report = check_translation_estimate(
            self.domain, 0, points, default_eps_grid(self.domain)
        )
        self.assertTrue(report.holds, report.as_record()["violations"][:3])
        self.assertGreaterEqual(report.fitted_constant, 1.0 / math.sqrt(5.0) - 1e-9)
        self.assertEqual(report.samples, 20 * 20)

    def test_lower_side_only(self) -> None:
        """A distance that never grows under translation fails on the lower side alone."""

        def flat(p: np.ndarray) -> np.ndarray:
            return np.full(p.shape[0], 0.01)

        report = check_translation_estimate(
            self.domain, 0, [[0.0, 0.01]], [1e-3, 1e-2], distance_fn=flat
        )
        self.assertFalse(report.holds)
        self.assertFalse(report.as_record()["verdict"])
        self.assertLessEqual(report.upper_defect, 0.0)
        self.assertEqual({v.kind for v in report.violations}, {"lower"})
        self.assertEqual(len(report.violations), 2)

    def test_far_point_rejected(self) -> None:
        """Points outside B(x_j, r_j / c) are rejected."""
        with self.assertRaises(GeometryError):
            check_translation_estimate(self.domain, 0, [[0.0, 0.5]], [0.01])

    def test_eps_range(self) -> None:
        """eps must lie in (0, eps1)."""
        with self.assertRaises(GeometryError):
            check_translation_estimate(self.domain, 0, [[0.0, 0.01]], [0.0])
        with self.assertRaises(GeometryError):
            check_translation_estimate(self.domain, 0, [[0.0, 0.01]], [self.domain.eps1])


class CuspTranslationTests(SimpleTestCase):
    """Tests for the translation estimate on the Log-Lipschitz cusp."""

    def setUp(self) -> None:
        self.domain = build_domain("loglip_cusp")

    def test_grid_holds(self) -> None:
        """A 20 x 20 (z, eps) grid near the tip fits one positive constant."""
        rng = np.random.default_rng(8)
        points = sample_patch_points(self.domain, 0, 20, rng)
        report = check_translation_estimate(
            self.domain, 0, points, default_eps_grid(self.domain, 20)
        )
        self.assertTrue(report.holds)
        self.assertGreater(report.fitted_constant, 0.0)
        self.assertEqual(len(report.gain_rows), 20)

    def test_oracle_distances(self) -> None:
        """The estimate also holds with oracle distances."""
        points = np.array([[0.0, 0.01], [0.005, 0.04]])

        def oracle(p: np.ndarray) -> np.ndarray:
            return oracle_distance(self.domain, p, samples=10**5)

        report = check_translation_estimate(
            self.domain, 0, points, [1e-3, 1e-2], distance_fn=oracle
        )
        self.assertGreater(report.fitted_constant, 0.0)

    def test_sample_points_in_patch(self) -> None:
        """Sampled points are inside the domain and within r / 2 of the tip."""
        points = sample_patch_points(self.domain, 0, 50, np.random.default_rng(0))
        self.assertEqual(points.shape, (50, 2))
        self.assertTrue(self.domain.contains(points).all())
        self.assertTrue((np.linalg.norm(points, axis=1) < 0.06).all())

    def test_eps_grid_range(self) -> None:
        """The default grid stays strictly inside (0, eps1)."""
        eps = default_eps_grid(self.domain)
        self.assertGreater(eps.min(), 0.0)
        self.assertLess(eps.max(), self.domain.eps1)
