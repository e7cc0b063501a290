"""
Tests for distance to the boundary.

Covers:
- distance_to_boundary: ball and cone closed forms in C^1 and C^2, outside points
- distances: vectorised agreement, outside points
- patch_distance: graph search against the constraint closed forms, skipped
  patches, seed grids
- ray_exit_bound: upper bound on delta
- oracle_distance: agreement with the meridian search on the cusp and cone
- delta is 1-Lipschitz on sampled pairs
"""

import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from pshlab_domains.catalog import build_domain
from pshlab_domains.distance import (
    distance_to_boundary,
    distances,
    patch_distance,
    ray_exit_bound,
    seed_grid,
)
from pshlab_domains.exceptions import PointOutsideDomain
from pshlab_domains.geometry import sample_interior
from pshlab_domains.oracle import oracle_distance

coordinate = st.floats(min_value=-0.2, max_value=0.2, allow_nan=False)
height = st.floats(min_value=0.5, max_value=1.5, allow_nan=False)


class BallDistanceTests(SimpleTestCase):
    """Tests for distance_to_boundary on the unit ball."""

    def setUp(self) -> None:
        self.domain = build_domain("unit_ball")

    def test_center(self) -> None:
        """delta(0) = 1."""
        self.assertAlmostEqual(distance_to_boundary(self.domain, [0.0, 0.0]), 1.0, places=12)

    def test_radial_point(self) -> None:
        """delta(0.3 e1) = 0.7."""
        self.assertAlmostEqual(distance_to_boundary(self.domain, [0.3, 0.0]), 0.7, places=12)

    def test_outside_point(self) -> None:
        """Points outside the ball raise PointOutsideDomain with the point attached."""
        with self.assertRaises(PointOutsideDomain) as ctx:
            distance_to_boundary(self.domain, [1.5, 0.0])
        self.assertEqual(list(ctx.exception.point), [1.5, 0.0])

    def test_boundary_point_is_outside(self) -> None:
        """Boundary points are not inside."""
        with self.assertRaises(PointOutsideDomain):
            distances(self.domain, [[0.0, 0.0], [1.0, 0.0]])

    def test_vectorised_matches_scalar(self) -> None:
        """distances agrees with distance_to_boundary point by point."""
        points = sample_interior(self.domain, 20, np.random.default_rng(5))
        batch = distances(self.domain, points)
        for point, value in zip(points, batch):
            self.assertAlmostEqual(distance_to_boundary(self.domain, point), value, places=9)

    def test_ray_bound_is_upper_bound(self) -> None:
        """Coordinate-ray exits never undercut delta."""
        point = np.array([0.2, -0.4])
        exact = 1.0 - math.hypot(0.2, -0.4)
        self.assertGreaterEqual(ray_exit_bound(self.domain, point), exact - 1e-12)


class ConeDistanceTests(SimpleTestCase):
    """Tests for distance_to_boundary on the Lipschitz cone."""

    def setUp(self) -> None:
        self.domain = build_domain("cone")

    def test_axis_point_closed_form(self) -> None:
        """An axis point at height h is h / sqrt(1 + C^2) from the cone."""
        for h in (0.01, 0.1, 0.3):
            with self.subTest(h=h):
                self.assertAlmostEqual(
                    distance_to_boundary(self.domain, [0.0, h]) / (h / math.sqrt(5.0)),
                    1.0,
                    places=9,
                )

    def test_axis_point_in_c2(self) -> None:
        """The closed form h / sqrt(1 + C^2) holds on the axis of the cone in C^2."""
        domain = build_domain("cone", {"n": 2})
        for h in (0.05, 0.2):
            with self.subTest(h=h):
                self.assertAlmostEqual(
                    distance_to_boundary(domain, [0.0, 0.0, 0.0, h]) / (h / math.sqrt(5.0)),
                    1.0,
                    places=9,
                )

    def test_below_cone_is_outside(self) -> None:
        """Points under the graph are rejected."""
        with self.assertRaises(PointOutsideDomain):
            distance_to_boundary(self.domain, [0.1, 0.1])

    def test_oracle_agreement(self) -> None:
        """The dense-grid oracle matches the meridian search."""
        points = sample_interior(self.domain, 10, np.random.default_rng(11))
        np.testing.assert_allclose(
            oracle_distance(self.domain, points, samples=10**5),
            distances(self.domain, points),
            rtol=1e-4,
        )

    @given(coordinate, height, coordinate, height)
    @settings(max_examples=50, deadline=None)
    def test_one_lipschitz(self, x1: float, y1: float, x2: float, y2: float) -> None:
        """|delta(p) - delta(q)| <= |p - q|."""
        p, q = np.array([x1, y1]), np.array([x2, y2])
        values = distances(self.domain, np.vstack([p, q]))
        self.assertLessEqual(abs(values[0] - values[1]), np.linalg.norm(p - q) + 1e-9)


class CuspDistanceTests(SimpleTestCase):
    """Tests for distances on the Log-Lipschitz cusp."""

    def setUp(self) -> None:
        self.domain = build_domain("loglip_cusp")

    def test_axis_points_match_oracle(self) -> None:
        """Axis points agree with the brute-force oracle to 1e-4 relative."""
        points = np.array([[0.0, h] for h in (0.02, 0.05, 0.1, 0.3)])
        np.testing.assert_allclose(
            oracle_distance(self.domain, points, samples=10**5),
            distances(self.domain, points),
            rtol=1e-4,
        )

    def test_random_points_match_oracle(self) -> None:
        """Random interior points agree with the brute-force oracle."""
        points = sample_interior(self.domain, 10, np.random.default_rng(7))
        np.testing.assert_allclose(
            oracle_distance(self.domain, points, samples=10**5),
            distances(self.domain, points),
            rtol=1e-4,
        )

    def test_axis_distance_below_height(self) -> None:
        """The cusp is strictly closer than the tip straight below."""
        self.assertLess(distance_to_boundary(self.domain, [0.0, 0.1]), 0.1)


class PatchSearchTests(SimpleTestCase):
    """Tests for the per-patch graph search behind distance_to_boundary."""

    def setUp(self) -> None:
        self.cone = build_domain("cone")
        self.cusp = build_domain("loglip_cusp")

    def test_matches_constraint_distance(self) -> None:
        """The patch search agrees with the constraint closed forms to 1e-6 relative."""
        for domain in (self.cone, self.cusp):
            points = sample_interior(domain, 6, np.random.default_rng(13))
            with self.subTest(domain=domain.name):
                searched = [distance_to_boundary(domain, point) for point in points]
                np.testing.assert_allclose(searched, distances(domain, points), rtol=1e-6)

    def test_beats_coordinate_rays(self) -> None:
        """On the cone axis the graph search is closer than any coordinate ray."""
        point = np.array([0.0, 0.1])
        searched = distance_to_boundary(self.cone, point)
        self.assertLess(searched, ray_exit_bound(self.cone, point) - 1e-3)
        self.assertAlmostEqual(searched, 0.1 / math.sqrt(5.0), places=9)

    def test_every_patch_is_an_upper_bound(self) -> None:
        """Each patch measures distances to genuine boundary points only."""
        point = np.array([0.05, 0.3])
        delta = float(distances(self.cone, point[None, :])[0])
        for patch in self.cone.atlas[:10]:
            self.assertGreaterEqual(patch_distance(patch, point), delta - 1e-12)

    def test_skips_far_patch(self) -> None:
        """A patch whose seeds cannot beat the current best returns its best seed."""
        tip = self.cone.atlas[0]
        point = np.array([0.0, 0.1])
        far = patch_distance(tip, point, best=1e-6)
        self.assertGreater(far, 1e-6)
        self.assertGreaterEqual(far, patch_distance(tip, point))

    def test_seed_grid(self) -> None:
        """33 seeds per axis in R^1, thinned to 16 per axis in R^3."""
        self.assertEqual(seed_grid(1, 0.1).shape, (33, 1))
        self.assertEqual(seed_grid(3, 0.1).shape, (16**3, 3))
        self.assertEqual(float(seed_grid(1, 0.1).min()), -0.1)
