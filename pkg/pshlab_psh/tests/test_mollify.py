"""
Tests for mollification.

Covers:
- kernel_nodes: symmetric nodes in the unit ball, normalised weights
- mollify: affine fields unchanged, |z|^2 shifted by c_kernel r^2
- mollify: shrunk region, plurisubharmonicity preserved, radius validation
"""

import numpy as np
from django.test import SimpleTestCase

from pshlab_psh.circle import check_psh
from pshlab_psh.exceptions import PshError, RegionViolation
from pshlab_psh.fields import abs_sq_field, constant_field, field_max, re_z1_field
from pshlab_psh.mollify import kernel_constant, kernel_nodes, mollify


class KernelNodesTests(SimpleTestCase):
    """Tests for kernel_nodes."""

    def test_nodes_in_unit_ball(self) -> None:
        """Nodes lie in the open unit ball and come in +-y pairs."""
        kernel = kernel_nodes(4, 8, 1)
        self.assertEqual(kernel.points.shape, (256, 4))
        self.assertTrue(np.all(np.linalg.norm(kernel.points, axis=1) < 1.0))
        np.testing.assert_allclose(kernel.points[:128], -kernel.points[128:])
        self.assertAlmostEqual(float(kernel.weights.sum()), 1.0, places=12)

    def test_kernel_constant(self) -> None:
        """c_kernel is the second moment, strictly between 0 and 1."""
        c = kernel_constant(2, 8)
        self.assertGreater(c, 0.0)
        self.assertLess(c, 1.0)

    def test_too_few_nodes(self) -> None:
        """A single-node rule is rejected."""
        with self.assertRaises(PshError):
            kernel_nodes(2, 1, 1)


class MollifyTests(SimpleTestCase):
    """Tests for mollify."""

    points = np.array([[0.2, -0.1], [0.0, 0.0], [-0.5, 0.4]])

    def test_affine_unchanged(self) -> None:
        """Affine fields are reproduced exactly."""
        smooth = mollify(re_z1_field(1), 0.1, nodes_log2=8)
        np.testing.assert_allclose(smooth(self.points), self.points[:, 0], atol=1e-12)

    def test_abs_sq(self) -> None:
        """mollify(|z|^2, r)(p) = |p|^2 + c_kernel r^2."""
        r = 0.2
        smooth = mollify(abs_sq_field(1), r, nodes_log2=8)
        expected = np.sum(self.points**2, axis=1) + kernel_constant(2, 8) * r * r
        np.testing.assert_allclose(smooth(self.points), expected, rtol=1e-12, atol=1e-14)

    def test_region_shrinks(self) -> None:
        """Points closer than the radius to the region's edge are rejected."""
        disc = abs_sq_field(1).restrict(lambda p: np.sum(p * p, axis=1) < 1.0)
        smooth = mollify(disc, 0.1, nodes_log2=8)
        self.assertTrue(smooth.inside([[0.5, 0.0]]).all())
        with self.assertRaises(RegionViolation):
            smooth([[0.95, 0.0]])

    def test_preserves_psh(self) -> None:
        """A mollified max of plurisubharmonic fields passes check_psh."""
        u = field_max([abs_sq_field(1), re_z1_field(1), constant_field(1, 0.25)], "max")
        smooth = mollify(u, 0.05, nodes_log2=8)
        rng = np.random.default_rng(2)
        report = check_psh(smooth, rng.uniform(-1.0, 1.0, (10, 2)), radii=(1e-2, 1e-1), rng=rng)
        self.assertTrue(report.verdict)

    def test_radius_must_be_positive(self) -> None:
        """A zero radius is rejected."""
        with self.assertRaises(PshError):
            mollify(abs_sq_field(1), 0.0)
