"""
Tests for scalar fields.

Covers:
- ScalarField: evaluate with region witnesses, translate, restrict
- field_max: union region, members taken on their own regions
- build_field: catalog of test fields and unknown names
"""

import numpy as np
from django.test import SimpleTestCase

from pshlab_domains.catalog import build_domain
from pshlab_psh.exceptions import PshError, RegionViolation
from pshlab_psh.fields import (
    FieldName,
    abs_sq_field,
    build_field,
    constant_field,
    field_max,
    re_z1_field,
)


def _half_plane(points: np.ndarray) -> np.ndarray:
    return points[:, 0] > 0.0


class ScalarFieldTests(SimpleTestCase):
    """Tests for ScalarField."""

    def test_evaluate_reports_witness(self) -> None:
        """The first point outside the region is the witness."""
        u = abs_sq_field(1).restrict(_half_plane)
        with self.assertRaises(RegionViolation) as ctx:
            u([[1.0, 0.0], [-1.0, 2.0]])
        self.assertEqual(ctx.exception.witness.tolist(), [-1.0, 2.0])

    def test_translate(self) -> None:
        """translate(c) evaluates u(z + c) on the shifted region."""
        u = re_z1_field(1).restrict(_half_plane).translate(np.array([1.0, 0.0]))
        np.testing.assert_allclose(u([[-0.5, 3.0]]), [0.5])
        self.assertFalse(u.inside([[-1.5, 0.0]])[0])

    def test_restrict_keeps_values(self) -> None:
        """restrict only narrows the region."""
        u = abs_sq_field(1)
        narrowed = u.restrict(_half_plane, "half")
        self.assertEqual(narrowed.label, "half")
        np.testing.assert_allclose(narrowed([[0.5, 0.5]]), u([[0.5, 0.5]]))


class FieldMaxTests(SimpleTestCase):
    """Tests for field_max."""

    def test_union_region(self) -> None:
        """Each member counts only where it is defined."""
        left = constant_field(1, 5.0).restrict(lambda p: p[:, 0] < 0.0)
        right = constant_field(1, 1.0).restrict(_half_plane)
        u = field_max([left, right], "max")
        np.testing.assert_allclose(u([[-1.0, 0.0], [1.0, 0.0]]), [5.0, 1.0])
        self.assertFalse(u.inside([[0.0, 0.0]])[0])

    def test_pointwise_max(self) -> None:
        """Overlapping members give the pointwise maximum."""
        u = field_max([abs_sq_field(1), re_z1_field(1)], "max")
        np.testing.assert_allclose(u([[0.5, 0.0], [2.0, 0.0], [-1.0, 0.0]]), [0.5, 4.0, 1.0])

    def test_empty(self) -> None:
        """An empty list is rejected."""
        with self.assertRaises(PshError):
            field_max([], "empty")


class BuildFieldTests(SimpleTestCase):
    """Tests for build_field."""

    def setUp(self) -> None:
        self.disc = build_domain("unit_ball")

    def test_every_name_builds(self) -> None:
        """Every catalog name gives a field of the domain's dimension."""
        for name in FieldName:
            u = build_field(name, self.disc)
            self.assertEqual(u.dimension, 1)
            self.assertTrue(np.isfinite(u([[0.3, 0.1]])).all())

    def test_neg_log_delta(self) -> None:
        """-log delta at the center of the unit disc is 0."""
        u = build_field("neg_log_delta", self.disc)
        self.assertAlmostEqual(float(u([[0.0, 0.0]])[0]), 0.0, places=12)
        self.assertFalse(u.inside([[1.5, 0.0]])[0])

    def test_constant_value(self) -> None:
        """The constant field reads its value from params."""
        u = build_field("constant", self.disc, {"value": -2.0})
        self.assertEqual(float(u([[0.1, 0.1]])[0]), -2.0)

    def test_unknown_name(self) -> None:
        """Unknown names raise PshError."""
        with self.assertRaises(PshError):
            build_field("sin", self.disc)
