"""
Tests for the empirical modulus of continuity.

Covers:
- modulus_of_continuity: constants, Re z1 and |z|^2 on the unit disc
- ModulusTable: monotone envelope, zero below the smallest distance, rows
"""

import numpy as np
from django.test import SimpleTestCase

from pshlab_domains.catalog import build_domain
from pshlab_psh.exceptions import PshError
from pshlab_psh.fields import abs_sq_field, constant_field, re_z1_field
from pshlab_psh.modulus import ModulusTable, modulus_of_continuity


class ModulusOfContinuityTests(SimpleTestCase):
    """Tests for modulus_of_continuity."""

    def setUp(self) -> None:
        self.disc = build_domain("unit_ball")

    def test_constant(self) -> None:
        """A constant has zero oscillation."""
        table = modulus_of_continuity(constant_field(1, 3.0), self.disc, 2000)
        self.assertEqual(float(np.max(table.envelope)), 0.0)

    def test_re_z1_is_one_lipschitz(self) -> None:
        """Re z1 has omega(r) = r, reached by axial pairs."""
        table = modulus_of_continuity(re_z1_field(1), self.disc, 20000)
        for r in (1e-3, 1e-2, 1e-1):
            self.assertLessEqual(table(r), r * (1.0 + 1e-12))
            self.assertGreaterEqual(table(r), 0.95 * r)

    def test_abs_sq_bound(self) -> None:
        """|z|^2 is 2-Lipschitz on the unit disc."""
        table = modulus_of_continuity(abs_sq_field(1), self.disc, 5000)
        grid = np.geomspace(1e-4, 1.0, 20)
        self.assertTrue(np.all(table.at(grid) <= 2.0 * grid * (1.0 + 1e-12)))

    def test_pairs_stay_in_domain(self) -> None:
        """The sampled distances never exceed the diameter."""
        table = modulus_of_continuity(re_z1_field(1), self.disc, 1000)
        self.assertEqual(table.distances.size, 1000)
        self.assertLessEqual(float(table.distances[-1]), self.disc.diameter)

    def test_too_few_pairs(self) -> None:
        """Fewer than 1000 pairs are rejected."""
        with self.assertRaises(PshError):
            modulus_of_continuity(re_z1_field(1), self.disc, 999)


class ModulusTableTests(SimpleTestCase):
    """Tests for ModulusTable lookups."""

    def test_envelope_is_monotone(self) -> None:
        """The envelope never decreases with the distance."""
        table = modulus_of_continuity(
            abs_sq_field(1), build_domain("unit_ball"), 3000, np.random.default_rng(5)
        )
        self.assertTrue(np.all(np.diff(table.envelope) >= 0.0))
        self.assertTrue(np.all(np.diff(table.distances) >= 0.0))

    def test_lookup(self) -> None:
        """at(r) is zero below the first distance and a step function above."""
        table = ModulusTable("t", np.array([0.1, 0.2, 0.4]), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(
            table.at([0.05, 0.1, 0.3, 1.0]), np.array([0.0, 1.0, 2.0, 3.0])
        )

    def test_rows(self) -> None:
        """rows spans the sampled distances on a log grid."""
        table = ModulusTable("t", np.array([0.1, 0.2, 0.4]), np.array([1.0, 2.0, 3.0]))
        rows = table.rows(5)
        self.assertEqual(len(rows), 5)
        self.assertAlmostEqual(rows[0][0], 0.1)
        self.assertAlmostEqual(rows[-1][0], 0.4)
        self.assertEqual(ModulusTable("e", np.array([]), np.array([])).rows(), [])
