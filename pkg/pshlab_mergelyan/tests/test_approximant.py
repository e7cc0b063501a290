"""
Tests for the plurisubharmonic approximant.

Covers:
- build_approximant: exactness for constants, domination on dB_j, nu range,
  escaping translates
- ApproximantArtifact: membership in U, single pieces
- certify_neighborhood: f(nu) margins that hold and fail
- smooth_approximant: mollified constants, margin checks
- check_approximant: sup error against the bound and its tightness,
  on the catalog disc
"""

import dataclasses
import math

import numpy as np
from django.test import SimpleTestCase

from pshlab_domains.catalog import build_domain
from pshlab_domains.cover import build_cover
from pshlab_mergelyan.approximant import (
    build_approximant,
    certify_neighborhood,
    check_approximant,
    smooth_approximant,
    weakest_gain,
)
from pshlab_mergelyan.exceptions import (
    ApproximationError,
    MarginViolated,
    NuTooLarge,
    TranslateEscapes,
)
from pshlab_mergelyan.tests.disc import six_patch_disc
from pshlab_psh.fields import constant_field, re_z1_field
from pshlab_special.gain import lipschitz_gain


def _lipschitz_modulus(r: float) -> float:
    return r


def _zero_modulus(r: float) -> float:
    return 0.0


class SixPatchApproximantTests(SimpleTestCase):
    """Tests for build_approximant on the six-patch disc."""

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        cls.domain = six_patch_disc()
        cls.cover = build_cover(cls.domain, np.random.default_rng(0), samples=2000)
        cls.constant = build_approximant(
            cls.domain,
            constant_field(1, 2.5),
            0.01,
            cover=cls.cover,
            modulus=_zero_modulus,
            rng=np.random.default_rng(1),
        )
        cls.linear = build_approximant(
            cls.domain,
            re_z1_field(1),
            0.01,
            cover=cls.cover,
            modulus=_lipschitz_modulus,
            rng=np.random.default_rng(1),
        )

    def test_constant_is_exact(self) -> None:
        """With omega = 0 the approximant of a constant is that constant."""
        artifact = self.constant
        self.assertEqual(artifact.omega_nu, 0.0)
        points = np.random.default_rng(2).uniform(-0.6, 0.6, (200, 2))
        np.testing.assert_array_equal(artifact.v(points), 2.5)
        report = check_approximant(artifact, grid=1000)
        self.assertLessEqual(report.sup_error, 1e-12)
        self.assertEqual(report.C_fit, 0.0)
        self.assertTrue(report.passes)

    def test_constant_is_psh(self) -> None:
        """The constant approximant passes its own sub-mean check."""
        self.assertIsNotNone(self.constant.psh)
        self.assertTrue(self.constant.psh.verdict)

    def test_omega_from_modulus(self) -> None:
        """omega(nu) is read from the given modulus."""
        self.assertEqual(self.linear.omega_nu, 0.01)
        self.assertGreater(self.linear.U_margin, 0.0)
        self.assertLessEqual(self.linear.U_margin, 0.01)

    def test_domination(self) -> None:
        """Across dB_0 some ball piece beats f_0 by omega(nu)."""
        domination = self.linear.domination
        self.assertIsNotNone(domination)
        self.assertGreater(domination.checked, 0)
        self.assertTrue(domination.passes)
        self.assertGreaterEqual(domination.min_slack, domination.required)

    def test_error_within_bound(self) -> None:
        """sup |v - phi| stays below omega(nu) (1 + C diam)."""
        report = check_approximant(self.linear, grid=1000)
        self.assertGreater(report.sup_error, 0.0)
        self.assertLessEqual(report.sup_error, report.bound)
        self.assertEqual(len(report.rows[0]), 3)
        self.assertEqual(report.as_record()["op"], "check_approximant")

    def test_bound_is_tight(self) -> None:
        """The bound is attained up to a factor of 3 and C follows c sup q."""
        artifact = self.linear
        report = check_approximant(artifact, grid=1000)
        self.assertEqual(artifact.q_sup(), 2.0)
        expected = 3.0 * max(1.0, 2.0 * artifact.c) / artifact.domain.diameter
        self.assertAlmostEqual(artifact.error_constant(), expected)
        self.assertLessEqual(report.sup_error, report.bound)
        self.assertLessEqual(report.bound, 3.0 * report.sup_error)
        self.assertLessEqual(report.C_fit, artifact.error_constant())

    def test_error_grows_with_nu(self) -> None:
        """A larger translation gives a larger sup error."""
        wider = build_approximant(
            self.domain,
            re_z1_field(1),
            0.02,
            cover=self.cover,
            modulus=_lipschitz_modulus,
            rng=np.random.default_rng(1),
            psh_points=10,
        )
        small = check_approximant(self.linear, grid=1000).sup_error
        large = check_approximant(wider, grid=1000).sup_error
        self.assertGreater(large, small)

    def test_in_U(self) -> None:
        """U holds the closure and nothing far outside it."""
        inside = self.linear.in_U([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
        self.assertEqual(inside.tolist(), [True, True, False])

    def test_piece_field(self) -> None:
        """f_0 at the origin is phi(0) + 3 omega (xi_0(0) + c q(0)) with xi_0 = -1."""
        f0 = self.linear.piece_field(0)
        self.assertAlmostEqual(float(f0([[0.0, 0.0]])[0]), -0.03, places=12)
        self.assertFalse(f0.inside([[0.95, 0.0]])[0])

    def test_certify_holds(self) -> None:
        """The union of shifted discs keeps nu cos(pi/6) > nu / sqrt 2 around the circle."""
        f = lipschitz_gain(math.sqrt(2.0))
        margin = certify_neighborhood(
            self.linear, f, samples=500, rng=np.random.default_rng(3)
        )
        self.assertGreaterEqual(margin, f(0.01))
        self.assertLess(margin, 0.01)

    def test_certify_fails(self) -> None:
        """f(nu) = nu is more than the shifted discs leave between patches."""
        with self.assertRaises(MarginViolated) as ctx:
            certify_neighborhood(
                self.linear, lipschitz_gain(1.0), samples=500, rng=np.random.default_rng(3)
            )
        self.assertEqual(ctx.exception.witness.shape, (2,))

    def test_smooth_constant(self) -> None:
        """Mollifying a constant approximant returns the constant."""
        smooth = smooth_approximant(self.constant, lipschitz_gain(math.sqrt(2.0)), nodes_log2=8)
        np.testing.assert_allclose(smooth([[0.0, 0.0], [0.5, 0.2]]), 2.5, rtol=1e-12)

    def test_smooth_needs_margin(self) -> None:
        """Smoothing with a zero margin is rejected."""
        with self.assertRaises(ApproximationError):
            smooth_approximant(self.constant, margin=0.0)

    def test_nu_range(self) -> None:
        """nu must lie in (0, eps_w / 2)."""
        with self.assertRaises(NuTooLarge):
            build_approximant(self.domain, re_z1_field(1), 0.3, cover=self.cover)
        with self.assertRaises(ApproximationError):
            build_approximant(self.domain, re_z1_field(1), 0.0, cover=self.cover)

    def test_translate_escapes(self) -> None:
        """With every w_j = e_1 the right half of the circle has no translate inside."""
        east = np.array([1.0, 0.0])
        pieces = tuple(
            piece if piece.is_interior else dataclasses.replace(piece, direction=east)
            for piece in self.cover.pieces
        )
        cover = dataclasses.replace(self.cover, pieces=pieces)
        with self.assertRaises(TranslateEscapes) as ctx:
            build_approximant(
                self.domain,
                re_z1_field(1),
                0.01,
                cover=cover,
                modulus=_lipschitz_modulus,
                rng=np.random.default_rng(1),
            )
        self.assertGreater(ctx.exception.witness[0], 0.0)


class CatalogApproximantTests(SimpleTestCase):
    """Tests for build_approximant on the catalog unit disc."""

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        cls.domain = build_domain("unit_ball")
        cover = build_cover(cls.domain, np.random.default_rng(0), samples=2000)
        cls.artifact = build_approximant(
            cls.domain,
            re_z1_field(1),
            1e-3,
            cover=cover,
            rng=np.random.default_rng(1),
            pair_samples=5000,
        )

    def test_empirical_omega(self) -> None:
        """The empirical modulus of Re z_1 at nu is close to nu."""
        self.assertLessEqual(self.artifact.omega_nu, 1e-3 * (1.0 + 1e-12))
        self.assertGreater(self.artifact.omega_nu, 0.5e-3)

    def test_psh(self) -> None:
        """v passes the sub-mean check on the closure."""
        self.assertTrue(self.artifact.psh.verdict)

    def test_domination(self) -> None:
        """Every sampled f_j on dB_j is beaten by a neighbour."""
        self.assertTrue(self.artifact.domination.passes)

    def test_check(self) -> None:
        """The sup error is within the bound and the weakest gain is certified."""
        gain = weakest_gain(self.domain, 1e-3)
        report = check_approximant(self.artifact, gain, grid=2000)
        self.assertTrue(report.passes)
        self.assertGreaterEqual(report.margin, gain(1e-3))
        record = self.artifact.as_record()
        self.assertTrue(record["verdict"])
        self.assertEqual(record["inputs"]["domain"], "unit_ball")
