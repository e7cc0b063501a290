"""
Tests for the open cover.

Covers:
- build_cover: six-patch disc, catalog disc, degenerate single patch, short d_j
- Cover: margins, W/B/B- predicates, K_k predicate and cloud, d_j bound
"""

import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from pshlab_domains.atlas import orthonormal_frame
from pshlab_domains import cover as cover_module
from pshlab_domains.catalog import build_domain
from pshlab_domains.cover import INTERIOR, build_cover
from pshlab_domains.exceptions import CoverDegenerate
from pshlab_domains.geometry import BoundedDomain, GraphPatch, sample_interior
from pshlab_domains.regularity import lipschitz_spec


def _flat(local: np.ndarray) -> np.ndarray:
    return np.zeros(local.shape[0])


def _disc_with_patches(count: int, radius: float) -> BoundedDomain:
    angles = 2.0 * math.pi * np.arange(count) / count
    patches = []
    for k, angle in enumerate(angles):
        center = np.array([math.cos(angle), math.sin(angle)])
        frame = orthonormal_frame(-center)
        patches.append(GraphPatch(center, radius, frame, _flat, lipschitz_spec(1.0), f"p{k}"))
    return build_domain("unit_ball").with_atlas(tuple(patches))


class SixPatchCoverTests(SimpleTestCase):
    """Tests for the cover of the disc by six wide patches."""

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        cls.cover = build_cover(_disc_with_patches(6, 0.6), np.random.default_rng(0), samples=2000)

    def test_pieces(self) -> None:
        """One interior piece plus one ball per patch."""
        self.assertEqual(len(self.cover), 7)
        self.assertTrue(self.cover.pieces[INTERIOR].is_interior)
        self.assertAlmostEqual(self.cover.eps_w, 0.6)

    def test_origin_in_core(self) -> None:
        """delta(0) = 1 > eps_w puts the origin in W_0."""
        self.assertTrue(self.cover.in_W(INTERIOR, [[0.0, 0.0]])[0])

    def test_interior_margin(self) -> None:
        """The interior margin is delta - eps_w, and negative outside."""
        margin = self.cover.margin(INTERIOR, [[0.0, 0.0], [2.0, 0.0]])
        self.assertAlmostEqual(margin[0], 0.4)
        self.assertLess(margin[1], 0.0)

    def test_ball_sets_nested(self) -> None:
        """B_k^- is inside B_k is inside W_k."""
        points = np.random.default_rng(3).uniform(-1.5, 1.5, (500, 2))
        for k in range(len(self.cover)):
            minus = self.cover.in_Bminus(k, points)
            middle = self.cover.in_B(k, points)
            outer = self.cover.in_W(k, points)
            self.assertTrue(np.all(~minus | middle))
            self.assertTrue(np.all(~middle | outer))

    def test_sampled_closure_covered(self) -> None:
        """Every sampled closure point lies in some B_k^-."""
        points = sample_interior(self.cover.domain, 1000, np.random.default_rng(9))
        self.assertTrue(self.cover.covering_pieces(points).any(axis=1).all())


class CatalogCoverTests(SimpleTestCase):
    """Tests for the cover of the catalog disc."""

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        cls.cover = build_cover(build_domain("unit_ball"), np.random.default_rng(0), samples=2000)

    def test_d_bound(self) -> None:
        """Every d_j is at least eps_w / 2."""
        self.assertGreaterEqual(min(self.cover.d_list), 0.5 * self.cover.eps_w)

    def test_k_clearance(self) -> None:
        """K_k stays eps_w / 2 away from the boundary of B_k."""
        self.assertGreaterEqual(min(self.cover.k_clearance), 0.5 * self.cover.eps_w - 1e-12)

    def test_cloud_satisfies_predicate(self) -> None:
        """Cloud points of K_k satisfy the K_k predicate."""
        for k in (0, 1, len(self.cover) // 2):
            cloud = self.cover.pieces[k].k_cloud
            if cloud.shape[0]:
                self.assertTrue(self.cover.in_K(k, cloud).all())

    def test_distance_to_k(self) -> None:
        """Cloud points are at distance 0 from their own K_k."""
        piece = self.cover.pieces[1]
        self.assertGreater(piece.k_cloud.shape[0], 0)
        np.testing.assert_array_equal(self.cover.distance_to_K(1, piece.k_cloud[:10]), 0.0)

    def test_record(self) -> None:
        """The record reports a passing cover."""
        record = self.cover.as_record()
        self.assertTrue(record["verdict"])
        self.assertEqual(record["measured"]["pieces"], len(self.cover))


class DegenerateCoverTests(SimpleTestCase):
    """Tests for covers that miss part of the closure."""

    def test_single_patch(self) -> None:
        """One patch cannot cover the far side of the disc."""
        with self.assertRaises(CoverDegenerate) as ctx:
            build_cover(_disc_with_patches(1, 0.2), np.random.default_rng(0), samples=500)
        self.assertIsNotNone(ctx.exception.witness)

    def test_short_exit_distance(self) -> None:
        """A cover whose pieces leave no room beyond dB_j is refused, not logged."""
        domain = _disc_with_patches(6, 0.6)
        short = 0.1 * domain.core_margin
        with mock.patch.object(cover_module, "_exit_distance", return_value=short):
            with self.assertRaises(CoverDegenerate) as ctx:
                build_cover(domain, np.random.default_rng(0), samples=500)
        index, d = ctx.exception.witness
        self.assertEqual(index, INTERIOR)
        self.assertLess(d, 0.5 * domain.core_margin)
