"""
Tests for gain functions and omega_ratio.

Covers:
- gain: per-form values, validity interval, 0 < f(eps) <= eps
- gain_derivative: closed form against central differences
- omega_ratio: closed-form values and decay to 0 for the Log-Lipschitz forms
- fit_form_equivalence: exact vs simplified Log-Lipschitz gain
- gain_table: row layout
"""

import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from pshlab_special.exceptions import DomainError
from pshlab_special.gain import (
    GainForm,
    GainFunction,
    fit_form_equivalence,
    gain,
    gain_array,
    gain_derivative,
    hoelder_gain,
    lipschitz_gain,
    loglip_gain,
    loglip_simplified_gain,
    omega_ratio,
)
from pshlab_special.lambert import INV_E
from pshlab_special.tables import GAIN_TABLE_HEADER, gain_table


class GainValueTests(SimpleTestCase):
    """Tests for gain on each form."""

    def test_loglip_at_inverse_e(self) -> None:
        """C = C_tilde = 1, eps = 1/e gives 1/e since W-1(-1/e) = -1."""
        self.assertAlmostEqual(gain(loglip_gain(), INV_E), INV_E, places=7)

    def test_lipschitz(self) -> None:
        """eps / C with C = 2."""
        self.assertAlmostEqual(gain(lipschitz_gain(2.0), 0.1), 0.05, places=15)

    def test_hoelder(self) -> None:
        """(eps / C)^(1/gamma)."""
        f = hoelder_gain(0.5, 2.0)
        self.assertAlmostEqual(gain(f, 0.1), 0.0025, places=15)

    def test_simplified(self) -> None:
        """eps / (C_tilde * log(1/eps))."""
        eps = math.exp(-2.0)
        self.assertAlmostEqual(gain(loglip_simplified_gain(), eps), eps / 2.0, places=15)

    def test_outside_validity_rejected(self) -> None:
        """eps <= 0 or above eps1 raises DomainError."""
        with self.assertRaises(DomainError):
            gain(loglip_gain(), 0.0)
        with self.assertRaises(DomainError):
            gain(loglip_gain(), 0.5)
        with self.assertRaises(DomainError):
            gain(GainFunction(GainForm.LIPSCHITZ, C=2.0, eps1=0.1), 0.2)

    def test_invalid_constants_rejected(self) -> None:
        """Non-positive constants and C < 1 for Lipschitz are rejected."""
        with self.assertRaises(DomainError):
            loglip_gain(C=0.0)
        with self.assertRaises(DomainError):
            lipschitz_gain(0.5)
        with self.assertRaises(DomainError):
            hoelder_gain(1.5, 2.0)

    def test_array_matches_scalar(self) -> None:
        """gain_array agrees with gain entrywise."""
        f = loglip_gain()
        eps = np.logspace(-10, -1, 25)
        expected = [gain(f, float(e)) for e in eps]
        np.testing.assert_allclose(gain_array(f, eps), expected, rtol=1e-14)

    def test_loglip_dense_grid(self) -> None:
        """The Log-Lipschitz gain evaluates on 5000 eps in [1e-12, 0.1]."""
        eps = np.geomspace(1e-12, 0.1, 5000)
        values = gain_array(loglip_gain(), eps)
        self.assertTrue(np.all(values > 0.0))
        self.assertTrue(np.all(values <= eps * (1.0 + 1e-12)))

    @given(st.floats(min_value=1e-12, max_value=INV_E))
    @settings(max_examples=200, deadline=None)
    def test_loglip_between_zero_and_eps(self, eps: float) -> None:
        """Property: 0 < f(eps) <= eps on the validity interval."""
        value = gain(loglip_gain(), eps)
        self.assertGreater(value, 0.0)
        self.assertLessEqual(value, eps * (1.0 + 1e-12))


class GainEquivalenceTests(SimpleTestCase):
    """Tests for the exact vs simplified Log-Lipschitz comparison."""

    def test_ratio_bounded_on_grid(self) -> None:
        """The two forms stay within a fitted constant factor on [1e-6, 1e-1]."""
        eps_values = np.logspace(-6, -1, 60).tolist()
        c_hat = fit_form_equivalence(
            loglip_gain(), loglip_simplified_gain(), eps_values
        )
        self.assertTrue(math.isfinite(c_hat))
        self.assertGreaterEqual(c_hat, 1.0)
        self.assertLess(c_hat, 10.0)


class GainDerivativeTests(SimpleTestCase):
    """Tests for gain_derivative."""

    def test_loglip_matches_central_difference(self) -> None:
        """Closed form agrees with central differences at 100 points of (0, C/e)."""
        f = loglip_gain()
        for eps in np.logspace(-8, math.log10(0.3), 100):
            eps = float(eps)
            h = 1e-5 * eps
            numeric = (gain(f, eps + h) - gain(f, eps - h)) / (2.0 * h)
            exact = gain_derivative(f, eps)
            self.assertGreater(exact, 0.0)
            self.assertLess(abs(numeric - exact), 1e-6 * abs(exact))

    def test_loglip_not_differentiable_at_branch_point(self) -> None:
        """eps = C/e is excluded."""
        with self.assertRaises(DomainError):
            gain_derivative(loglip_gain(), INV_E)

    def test_simplified_and_hoelder_positive(self) -> None:
        """Every form is increasing on its validity interval."""
        for f in (loglip_simplified_gain(), hoelder_gain(0.5, 1.0), lipschitz_gain(3.0)):
            for eps in (1e-6, 1e-3, 0.1):
                self.assertGreater(gain_derivative(f, eps), 0.0)


class OmegaRatioTests(SimpleTestCase):
    """Tests for omega_ratio."""

    def test_simplified_closed_form(self) -> None:
        """eps = e^-e gives log(e)/e = 1/e."""
        eps = math.exp(-math.e)
        self.assertAlmostEqual(
            omega_ratio(loglip_simplified_gain(), eps), INV_E, places=14
        )

    def test_lipschitz_constant_numerator(self) -> None:
        """omega = log 2 / log(1/eps) for C = 2."""
        for eps in (1e-2, 1e-5):
            self.assertAlmostEqual(
                omega_ratio(lipschitz_gain(2.0), eps),
                math.log(2.0) / math.log(1.0 / eps),
                places=14,
            )

    def test_loglip_decreases_to_zero(self) -> None:
        """Positive, strictly decreasing on 10^-k, k = 2..10, and < 0.25 at k = 10."""
        f = loglip_gain()
        values = [omega_ratio(f, 10.0**-k) for k in range(2, 11)]
        self.assertTrue(all(v > 0.0 for v in values))
        self.assertTrue(all(b < a for a, b in zip(values, values[1:])))
        self.assertLess(values[-1], 0.25)

    def test_eps_at_least_one_rejected(self) -> None:
        """log(1/eps) <= 0 breaks the ratio."""
        with self.assertRaises(DomainError):
            omega_ratio(lipschitz_gain(2.0), 1.0)


class GainTableTests(SimpleTestCase):
    """Tests for gain_table."""

    def test_rows(self) -> None:
        """Rows carry (eps, f(eps), omega(eps)) for eps = 10^-k."""
        rows = gain_table(loglip_gain())
        self.assertEqual(GAIN_TABLE_HEADER, ("eps", "f_eps", "omega_eps"))
        self.assertEqual(len(rows), 10)
        eps, f_eps, omega = rows[0]
        self.assertEqual(eps, 0.1)
        self.assertAlmostEqual(f_eps, gain(loglip_gain(), 0.1), places=15)
        self.assertAlmostEqual(omega, omega_ratio(loglip_gain(), 0.1), places=15)
