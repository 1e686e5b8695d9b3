#!/usr/bin/env python3
"""
Unit tests for the saddle-point conditional outage, the high- and low-SNR
content outage expressions and the diversity results.
"""

import unittest
import sys
import os
import math

import numpy as np

# Add the project root to the path so we can import from src
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src.analytic_engine import (
	SaddleConfig, UserRate, cgf, cgf_derivatives, conditional_dmt, conditional_outage,
	conditional_outage_numeric, conditional_upper_bound, content_outage_high_snr, content_outage_low_snr,
	dmr, dmr_region, oer, solve_saddle,
)
from src.errors import NoSaddle

class TestSaddleConfig(unittest.TestCase):
	"""Test SaddleConfig validation and derived quantities."""

	def test_from_rate(self):
		"""Test alpha* = R / K and rho = 1 - k/K."""
		cfg = SaddleConfig.from_rate(4, 1, 2.0, 10.0)
		self.assertAlmostEqual(cfg.alpha_star, 0.5)
		self.assertAlmostEqual(cfg.rho, 0.75)
		self.assertAlmostEqual(cfg.p + cfg.q, 1.0)

	def test_invalid(self):
		"""Test k outside [0, K] and non-positive SNR."""
		with self.assertRaises(ValueError):
			SaddleConfig(2, 3, 1.0, 10.0)
		with self.assertRaises(ValueError):
			SaddleConfig(2, 1, 1.0, 0.0)

class TestCgf(unittest.TestCase):
	"""Test the per-draw cumulant generating function."""

	def test_zero_at_origin(self):
		"""Test Lambda(0) = 0 across conditioning levels and SNRs."""
		for K, k, gamma in [(2, 1, 10.0), (4, 1, 1000.0), (3, 2, 0.5)]:
			cfg = SaddleConfig.from_rate(K, k, 2.0, gamma)
			self.assertLess(abs(cgf(0.0, cfg)), 1e-12)

	def test_derivative_matches_difference(self):
		"""Test Lambda' against a centred difference of Lambda."""
		cfg = SaddleConfig.from_rate(2, 1, 2.0, 100.0)
		h = 1e-5
		for lam in (0.2, 0.5, 0.8):
			diff = (cgf(lam + h, cfg) - cgf(lam - h, cfg)) / (2 * h)
			self.assertAlmostEqual(cgf_derivatives(lam, cfg)[0], diff, places=4)

	def test_convex(self):
		"""Test that Lambda' increases and Lambda'' is positive."""
		cfg = SaddleConfig.from_rate(3, 1, 3.0, 100.0)
		slopes = []
		for lam in np.linspace(0.05, 0.9, 8):
			d1, d2 = cgf_derivatives(lam, cfg)
			slopes.append(d1)
			self.assertGreater(d2, 0.0)
		self.assertTrue(all(b > a for a, b in zip(slopes, slopes[1:])))

class TestConditionalBound(unittest.TestCase):
	"""Test the saddle-point bound and its numeric reference."""

	def test_trivial_ends(self):
		"""Test exactly 0 at k = K and exactly 1 at k = 0."""
		self.assertEqual(conditional_upper_bound(SaddleConfig.from_rate(3, 3, 2.0, 10.0)).value, 0.0)
		self.assertEqual(conditional_upper_bound(SaddleConfig.from_rate(3, 0, 2.0, 10.0)).value, 1.0)

	def test_rate_mismatch(self):
		"""Test that R must equal K alpha*."""
		with self.assertRaises(ValueError):
			conditional_upper_bound(SaddleConfig(2, 1, 1.0, 10.0), R=3.0)

	def test_saddle_in_unit_interval(self):
		"""Test 0 < lambda* < 1 at high SNR."""
		saddle = solve_saddle(SaddleConfig.from_rate(2, 1, 2.0, 1000.0))
		self.assertGreater(saddle.lambda_star, 0.0)
		self.assertLess(saddle.lambda_star, 1.0)
		self.assertGreater(saddle.psi, 0.0)

	def test_no_saddle_at_low_snr(self):
		"""Test that outage is not a tail event when draws sit below alpha*."""
		with self.assertRaises(NoSaddle):
			solve_saddle(SaddleConfig.from_rate(2, 1, 4.0, 0.5))

	def test_numeric_high_snr(self):
		"""Test the convolution against e / ((e - 1) gamma) for K = 2, k = 1, R = 2."""
		gamma = 1000.0
		expected = math.e / ((math.e - 1) * gamma)
		self.assertTrue(math.isclose(conditional_outage_numeric(2, 1, 2.0, gamma), expected, rel_tol=0.03))

	def test_bound_tightens_with_snr(self):
		"""Test the saddle-point to numeric ratio over 10..40 dB for K = 2, k = 1, R = 2."""
		ratios = []
		for db in (10.0, 20.0, 30.0, 40.0):
			gamma = 10.0 ** (db / 10.0)
			value = conditional_upper_bound(SaddleConfig.from_rate(2, 1, 2.0, gamma)).value
			ratios.append(value / conditional_outage_numeric(2, 1, 2.0, gamma))
		self.assertTrue(all(a > b for a, b in zip(ratios, ratios[1:])), ratios)
		self.assertLess(ratios[0], 1.6)
		# at 40 dB the value sits just under the exact outage
		self.assertGreater(ratios[-1], 0.9)
		self.assertLess(ratios[-1], 1.1)

	def test_numeric_ends(self):
		"""Test the numeric reference at k = K and k = 0."""
		self.assertEqual(conditional_outage_numeric(3, 3, 2.0, 10.0), 0.0)
		self.assertEqual(conditional_outage_numeric(3, 0, 2.0, 10.0), 1.0)

	def test_auto_falls_back(self):
		"""Test that 'auto' returns the numeric value when no saddle exists."""
		cfg = SaddleConfig.from_rate(2, 1, 4.0, 0.5)
		self.assertEqual(conditional_outage(cfg, "auto"), conditional_outage_numeric(2, 1, 4.0, 0.5))

	def test_unknown_method(self):
		"""Test that an unknown method is rejected."""
		with self.assertRaises(ValueError):
			conditional_outage(SaddleConfig.from_rate(2, 1, 2.0, 10.0), "exact")

class TestContentOutage(unittest.TestCase):
	"""Test the high- and low-SNR expressions."""

	def test_high_snr_decreasing(self):
		"""Test that the first-order outage falls with SNR and stays a probability."""
		values = [content_outage_high_snr(1, 3, 1, 2, 0.5, 2.0, g) for g in (100.0, 1000.0, 10000.0)]
		self.assertTrue(all(0.0 <= v <= 1.0 for v in values))
		self.assertTrue(values[0] > values[1] > values[2])

	def test_zero_rate(self):
		"""Test that a zero rate is never in outage."""
		self.assertEqual(content_outage_high_snr(2, 4, 2, 2, 0.5, 0.0, 100.0), 0.0)
		self.assertEqual(content_outage_low_snr(4, 2, 0.0, 100.0), 0.0)

	def test_low_snr_saturates(self):
		"""Test that every AP is in outage at very low SNR."""
		self.assertAlmostEqual(content_outage_low_snr(3, 2, 2.0, 1e-3), 1.0, places=6)

	def test_low_snr_bounded(self):
		"""Test the low-SNR value at moderate SNR."""
		value = content_outage_low_snr(3, 2, 2.0, 1.0)
		self.assertGreater(value, 0.0)
		self.assertLessEqual(value, 1.0)

class TestDiversity(unittest.TestCase):
	"""Test diversity gains."""

	def test_conditional_dmt(self):
		"""Test d = k (1 - r/K)."""
		self.assertEqual(conditional_dmt(4, 2, 1.0), (1.0, 1.5))
		self.assertEqual(conditional_dmt(4, 0, 0.0).d, 0.0)
		with self.assertRaises(ValueError):
			conditional_dmt(4, 2, 5.0)

	def test_dmr_sum_branch(self):
		"""Test that N above the branch threshold gives N (1 - r/K)."""
		self.assertAlmostEqual(dmr(10, 5, 4, 2, 0.5, 0.0), 5.0)
		self.assertAlmostEqual(dmr(10, 5, 4, 2, 0.5, 0.5), 3.75)
		self.assertAlmostEqual(dmr(10, 5, 4, 2, 0.5, 1.0), 2.5)
		self.assertAlmostEqual(dmr(10, 5, 4, 2, 0.5, 0.9), 2.75)
		self.assertAlmostEqual(dmr(10, 5, 4, 2, 0.5, 0.6), 3.5)

	def test_dmr_single_user(self):
		"""Test that a lone user always gets full diversity."""
		self.assertAlmostEqual(dmr(1, 3, 1, 2, 0.5, 0.0), 3.0)

	def test_dmr_competition_branch(self):
		"""Test MN - phi2 + eta K when N is below the threshold."""
		# phi2(10, 4, 20) = 43, threshold 42/9
		self.assertAlmostEqual(dmr(10, 4, 4, 2, 0.5, 0.0), 40 - 43 + 1.0)

	def test_region(self):
		"""Test per-user gains with a fixed-rate user at r = 0."""
		users = [UserRate(10, 5, 4, 2, r=1.0), UserRate(10, 5, 4, 2, R=2.0)]
		self.assertEqual(dmr_region(users), (2.5, 5.0))

	def test_user_rate_requires_one_operating_point(self):
		"""Test that R and r are exclusive."""
		with self.assertRaises(ValueError):
			UserRate(1, 3, 1, 2, R=2.0, r=1.0)
		with self.assertRaises(ValueError):
			UserRate(1, 3, 1, 2)

	def test_oer_symmetric_users(self):
		"""Test that identical users share one positive exponent."""
		user = UserRate(1, 3, 1, 2, R=2.0)
		first, second = oer([user, user], 1000.0)
		self.assertAlmostEqual(first, second)
		self.assertGreater(first, 0.0)

if __name__ == "__main__":
	# Run the tests
	unittest.main(verbosity=2)
