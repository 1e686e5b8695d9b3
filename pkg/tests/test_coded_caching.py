#!/usr/bin/env python3
"""
Unit tests for code parameters and the DMR-optimal demand.
"""

import unittest
import sys
import os

# Add the project root to the path so we can import from src
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src.coded_caching import (
	CodeParameters, ContentSpec, code_params, dmr_optimal_code, ideal_k, mbr_params, mds_params, msr_params,
	optimal_k,
)
from src.errors import InvalidDimensions, RoundingInfeasible

class TestRegeneratingCodes(unittest.TestCase):
	"""Test the MSR and MBR points."""

	def test_msr(self):
		"""Test (alpha, beta) for R = 2, K = 2, D = 3."""
		alpha, beta = msr_params(2.0, 2, 3)
		self.assertAlmostEqual(alpha, 1.0)
		self.assertAlmostEqual(beta, 1.5)

	def test_mbr(self):
		"""Test alpha = beta = 1.2 for R = 2, K = 2, D = 3."""
		alpha, beta = mbr_params(2.0, 2, 3)
		self.assertAlmostEqual(alpha, 1.2)
		self.assertEqual(alpha, beta)

	def test_single_fragment(self):
		"""Test that K = 1 stores and repairs the whole content under both schemes."""
		self.assertEqual(msr_params(3.0, 1, 4), (3.0, 3.0))
		self.assertAlmostEqual(mbr_params(3.0, 1, 4)[0], 3.0)

	def test_invalid_dimensions(self):
		"""Test K > D."""
		with self.assertRaises(InvalidDimensions):
			msr_params(2.0, 3, 2)
		with self.assertRaises(InvalidDimensions):
			mbr_params(2.0, 0, 2)

	def test_msr_repair_above_storage(self):
		"""Test beta >= alpha with equality only at K = 1."""
		for D in range(1, 8):
			for K in range(1, D + 1):
				alpha, beta = msr_params(1.0, K, D)
				if K == 1:
					self.assertAlmostEqual(alpha, beta)
				else:
					self.assertGreater(beta, alpha)

	def test_mbr_stores_more_than_msr(self):
		"""Test that MBR needs at least the MSR per-node storage."""
		for D in range(2, 8):
			for K in range(1, D + 1):
				self.assertGreaterEqual(mbr_params(1.0, K, D)[0], msr_params(1.0, K, D)[0] - 1e-15)

class TestCodeParameters(unittest.TestCase):
	"""Test CodeParameters and code_params."""

	def test_mds(self):
		"""Test that MDS codes carry no repair figures."""
		params = code_params("mds", 3.0, 3)
		self.assertEqual((params.n, params.k, params.d, params.beta), (3, 3, None, None))
		self.assertAlmostEqual(params.alpha, 1.0)
		self.assertEqual(mds_params(4.0, 2), (2.0, None))

	def test_default_length(self):
		"""Test that n defaults to the repair degree."""
		params = code_params("MSR", 2.0, 2, 3)
		self.assertEqual((params.n, params.k, params.d), (3, 2, 3))

	def test_bad_code(self):
		"""Test that k above n is rejected."""
		with self.assertRaises(InvalidDimensions):
			CodeParameters("MSR", 2, 3, 3, 1.0, 1.0)
		with self.assertRaises(InvalidDimensions):
			code_params("RS", 2.0, 2, 3)

class TestOptimalDemand(unittest.TestCase):
	"""Test demand proportional to content size."""

	def test_exact_integers(self):
		"""Test R = (2, 3) on five APs."""
		self.assertEqual(optimal_k(ContentSpec((2, 3)), 5), (2, 3))

	def test_equal_sizes(self):
		"""Test that equal contents with M = N get one AP each."""
		self.assertEqual(optimal_k(ContentSpec((1.5,) * 4), 4), (1, 1, 1, 1))

	def test_largest_remainder(self):
		"""Test that ties in the remainder go to the lower index."""
		contents = ContentSpec((2, 2))
		self.assertEqual(ideal_k(contents, 5), (2.5, 2.5))
		self.assertEqual(optimal_k(contents, 5), (3, 2))

	def test_no_rounding(self):
		"""Test that rounding='none' returns the real ideal."""
		self.assertEqual(optimal_k(ContentSpec((2, 2)), 5, rounding="none"), (2.5, 2.5))

	def test_too_many_contents(self):
		"""Test that more contents than APs cannot all get K >= 1."""
		with self.assertRaises(RoundingInfeasible):
			optimal_k(ContentSpec((1, 1, 1)), 2)

	def test_bad_sizes(self):
		"""Test that content sizes must be positive."""
		with self.assertRaises(ValueError):
			ContentSpec((1.0, 0.0))

class TestOptimalCode(unittest.TestCase):
	"""Test the DMR-optimal code per content."""

	def test_two_contents(self):
		"""Test codes (5, 2, 2) and (5, 3, 3) with unit storage per node."""
		codes = dmr_optimal_code(ContentSpec((2, 3)), 5)
		self.assertEqual([(c.n, c.k, c.d) for c in codes], [(5, 2, 2), (5, 3, 3)])
		for code in codes:
			self.assertAlmostEqual(code.alpha, 1.0)
		self.assertEqual([c.beta for c in codes], [2.0, 3.0])

	def test_single_content(self):
		"""Test that a single content is spread over every AP."""
		(code,) = dmr_optimal_code(ContentSpec((4.0,)), 5)
		self.assertEqual((code.n, code.k, code.d), (5, 5, 5))
		self.assertAlmostEqual(code.alpha, 0.8)

if __name__ == "__main__":
	# Run the tests
	unittest.main(verbosity=2)
