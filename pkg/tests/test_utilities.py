#!/usr/bin/env python3
"""
Unit tests for the command-line value parsers in utilities.py.
"""

import unittest
import sys
import os

# Add the project root to the path so we can import from utilities.py
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from utilities import (
	format_snr_range, parse_bool, parse_float, parse_float_list, parse_int, parse_int_list, parse_parameter_set,
	parse_parameter_sets, parse_scheme_list, parse_snr_range,
)

class TestSnrRange(unittest.TestCase):
	"""Test cases for the parse_snr_range function."""

	def test_range(self):
		"""Test lo:hi:step including the upper end."""
		self.assertEqual(parse_snr_range("0:40:10"), (0.0, 10.0, 20.0, 30.0, 40.0))
		self.assertEqual(parse_snr_range("0:1:0.1")[-1], 1.0)

	def test_range_off_grid(self):
		"""Test that an upper end between grid points is left out."""
		self.assertEqual(parse_snr_range("0:12:5"), (0.0, 5.0, 10.0))

	def test_list_and_single(self):
		"""Test comma lists and single values."""
		self.assertEqual(parse_snr_range("0,10,25"), (0.0, 10.0, 25.0))
		self.assertEqual(parse_snr_range("30"), (30.0,))
		self.assertEqual(parse_snr_range("-10:0:5"), (-10.0, -5.0, 0.0))

	def test_invalid(self):
		"""Test strings that are not SNR grids."""
		for text in ("", "0:40", "0:40:0", "40:0:5", "10,5", "a:b:c", "0 : 40 : 5", "10,10"):
			with self.subTest(text=text):
				self.assertIsNone(parse_snr_range(text))

	def test_format_round_trip(self):
		"""Test the compact form of even and uneven grids."""
		self.assertEqual(format_snr_range((0.0, 5.0, 10.0)), "0:10:5")
		self.assertEqual(format_snr_range((0.0, 10.0, 25.0)), "0,10,25")
		self.assertEqual(parse_snr_range(format_snr_range((0.0, 5.0, 10.0))), (0.0, 5.0, 10.0))
		self.assertEqual(format_snr_range(()), "")

class TestLists(unittest.TestCase):
	"""Test list parsers."""

	def test_float_list(self):
		"""Test '1.5,2,3e-1'."""
		self.assertEqual(parse_float_list("1.5, 2,3e-1"), (1.5, 2.0, 0.3))
		self.assertIsNone(parse_float_list("1.5,,2"))
		self.assertIsNone(parse_float_list("nan"))

	def test_int_list(self):
		"""Test '2,3,2'."""
		self.assertEqual(parse_int_list("2,3,2"), (2, 3, 2))
		self.assertEqual(parse_int_list("4"), (4,))
		self.assertIsNone(parse_int_list("2.5"))

	def test_scheme_list(self):
		"""Test case folding and unknown names."""
		known = ("MDS", "MBR", "MSR")
		self.assertEqual(parse_scheme_list("msr, MBR", known), ("MSR", "MBR"))
		self.assertIsNone(parse_scheme_list("MSR,RS", known))
		self.assertIsNone(parse_scheme_list("", known))

	def test_parameter_set(self):
		"""Test 'M,N,L,K' and its rejects."""
		self.assertEqual(parse_parameter_set("6,4,3,2"), (6, 4, 3, 2))
		self.assertIsNone(parse_parameter_set("6,4,3"))
		self.assertIsNone(parse_parameter_set("6,0,3,2"))
		self.assertIsNone(parse_parameter_set("6,4,3,2.5"))

	def test_parameter_sets(self):
		"""Test the semicolon-separated grid used in config files."""
		self.assertEqual(parse_parameter_sets("6,4,3,2; 8,4,4,2"), ((6, 4, 3, 2), (8, 4, 4, 2)))
		self.assertIsNone(parse_parameter_sets("6,4,3,2;8,4"))
		self.assertIsNone(parse_parameter_sets(""))

class TestScalars(unittest.TestCase):
	"""Test scalar parsers."""

	def test_bool(self):
		"""Test the accepted spellings."""
		for text in ("true", "Yes", "on", "1", True):
			self.assertIs(parse_bool(text), True)
		for text in ("false", "NO", "off", "0", False):
			self.assertIs(parse_bool(text), False)
		self.assertIsNone(parse_bool("maybe"))

	def test_int(self):
		"""Test integers, passthrough and rejects."""
		self.assertEqual(parse_int(" 42 "), 42)
		self.assertEqual(parse_int(-3), -3)
		self.assertIsNone(parse_int("4.0"))
		self.assertIsNone(parse_int(True))

	def test_float(self):
		"""Test reals, passthrough and rejects."""
		self.assertEqual(parse_float("2.5e1"), 25.0)
		self.assertEqual(parse_float(3), 3.0)
		self.assertIsNone(parse_float("inf"))
		self.assertIsNone(parse_float("two"))

if __name__ == "__main__":
	# Run the tests
	unittest.main(verbosity=2)
