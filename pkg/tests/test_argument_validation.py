#!/usr/bin/env python3
"""
Test suite for argument validation in fog-match.py

This module tests the command-line argument parsing, the merging of flags
with config files and defaults, and the exit codes returned by run().
"""

import unittest
import sys
import os
import tempfile
from unittest.mock import patch
from io import StringIO

# Add the project root to the path so we can import from src
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src import constants

# fog-match.py is not an importable module name
import importlib.util
fog_match_path = os.path.join(project_root, "fog-match.py")
spec = importlib.util.spec_from_file_location("fog_match", fog_match_path)
if spec and spec.loader:
	fog_match = importlib.util.module_from_spec(spec)
	spec.loader.exec_module(fog_match)
else:
	raise ImportError("Could not load fog-match.py module")

def parse(*argv):
	with patch('sys.argv', ['fog-match.py', *argv]):
		return fog_match.parse_arguments()

def run_quietly(*argv):
	"""Parse and run a command line with stdout and stderr captured."""
	args = parse(*argv)
	with patch('sys.stdout', new_callable=StringIO), patch('sys.stderr', new_callable=StringIO):
		return fog_match.run(args)

class TestArgumentParsing(unittest.TestCase):
	"""Test the argparse front end."""

	def test_conditional_values(self):
		"""Test that flags are converted to their types."""
		args = parse('conditional', '--K', '3', '--k', '1', '--R', '1.5', '--snr-db', '10,20')
		self.assertEqual(args.command, 'conditional')
		self.assertEqual((args.K, args.k, args.R), (3, 1, 1.5))
		self.assertEqual(args.snr_db, (10.0, 20.0))

	def test_unset_flags_are_none(self):
		"""Test that flags not given stay None so config and defaults can fill them."""
		args = parse('content', '--N', '5')
		self.assertIsNone(args.trials)
		self.assertIsNone(args.escalate)

	def test_snr_range(self):
		"""Test the lo:hi:step form."""
		args = parse('conditional', '--snr-db', '0:20:10')
		self.assertEqual(args.snr_db, (0.0, 10.0, 20.0))

	def test_invalid_values_exit_with_usage(self):
		"""Test that bad values exit with code 1."""
		for argv in (
			('conditional', '--K', '0'),
			('conditional', '--snr-db', '40:0:5'),
			('content', '--trials', 'many'),
			('compare-codes', '--schemes', 'MSR,RS'),
			('content', '--rate', '2', '--rates', '2,3'),
			('compare-codes', '--parameter-set', '2,3,1'),
		):
			with self.subTest(argv=argv):
				with patch('sys.stderr', new_callable=StringIO):
					with self.assertRaises(SystemExit) as cm:
						parse(*argv)
				self.assertEqual(cm.exception.code, constants.EXIT_USAGE)

	def test_unknown_suite(self):
		"""Test that verify only accepts known suite names."""
		with patch('sys.stderr', new_callable=StringIO):
			with self.assertRaises(SystemExit) as cm:
				parse('verify', '--suite', 'nonsense')
		self.assertEqual(cm.exception.code, constants.EXIT_USAGE)

class TestOptionResolution(unittest.TestCase):
	"""Test flags over config file over defaults."""

	def test_defaults(self):
		"""Test that defaults fill every option."""
		with patch.dict(os.environ, {constants.SEED_ENV_VAR: ""}):
			opts = fog_match.resolve_options(parse('conditional'))
		self.assertEqual(opts['K'], 2)
		self.assertEqual(opts['trials'], constants.DEFAULT_CONDITIONAL_TRIALS)
		self.assertEqual(opts['seed'], constants.DEFAULT_SEED)
		self.assertEqual(opts['snr_db'][0], 0.0)

	def test_config_file_below_flags(self):
		"""Test that config values apply unless a flag is given."""
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "run.conf")
			with open(path, "wt") as f:
				f.write("# conditional run\ntrials = 500\nk = 2\nmax-trials = 1000\n")
			opts = fog_match.resolve_options(parse('conditional', '--config', path, '--k', '1'))
		self.assertEqual(opts['k'], 1)
		self.assertEqual(opts['trials'], 500)
		self.assertEqual(opts['max_trials'], 1000)

	def test_seed_from_environment(self):
		"""Test that FOGMATCH_SEED sets the default seed."""
		with patch.dict(os.environ, {constants.SEED_ENV_VAR: "99"}):
			self.assertEqual(fog_match.resolve_options(parse('conditional'))['seed'], 99)
			self.assertEqual(fog_match.resolve_options(parse('conditional', '--seed', '3'))['seed'], 3)

	def test_parameter_grid(self):
		"""Test repeated --parameter-set flags and the semicolon form in a config file."""
		opts = fog_match.resolve_options(parse('compare-codes', '--parameter-set', '2,3,1,1', '--parameter-set', '2,4,2,2'))
		self.assertEqual(opts['parameter_sets'], ((2, 3, 1, 1), (2, 4, 2, 2)))
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "grid.conf")
			with open(path, "wt") as f:
				f.write("parameter-sets = 6,4,3,2;8,4,4,2\n")
			opts = fog_match.resolve_options(parse('compare-codes', '--config', path))
		self.assertEqual(opts['parameter_sets'], ((6, 4, 3, 2), (8, 4, 4, 2)))

class TestExitCodes(unittest.TestCase):
	"""Test the exit-code protocol of run()."""

	def test_no_command(self):
		"""Test that a missing command is a usage error."""
		self.assertEqual(run_quietly(), constants.EXIT_USAGE)

	def test_k_above_K(self):
		"""Test that k > K is a usage error."""
		code = run_quietly('conditional', '--K', '2', '--k', '3', '--snr-db', '10', '--trials', '100', '--no-escalate')
		self.assertEqual(code, constants.EXIT_USAGE)

	def test_unknown_config_key(self):
		"""Test that a config file with an unknown key is a usage error."""
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "bad.conf")
			with open(path, "wt") as f:
				f.write("bandwidth = 5\n")
			self.assertEqual(run_quietly('conditional', '--config', path), constants.EXIT_USAGE)

	def test_infeasible_demand(self):
		"""Test that K above N exits with code 2."""
		code = run_quietly('content', '--M', '1', '--N', '5', '--K', '7', '--rate', '2', '--snr-db', '10')
		self.assertEqual(code, constants.EXIT_INFEASIBLE)

	def test_rounding_infeasible(self):
		"""Test that more contents than APs exits with code 2."""
		code = run_quietly('content', '--N', '2', '--rates', '1,1,1', '--optimal-k', '--snr-db', '10')
		self.assertEqual(code, constants.EXIT_INFEASIBLE)

	def test_missing_rate(self):
		"""Test that content needs a rate source."""
		self.assertEqual(run_quietly('content', '--M', '2', '--N', '5'), constants.EXIT_USAGE)

	def test_injected_violation(self):
		"""Test that a failed verification suite exits with code 3."""
		code = run_quietly('verify', '--quick', '--suite', 'feasibility', '--inject-violation')
		self.assertEqual(code, constants.EXIT_VERIFY_FAILED)

	def test_codes_suite_passes(self):
		"""Test that a passing suite exits with code 0."""
		self.assertEqual(run_quietly('verify', '--quick', '--suite', 'codes'), constants.EXIT_OK)

	def test_content_slope_suite_passes(self):
		"""Test the tilted pipeline exponent for M=10, N=5, L=4, K=2 at r = 0.9."""
		self.assertEqual(run_quietly('verify', '--quick', '--suite', 'content-slope'), constants.EXIT_OK)

class TestResultSources(unittest.TestCase):
	"""Test the source column written by each command."""

	def run_to_file(self, *argv):
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "out.csv")
			code = run_quietly(*argv, '--output', path)
			self.assertEqual(code, constants.EXIT_OK)
			with open(path, "rb") as f:
				return f.read()

	def test_conditional_has_unconditioned_curve(self):
		"""Test that conditional also reports the outage without conditioning."""
		data = self.run_to_file('conditional', '--K', '2', '--k', '1', '--R', '2', '--snr-db', '10',
								'--trials', '1000', '--no-escalate')
		self.assertIn(b",mc,", data)
		self.assertIn(b",unconditional,", data)

	def test_compare_codes_grid(self):
		"""Test that every system of a parameter grid gets its own tagged curve."""
		data = self.run_to_file('compare-codes', '--schemes', 'MSR', '--parameter-set', '2,3,1,1',
								'--parameter-set', '2,4,2,2', '--snr-db', '10', '--trials', '100', '--no-escalate')
		self.assertIn(b"mc_msr_M2_N3_L1_K1", data)
		self.assertIn(b"mc_msr_M2_N4_L2_K2", data)
		self.assertIn(b"2,3,1,1;2,4,2,2", data)

class TestReproducibility(unittest.TestCase):
	"""Test that result files depend only on seed and configuration."""

	def test_identical_bytes(self):
		"""Test two conditional runs with the same seed."""
		with tempfile.TemporaryDirectory() as tmp:
			outputs = []
			for name in ("a.csv", "b.csv"):
				path = os.path.join(tmp, name)
				code = run_quietly('conditional', '--K', '2', '--k', '1', '--R', '2', '--snr-db', '10,20',
								   '--trials', '2000', '--no-escalate', '--seed', '7', '--output', path)
				self.assertEqual(code, constants.EXIT_OK)
				self.assertTrue(os.path.exists(path + constants.MANIFEST_SUFFIX))
				with open(path, "rb") as f:
					outputs.append(f.read())
			self.assertEqual(outputs[0], outputs[1])
			self.assertIn(b"# seed: 7", outputs[0])

if __name__ == "__main__":
	# Run the tests
	unittest.main(verbosity=2)
