#!/usr/bin/env python3
"""
Unit tests for bipartite instances, the edge-count thresholds and the
edge-list format.
"""

import unittest
import sys
import os
import math
import tempfile

import numpy as np

# Add the project root to the path so we can import from src
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src.bipartite_graph import (
	BipartiteInstance, branch_threshold, edge_count_thresholds, extremal_phi2_instance, from_csi,
	from_edge_list, matching_upper_bound, ordered_users, phi1, phi2, read_edge_list, sample_rbg,
	to_edge_list, UPPER_BOUND_MAX_SIDE, validate_demand, write_edge_list,
)
from src.errors import InfeasibleDemand

def seven_edge_instance():
	"""Four users, three APs, K_m = 2, L = 3, seven edges."""
	adjacency = np.zeros((4, 3), dtype=np.uint8)
	for m, n in [(0, 0), (0, 2), (1, 0), (2, 1), (2, 2), (3, 1), (3, 2)]:
		adjacency[m, n] = 1
	return BipartiteInstance(4, 3, 3, (2, 2, 2, 2), adjacency)

class TestDemandValidation(unittest.TestCase):
	"""Test validate_demand."""

	def test_valid(self):
		"""Test that a feasible demand comes back as a tuple."""
		self.assertEqual(validate_demand([2, 2], 3, 2), (2, 2))

	def test_demand_above_ap_count(self):
		"""Test K_m > N."""
		with self.assertRaises(InfeasibleDemand):
			validate_demand([3, 1], 2, 5)

	def test_total_above_capacity(self):
		"""Test sum(K) > N*L."""
		with self.assertRaises(InfeasibleDemand):
			validate_demand([2, 2, 2], 2, 2)

	def test_zero_demand(self):
		"""Test that every user needs at least one AP."""
		with self.assertRaises(InfeasibleDemand):
			validate_demand([0, 1], 3, 1)

class TestInstances(unittest.TestCase):
	"""Test instance construction."""

	def test_all_ones_is_complete(self):
		"""Test that all-ones CSI gives the complete bipartite graph."""
		inst = from_csi(np.ones((3, 4), dtype=np.uint8), 2, 2)
		self.assertEqual(inst.edge_count, 12)
		self.assertEqual(inst.K, (2, 2, 2))

	def test_seven_edges(self):
		"""Test the seven-edge sample."""
		inst = seven_edge_instance()
		self.assertEqual(inst.edge_count, 7)
		self.assertEqual(inst.edges()[:2], [(0, 0), (0, 2)])

	def test_infeasible_instance(self):
		"""Test that construction validates the demand."""
		with self.assertRaises(InfeasibleDemand):
			from_csi(np.ones((1, 2), dtype=np.uint8), [3], 1)

	def test_adjacency_is_read_only(self):
		"""Test that an instance cannot be modified after construction."""
		inst = seven_edge_instance()
		with self.assertRaises(ValueError):
			inst.adjacency[0, 0] = 0

	def test_random_graph_extremes(self):
		"""Test p = 0 (complete) and p = 1 (empty)."""
		self.assertEqual(sample_rbg(3, 4, 0.0, seed=1).edge_count, 12)
		self.assertEqual(sample_rbg(3, 4, 1.0, seed=1).edge_count, 0)

	def test_random_graph_frequency(self):
		"""Test that edges appear with probability 1 - p."""
		inst = sample_rbg(100, 1000, 0.5, seed=3, L=100)
		self.assertAlmostEqual(inst.edge_count / 100_000, 0.5, delta=0.007)

class TestThresholds(unittest.TestCase):
	"""Test phi1, phi2 and the branch threshold."""

	def test_phi1(self):
		"""Test phi1 reference values."""
		self.assertEqual(phi1(10, 5, [2] * 10, 1), 46)
		self.assertEqual(phi1(1, 7, [1], 1), 0)
		self.assertEqual(phi1(2, 3, [2, 2], 1), 4)

	def test_phi2(self):
		"""Test phi2 reference values."""
		self.assertEqual(phi2(10, 4, 20), 43)
		self.assertEqual(phi2(6, 3, 12), 20)
		self.assertEqual(phi2(4, 4, 9), 8)

	def test_branch_threshold(self):
		"""Test (phi2 - eta K) / (M - 1) for the ten-user configuration."""
		self.assertAlmostEqual(branch_threshold(10, 4, 20, 2, 0.5), 42 / 9)

	def test_single_user_threshold(self):
		"""Test that one user always takes the sum-over-kappa branch."""
		self.assertEqual(branch_threshold(1, 1, 2, 2, 0.5), -math.inf)

	def test_thresholds_of_instance(self):
		"""Test the bundle of thresholds for one user."""
		inst = from_csi(np.ones((10, 5), dtype=np.uint8), 2, 4)
		t = edge_count_thresholds(inst, 1, 0.5)
		self.assertEqual((t.phi1, t.phi2), (46, 43))

	def test_ordered_users(self):
		"""Test ascending demand order with index tie-break."""
		self.assertEqual(ordered_users([3, 1, 2, 1]), [1, 3, 2, 0])

class TestMatchingBound(unittest.TestCase):
	"""Test the subset-minimum matching bound."""

	def test_complete_graph(self):
		"""Test K_{4,3} with K = 2 and L = 3."""
		inst = from_csi(np.ones((4, 3), dtype=np.uint8), 2, 3)
		self.assertEqual(matching_upper_bound(inst), 8)

	def test_seven_edge_sample(self):
		"""Test the seven-edge sample."""
		self.assertEqual(matching_upper_bound(seven_edge_instance()), 7)

	def test_empty(self):
		"""Test that an empty graph has bound zero."""
		inst = from_csi(np.zeros((2, 3), dtype=np.uint8), 1, 1)
		self.assertEqual(matching_upper_bound(inst), 0)

	def test_unbalanced_beyond_twenty_two(self):
		"""Test that M + N above 22 is handled when the smaller side is small."""
		inst = from_csi(np.ones((30, 3), dtype=np.uint8), 1, 10)
		self.assertEqual(matching_upper_bound(inst), 30)

	def test_enumeration_limit(self):
		"""Test that both sides above the limit raise ValueError."""
		side = UPPER_BOUND_MAX_SIDE + 1
		inst = from_csi(np.ones((side, side), dtype=np.uint8), 1, 1)
		with self.assertRaises(ValueError):
			matching_upper_bound(inst)

class TestExtremalInstance(unittest.TestCase):
	"""Test the phi2-edge construction."""

	def test_edge_count(self):
		"""Test that the construction has exactly phi2 edges."""
		inst = extremal_phi2_instance(4, 6, 2, 2, seed=5)
		self.assertEqual(inst.edge_count, phi2(4, 2, 8))

	def test_one_short(self):
		"""Test that the subset bound is one below the total demand."""
		inst = extremal_phi2_instance(3, 5, 2, [2, 2, 2], seed=1)
		self.assertEqual(matching_upper_bound(inst), 5)

class TestEdgeList(unittest.TestCase):
	"""Test the plain-text edge list."""

	def test_text_format(self):
		"""Test the header, demand line and 1-based edges."""
		text = to_edge_list(seven_edge_instance())
		lines = text.splitlines()
		self.assertEqual(lines[0], "4 3 3")
		self.assertEqual(lines[1], "K: 2 2 2 2")
		self.assertEqual(lines[2], "1 1")

	def test_parse_with_comments(self):
		"""Test that comments and blank lines are ignored."""
		text = "# sample\n2 2 1\nK: 1 1\n\n1 2  # edge\n2 1\n"
		inst = from_edge_list(text)
		np.testing.assert_array_equal(inst.adjacency, [[0, 1], [1, 0]])

	def test_bad_edge(self):
		"""Test that edges outside the graph are rejected."""
		with self.assertRaises(ValueError):
			from_edge_list("1 1 1\nK: 1\n1 2\n")

	def test_file_round_trip(self):
		"""Test writing and reading a file."""
		inst = seven_edge_instance()
		with tempfile.TemporaryDirectory() as tmp:
			path = os.path.join(tmp, "sample.txt")
			write_edge_list(inst, path)
			self.assertEqual(read_edge_list(path), inst)

if __name__ == "__main__":
	# Run the tests
	unittest.main(verbosity=2)
