"""
Random bipartite graph of users and Fog-APs.

An instance is one sample of the graph: user m is joined to AP n when the
one-bit CSI of that link is 1. User vertices carry degree bound K_m (APs
demanded), AP vertices carry L (resource blocks per AP).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel_model import trial_rng
from .errors import InfeasibleDemand

# 2**20 subset rows stay within a few hundred MB
UPPER_BOUND_MAX_SIDE = 20

# -------

def validate_demand(K, N: int, L: int):
	"""Raise InfeasibleDemand unless 1 <= K_m <= N for every user and sum(K) <= N*L."""
	K = [int(k) for k in K]
	if not K:
		raise InfeasibleDemand("at least one user is required")
	if N < 1 or L < 1:
		raise InfeasibleDemand(f"N and L must be at least 1 (N={N}, L={L})")
	for m, k in enumerate(K):
		if k < 1:
			raise InfeasibleDemand(f"user {m + 1} demands K={k}; every user needs at least one AP")
		if k > N:
			raise InfeasibleDemand(f"user {m + 1} demands K={k} APs but only N={N} exist")
	if sum(K) > N * L:
		raise InfeasibleDemand(f"total demand {sum(K)} exceeds N*L = {N * L} resource blocks")
	return tuple(K)

@dataclass(frozen=True)
class BipartiteInstance:
	M: int
	N: int
	L: int
	K: tuple
	adjacency: np.ndarray = field(repr=False, compare=False)

	def __post_init__(self):
		adjacency = np.array(self.adjacency, dtype=np.uint8)
		if adjacency.shape != (self.M, self.N):
			raise ValueError(f"adjacency shape {adjacency.shape} does not match M x N = {self.M} x {self.N}")
		if np.any(adjacency > 1):
			raise ValueError("adjacency must be binary")
		if len(self.K) != self.M:
			raise InfeasibleDemand(f"demand vector has {len(self.K)} entries for M={self.M} users")
		object.__setattr__(self, 'K', validate_demand(self.K, self.N, self.L))
		adjacency.setflags(write=False)
		object.__setattr__(self, 'adjacency', adjacency)

	@property
	def K_sum(self) -> int:
		return sum(self.K)

	@property
	def edge_count(self) -> int:
		return int(self.adjacency.sum())

	def edges(self):
		"""(m, n) pairs of present edges, 0-based, row-major."""
		return [(int(m), int(n)) for m, n in zip(*np.nonzero(self.adjacency))]

	def __eq__(self, other):
		if not isinstance(other, BipartiteInstance):
			return NotImplemented
		return (self.M, self.N, self.L, self.K) == (other.M, other.N, other.L, other.K) \
			and np.array_equal(self.adjacency, other.adjacency)

def from_csi(csi, K, L: int) -> BipartiteInstance:
	"""Instance whose edges are the 1-entries of a quantized CSI matrix."""
	csi = np.asarray(csi)
	M, N = csi.shape
	if np.isscalar(K) or np.ndim(K) == 0:
		K = [int(K)] * M
	return BipartiteInstance(M, N, L, tuple(int(k) for k in K), csi)

def sample_rbg(M: int, N: int, p, seed, K=None, L=None) -> BipartiteInstance:
	"""
	Edge (m, n) present independently with probability 1 - p_m.

	Without K and L the instance gets K_m = 1 and L = M, which is always feasible.
	"""
	p = np.broadcast_to(np.asarray(p, dtype=float), (M,))
	if np.any(p < 0) or np.any(p > 1):
		raise ValueError("edge-absence probabilities must lie in [0, 1]")
	rng = trial_rng(seed)
	adjacency = rng.random((M, N)) >= p[:, None]
	K = [1] * M if K is None else K
	L = M if L is None else L
	return from_csi(adjacency.astype(np.uint8), K, L)

def degree_bounds(inst: BipartiteInstance):
	"""b(v) for user vertices (K_m) and AP vertices (L)."""
	return np.array(inst.K, dtype=int), np.full(inst.N, inst.L, dtype=int)

# --- Edge counts that force a single unsaturated vertex ---

class EdgeCountThresholds(NamedTuple):
	phi1: int
	phi2: int
	threshold: float

def ordered_users(K):
	"""User indices sorted by demand ascending, original index breaking ties."""
	return sorted(range(len(K)), key=lambda m: (K[m], m))

def phi1(M: int, N: int, K_ordered, m: int) -> int:
	"""(M-1)N + K_{m:M} - 1 with K_ordered ascending and m a 1-based rank."""
	if not 1 <= m <= M:
		raise ValueError(f"rank m={m} outside 1..{M}")
	return (M - 1) * N + int(K_ordered[m - 1]) - 1

def phi2(M: int, L: int, K_sum: int) -> int:
	"""(M-L)(ceil(K_sum/L) - 1) + K_sum - 1."""
	if K_sum < 1 or L < 1:
		raise ValueError(f"phi2 needs K_sum >= 1 and L >= 1 (K_sum={K_sum}, L={L})")
	return (M - L) * (-(-K_sum // L) - 1) + K_sum - 1

def branch_threshold(M: int, L: int, K_sum: int, K_m, eta: float) -> float:
	"""
	(phi2 - eta*K_m) / (M - 1). N at or above this selects the sum-over-kappa
	form of the high-SNR outage; a single user has no competitors, so M = 1
	always selects it.
	"""
	if M == 1:
		return -math.inf
	return (phi2(M, L, K_sum) - eta * K_m) / (M - 1)

def edge_count_thresholds(inst: BipartiteInstance, m: int, eta: float) -> EdgeCountThresholds:
	"""Thresholds for the user of 1-based rank m in the ascending demand order."""
	K_ordered = sorted(inst.K)
	K_m = K_ordered[m - 1]
	return EdgeCountThresholds(
		phi1(inst.M, inst.N, K_ordered, m),
		phi2(inst.M, inst.L, inst.K_sum),
		branch_threshold(inst.M, inst.L, inst.K_sum, K_m, eta),
	)

def matching_upper_bound(inst: BipartiteInstance) -> int:
	"""
	min over vertex subsets X of b(V \\ X) + |E(X)|.

	Every subset is covered: the enumeration runs over the subsets of the
	smaller side, and for each of them the best choice on the other side
	is taken vertex by vertex (a vertex outside X pays its bound, one inside
	pays its edges into X, so each picks the smaller).
	"""
	A = inst.adjacency.astype(np.int64)
	user_b, ap_b = degree_bounds(inst)
	if inst.M > inst.N:
		A = A.T
		user_b, ap_b = ap_b, user_b
	side = A.shape[0]
	if side > UPPER_BOUND_MAX_SIDE:
		raise ValueError(f"subset enumeration limited to {UPPER_BOUND_MAX_SIDE} vertices on the smaller side, got {side}")
	masks = ((np.arange(1 << side)[:, None] >> np.arange(side)) & 1).astype(np.int64)
	outside = (1 - masks) @ user_b
	inside_edges = masks @ A
	values = outside + np.minimum(inside_edges, ap_b[None, :]).sum(axis=1)
	return int(values.min())

def extremal_phi2_instance(M: int, N: int, L: int, K, seed=0) -> BipartiteInstance:
	"""
	An instance with exactly phi2 edges whose maximum b-matching leaves one
	user short by one AP.

	t = ceil(K_sum/L) - 1 APs are joined to every user; the remaining
	K_sum - 1 - t*L edges all go to one further AP. Which APs and users play
	these roles is drawn from the seed.
	"""
	if np.isscalar(K):
		K = [int(K)] * M
	K = validate_demand(K, N, L)
	K_sum = sum(K)
	t = -(-K_sum // L) - 1
	extra = K_sum - 1 - t * L
	if N < t + 1:
		raise InfeasibleDemand(f"construction needs N >= {t + 1} APs, got {N}")
	if extra > M:
		raise ValueError(f"construction needs {extra} users for the spill-over AP, got M={M}")
	rng = trial_rng(seed)
	aps = rng.permutation(N)
	users = rng.permutation(M)
	adjacency = np.zeros((M, N), dtype=np.uint8)
	adjacency[:, aps[:t]] = 1
	adjacency[users[:extra], aps[t]] = 1
	degree = adjacency.sum(axis=1)
	if any(K[m] > degree[m] for m in range(M)):
		raise ValueError("demands exceed the construction's user degrees; more than one user would be short")
	return BipartiteInstance(M, N, L, K, adjacency)

# --- Plain-text edge list ---

def to_edge_list(inst: BipartiteInstance) -> str:
	"""'M N L' header, 'K: k1 ... kM', then one 1-based 'm n' line per edge."""
	lines = [f"{inst.M} {inst.N} {inst.L}", "K: " + " ".join(str(k) for k in inst.K)]
	lines += [f"{m + 1} {n + 1}" for m, n in inst.edges()]
	return "\n".join(lines) + "\n"

def from_edge_list(text: str) -> BipartiteInstance:
	rows = [line.split('#', 1)[0].strip() for line in text.splitlines()]
	rows = [row for row in rows if row]
	if len(rows) < 2:
		raise ValueError("edge list needs a 'M N L' header and a 'K:' line")
	try:
		M, N, L = (int(x) for x in rows[0].split())
	except ValueError:
		raise ValueError(f"bad header line: {rows[0]!r}")
	if not rows[1].startswith('K:'):
		raise ValueError(f"second line must start with 'K:', got {rows[1]!r}")
	K = [int(x) for x in rows[1][2:].split()]
	adjacency = np.zeros((M, N), dtype=np.uint8)
	for row in rows[2:]:
		m, n = (int(x) for x in row.split())
		if not (1 <= m <= M and 1 <= n <= N):
			raise ValueError(f"edge ({m}, {n}) outside {M} x {N}")
		adjacency[m - 1, n - 1] = 1
	return BipartiteInstance(M, N, L, tuple(K), adjacency)

def write_edge_list(inst: BipartiteInstance, path):
	with open(path, "wt", encoding="utf-8") as f:
		f.write(to_edge_list(inst))

def read_edge_list(path) -> BipartiteInstance:
	with open(path, "rt", encoding="utf-8") as f:
		return from_edge_list(f.read())
