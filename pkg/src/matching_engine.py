"""
Fairness maximum b-matching between users and Fog-APs.

Three solvers share one result type:

- solve_message_passing: belief propagation on the bipartite graph with a
  Jacobi schedule (every vertex reads the previous iteration's beliefs).
  Each vertex's b-th and (b+1)-th largest incoming beliefs come from
  sufficient_selection, which stops reading beliefs as soon as no unseen
  one can enter the top b+1.
- solve_exact: integral max-flow through networkx, optionally steered to
  the maximum-weight optimum under the tie-breaking jitter.
- greedy_matching: a shortcut that is only trusted when it saturates
  every user.

complete_fairness then tops up every unsaturated user with randomly drawn
filler APs that still have spare resource blocks.

Vertices are numbered users first (0..M-1), then APs (M..M+N-1).
"""

import heapq
import logging
from dataclasses import dataclass, field, replace
from collections import deque

import numpy as np
import networkx as nx
from networkx.algorithms import flow

from .bipartite_graph import BipartiteInstance
from .channel_model import trial_rng
from .constants import (
	DEFAULT_ETA, DEFAULT_EPSILON, DEFAULT_SEED, ITERATION_CAP_FACTOR, JITTER_FRACTION, MESSAGE_PASSING_RESTARTS,
)
from .errors import CompletionInfeasible, RankOutOfRange

logger = logging.getLogger(__name__)

_COST_RESOLUTION = 1_000_000
_FILLER_SPREAD = 1_000

# -------

@dataclass(frozen=True)
class FairnessPolicy:
	"""
	Tie-breaking and fairness settings.

	eta and epsilon describe the targeted non-outage fraction and the
	probability of reaching it; they are carried into reports but nothing
	enforces a particular pair beyond uniform random tie-breaking.
	"""
	eta: float = DEFAULT_ETA
	epsilon: float = DEFAULT_EPSILON
	jitter_scale: float | None = None
	seed: int = DEFAULT_SEED

	def __post_init__(self):
		if not 0.0 < self.eta < 1.0:
			raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
		if not 0.0 < self.epsilon < 1.0:
			raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
		if self.jitter_scale is not None and not self.jitter_scale > 0.0:
			raise ValueError(f"jitter_scale must be positive, got {self.jitter_scale}")

	def scale_for(self, M: int, N: int) -> float:
		"""Jitter magnitude for an M x N instance; must stay below 1/(2MN)."""
		limit = 1.0 / (2 * M * N)
		if self.jitter_scale is None:
			return JITTER_FRACTION * limit
		if self.jitter_scale >= limit:
			raise ValueError(f"jitter_scale {self.jitter_scale} must be below 1/(2MN) = {limit}")
		return self.jitter_scale

	def with_seed(self, seed: int) -> 'FairnessPolicy':
		return replace(self, seed=int(seed))

@dataclass(frozen=True)
class MatchingSolution:
	X: np.ndarray
	k: tuple
	saturated: tuple
	A_star: tuple
	fillers: tuple = ()
	iterations: int = 0
	converged: bool = True
	solver: str = "exact"

	@property
	def cardinality(self) -> int:
		return int(self.X.sum())

def _solution_from_X(X, inst: BipartiteInstance, iterations=0, converged=True, solver="exact"):
	X = np.asarray(X, dtype=np.uint8)
	k = tuple(int(v) for v in X.sum(axis=1))
	return MatchingSolution(
		X=X,
		k=k,
		saturated=tuple(k[m] == inst.K[m] for m in range(inst.M)),
		A_star=tuple(tuple(int(n) for n in np.flatnonzero(X[m])) for m in range(inst.M)),
		fillers=tuple(() for _ in range(inst.M)),
		iterations=iterations,
		converged=converged,
		solver=solver,
	)

def check_feasible(sol: MatchingSolution, inst: BipartiteInstance, completed=True):
	"""
	Raise AssertionError if the solution breaks a degree constraint: matched
	edges off the graph, AP loads above L, or (once completed) a user whose
	AP set does not have exactly K_m members.
	"""
	X = sol.X
	if np.any(X > inst.adjacency):
		raise AssertionError("matching uses an edge that is not in the graph")
	if np.any(X.sum(axis=1) > np.array(inst.K)):
		raise AssertionError("a user is matched to more APs than it demands")
	load = np.zeros(inst.N, dtype=int)
	for m, aps in enumerate(sol.A_star):
		if len(set(aps)) != len(aps):
			raise AssertionError(f"user {m + 1} has a repeated AP")
		if completed and len(aps) != inst.K[m]:
			raise AssertionError(f"user {m + 1} holds {len(aps)} APs, demands {inst.K[m]}")
		load[list(aps)] += 1
	if np.any(load > inst.L):
		raise AssertionError(f"AP load {load.max()} exceeds L={inst.L}")

# --- Selection ---

def selection(values, k: int):
	"""k-th largest element of a multiset, duplicates counted."""
	values = np.asarray(values, dtype=float).ravel()
	if not 1 <= k <= values.size:
		raise RankOutOfRange(f"rank {k} outside a multiset of size {values.size}")
	return float(np.partition(values, values.size - k)[values.size - k])

def _full_scan(incoming, b):
	"""(mu, nu) from the whole incoming multiset padded with b slack zeros."""
	padded = np.concatenate([incoming[np.isfinite(incoming)], np.zeros(b), [-np.inf]])
	return -selection(padded, b), -selection(padded, b + 1)

# --- Belief state ---

def jitter_weights(inst: BipartiteInstance, policy: FairnessPolicy, rng=None):
	"""1 + U(0, jitter_scale) on present edges, -inf elsewhere."""
	rng = trial_rng(policy.seed) if rng is None else rng
	scale = policy.scale_for(inst.M, inst.N)
	jitter = rng.uniform(0.0, scale, size=(inst.M, inst.N))
	return np.where(inst.adjacency > 0, 1.0 + jitter, -np.inf)

@dataclass
class BeliefState:
	"""
	One iteration's message-passing state.

	to_ap[m, n] is the belief user m sends AP n, to_user[m, n] the one AP n
	sends user m. mu and nu hold, per vertex, the negated b-th and (b+1)-th
	largest incoming beliefs that produced the vertex's current outgoing
	beliefs. weight_index keeps each vertex's top-c neighbours by weight;
	nu_index orders each side's vertices by nu, largest first.
	"""
	inst: BipartiteInstance
	weights: np.ndarray
	to_ap: np.ndarray
	to_user: np.ndarray
	mu: np.ndarray
	nu: np.ndarray
	weight_index: list
	nu_index: tuple
	cache_size: int
	last_inspections: int = field(default=0)

	@classmethod
	def initial(cls, inst: BipartiteInstance, weights, cache_size=None):
		M, N = inst.M, inst.N
		if cache_size is None:
			cache_size = max(max(inst.K), inst.L) + 1
		weight_index = []
		for m in range(M):
			weight_index.append(_top_by_weight(weights[m, :], cache_size))
		for n in range(N):
			weight_index.append(_top_by_weight(weights[:, n], cache_size))
		state = cls(
			inst=inst,
			weights=weights,
			to_ap=weights.copy(),
			to_user=weights.copy(),
			mu=np.zeros(M + N),
			nu=np.zeros(M + N),
			weight_index=weight_index,
			nu_index=(),
			cache_size=cache_size,
		)
		state.refresh_nu_index()
		return state

	def refresh_nu_index(self):
		M = self.inst.M
		self.nu_index = (
			np.argsort(-self.nu[:M], kind='stable'),
			np.argsort(-self.nu[M:], kind='stable'),
		)

	def bound(self, vertex: int) -> int:
		M = self.inst.M
		return self.inst.K[vertex] if vertex < M else self.inst.L

	def view(self, vertex: int):
		"""Incoming beliefs, edge weights, neighbours' nu and their nu order for one vertex."""
		M = self.inst.M
		if vertex < M:
			return self.to_user[vertex, :], self.weights[vertex, :], self.nu[M:], self.nu_index[1]
		n = vertex - M
		return self.to_ap[:, n], self.weights[:, n], self.nu[:M], self.nu_index[0]

def _top_by_weight(row, c):
	present = np.flatnonzero(np.isfinite(row))
	order = present[np.argsort(-row[present], kind='stable')]
	return order[:c]

def full_selection(state: BeliefState, vertex: int):
	incoming, _, _, _ = state.view(vertex)
	return _full_scan(incoming, state.bound(vertex))

def sufficient_selection(state: BeliefState, vertex: int):
	"""
	(mu, nu) of one vertex, reading incoming beliefs lazily.

	A neighbour's belief is at most its edge weight plus its own nu, so the
	largest unseen belief is bounded by rho = (largest unseen cached weight)
	+ (largest unseen nu). Neighbours are read alternately in weight order
	and in nu order until the running (b+1)-th largest is at least rho.
	"""
	incoming, weights, nu_other, d = state.view(vertex)
	b = state.bound(vertex)
	cache = state.weight_index[vertex]
	neighbour = np.isfinite(weights)

	candidates = [0.0] * b + [-np.inf]
	heapq.heapify(candidates)
	seen = set()
	wp = dp = 0
	inspections = 0
	turn = 0
	while True:
		while wp < len(cache) and cache[wp] in seen:
			wp += 1
		while dp < len(d) and (d[dp] in seen or not neighbour[d[dp]]):
			dp += 1
		if dp >= len(d):
			break
		w_bound = weights[cache[wp]] if wp < len(cache) else weights[cache[-1]]
		rho = w_bound + nu_other[d[dp]]
		if candidates[0] >= rho:
			break
		if turn == 0 and wp < len(cache):
			other = cache[wp]
		else:
			other = d[dp]
		turn ^= 1
		seen.add(other)
		inspections += 1
		value = incoming[other]
		if value > candidates[0]:
			heapq.heapreplace(candidates, value)
	state.last_inspections = inspections
	top = sorted(candidates, reverse=True)
	return -top[b - 1], -top[b]

def _select(incoming, b):
	"""Top-b present edges by incoming belief, keeping only positive beliefs."""
	present = np.flatnonzero(np.isfinite(incoming))
	order = present[np.argsort(-incoming[present], kind='stable')][:b]
	chosen = np.zeros(incoming.shape, dtype=bool)
	chosen[order[incoming[order] > 0.0]] = True
	return chosen

def propagate_messages(state: BeliefState, selector):
	"""One Jacobi iteration; returns the next state and both sides' selections."""
	inst = state.inst
	M, N = inst.M, inst.N
	mu = np.empty(M + N)
	nu = np.empty(M + N)
	for v in range(M + N):
		mu[v], nu[v] = selector(state, v)
	if np.any(mu > nu):
		raise AssertionError("b-th selection fell below the (b+1)-th")

	W = state.weights
	user_sel = np.zeros((M, N), dtype=bool)
	ap_sel = np.zeros((M, N), dtype=bool)
	to_ap = np.full((M, N), -np.inf)
	to_user = np.full((M, N), -np.inf)
	present = np.isfinite(W)
	for m in range(M):
		row = state.to_user[m, :]
		in_top = row >= -mu[m]
		to_ap[m, :] = np.where(present[m, :], W[m, :] + np.where(in_top, nu[m], mu[m]), -np.inf)
		user_sel[m, :] = _select(row, inst.K[m])
	for n in range(N):
		col = state.to_ap[:, n]
		in_top = col >= -mu[M + n]
		to_user[:, n] = np.where(present[:, n], W[:, n] + np.where(in_top, nu[M + n], mu[M + n]), -np.inf)
		ap_sel[:, n] = _select(col, inst.L)

	# the previous iteration's buffers are dropped with the old state
	nxt = replace(state, to_ap=to_ap, to_user=to_user, mu=mu, nu=nu, last_inspections=0)
	nxt.refresh_nu_index()
	return nxt, user_sel, ap_sel

def augmenting_path_exists(X, inst: BipartiteInstance) -> bool:
	"""BFS in the residual graph from users below their demand to APs below capacity."""
	X = np.asarray(X, dtype=bool)
	A = inst.adjacency > 0
	user_load = X.sum(axis=1)
	ap_load = X.sum(axis=0)
	queue = deque(m for m in range(inst.M) if user_load[m] < inst.K[m])
	seen_users = set(queue)
	seen_aps = set()
	while queue:
		m = queue.popleft()
		for n in np.flatnonzero(A[m] & ~X[m]):
			if n in seen_aps:
				continue
			seen_aps.add(n)
			if ap_load[n] < inst.L:
				return True
			for other in np.flatnonzero(X[:, n]):
				if other not in seen_users:
					seen_users.add(other)
					queue.append(other)
	return False

def _run_beliefs(inst, weights, selector, max_iters):
	"""(X, iterations) once the selections settle, (None, max_iters) if they never do."""
	state = BeliefState.initial(inst, weights)
	previous = None
	for iteration in range(1, max_iters + 1):
		state, user_sel, ap_sel = propagate_messages(state, selector)
		X = user_sel & ap_sel
		stable = previous is not None and np.array_equal(X, previous)
		# no augmenting path certifies a maximum b-matching
		if stable and not augmenting_path_exists(X, inst):
			return X, iteration
		previous = X
	return None, max_iters

def solve_message_passing(inst: BipartiteInstance, policy: FairnessPolicy, max_iters=None,
						  rng=None, weights=None, sufficient=True, restarts=MESSAGE_PASSING_RESTARTS) -> MatchingSolution:
	"""
	Belief-propagation b-matching. Returns once the set of edges selected by
	both of their ends is unchanged over two consecutive iterations and
	admits no augmenting path. A run that reaches max_iters is repeated
	with freshly drawn jitter, up to `restarts` times; after that it falls
	back to solve_exact and reports converged=False.
	"""
	if max_iters is None:
		max_iters = ITERATION_CAP_FACTOR * (inst.M + inst.N)
	rng = trial_rng(policy.seed) if rng is None else rng
	if weights is None:
		weights = jitter_weights(inst, policy, rng)
	if inst.edge_count == 0:
		return _solution_from_X(np.zeros((inst.M, inst.N)), inst, 0, True, "message-passing")

	selector = sufficient_selection if sufficient else full_selection
	total = 0
	for attempt in range(restarts + 1):
		if attempt:
			weights = jitter_weights(inst, policy, rng)
			logger.debug("message passing restart %d with fresh jitter", attempt)
		X, iterations = _run_beliefs(inst, weights, selector, max_iters)
		total += iterations
		if X is not None:
			logger.debug("message passing converged after %d iterations", total)
			return _solution_from_X(X, inst, total, True, "message-passing")

	logger.warning("message passing did not converge in %d runs of %d iterations; using the exact solver",
				   restarts + 1, max_iters)
	exact = solve_exact(inst, weights=weights)
	return replace(exact, iterations=total, converged=False, solver="message-passing")

# --- Exact and greedy solvers ---

def _flow_network(inst: BipartiteInstance, weights=None, scale=None):
	G = nx.DiGraph()
	G.add_node('s')
	G.add_node('t')
	for m in range(inst.M):
		G.add_edge('s', ('u', m), capacity=inst.K[m], weight=0)
	for n in range(inst.N):
		G.add_edge(('a', n), 't', capacity=inst.L, weight=0)
	for m, n in inst.edges():
		cost = 0
		if weights is not None:
			# networkx needs integer costs; jitter in [0, scale) maps onto [0, _COST_RESOLUTION)
			cost = -int(round((weights[m, n] - 1.0) / scale * _COST_RESOLUTION))
		G.add_edge(('u', m), ('a', n), capacity=1, weight=cost)
	return G

def solve_exact(inst: BipartiteInstance, weights=None) -> MatchingSolution:
	"""
	Maximum-cardinality b-matching by integral max-flow: source to user m
	with capacity K_m, user to AP with capacity 1 per edge, AP to sink with
	capacity L. With jitter weights the cheapest maximum flow is taken, which
	is the maximum-weight matching among the maximum-cardinality ones.
	"""
	X = np.zeros((inst.M, inst.N), dtype=np.uint8)
	if inst.edge_count == 0:
		return _solution_from_X(X, inst)
	if weights is None:
		G = _flow_network(inst)
		_, flow_dict = flow.maximum_flow(G, 's', 't')
	else:
		finite = weights[np.isfinite(weights)]
		scale = max(float(finite.max() - 1.0), 1e-300)
		G = _flow_network(inst, weights, scale)
		flow_dict = nx.max_flow_min_cost(G, 's', 't')
	for m in range(inst.M):
		for node, units in flow_dict[('u', m)].items():
			if units > 0:
				X[m, node[1]] = 1
	return _solution_from_X(X, inst)

def greedy_matching(inst: BipartiteInstance, rng) -> MatchingSolution:
	"""
	Randomized greedy fill. Only a maximum matching when every user ends up
	saturated, which callers must check.
	"""
	X = np.zeros((inst.M, inst.N), dtype=np.uint8)
	load = np.zeros(inst.N, dtype=int)
	for m in rng.permutation(inst.M):
		need = inst.K[m]
		for n in rng.permutation(inst.N):
			if need == 0:
				break
			if inst.adjacency[m, n] and load[n] < inst.L:
				X[m, n] = 1
				load[n] += 1
				need -= 1
	return _solution_from_X(X, inst, solver="greedy")

def solve(inst: BipartiteInstance, policy: FairnessPolicy, solver="exact", rng=None) -> MatchingSolution:
	"""Fairness maximum b-matching with the named solver, skipping work when greedy saturates everyone."""
	rng = trial_rng(policy.seed) if rng is None else rng
	greedy = greedy_matching(inst, rng)
	if all(greedy.saturated):
		return greedy
	weights = jitter_weights(inst, policy, rng)
	if solver == "exact":
		return solve_exact(inst, weights=weights)
	if solver == "message-passing":
		return solve_message_passing(inst, policy, weights=weights)
	raise ValueError(f"unknown solver {solver!r}")

# --- Fairness completion ---

def complete_fairness(sol: MatchingSolution, inst: BipartiteInstance, policy: FairnessPolicy,
					  rng=None) -> MatchingSolution:
	"""
	Give every unsaturated user K_m - k_m filler APs, drawn uniformly from
	the APs it does not already hold that still have a spare resource block.
	"""
	if all(sol.saturated):
		return sol
	rng = trial_rng(policy.seed, 1) if rng is None else rng
	load = sol.X.sum(axis=0).astype(int)
	held = [set(aps) for aps in sol.A_star]
	fillers = [set() for _ in range(inst.M)]
	short = [m for m in rng.permutation(inst.M) if len(held[m]) < inst.K[m]]
	for m in short:
		need = inst.K[m] - len(held[m])
		open_aps = [n for n in range(inst.N) if load[n] < inst.L and n not in held[m]]
		if len(open_aps) < need:
			return _complete_by_flow(sol, inst, rng)
		for n in rng.choice(open_aps, size=need, replace=False):
			n = int(n)
			held[m].add(n)
			fillers[m].add(n)
			load[n] += 1
	return _with_fillers(sol, fillers)

def _with_fillers(sol, fillers):
	A_star = tuple(tuple(sorted(set(base) | f)) for base, f in zip(sol.A_star, fillers))
	return replace(sol, A_star=A_star, fillers=tuple(tuple(sorted(f)) for f in fillers))

def _complete_by_flow(sol, inst, rng):
	"""Filler assignment as a flow problem, for when random draws paint themselves into a corner."""
	load = sol.X.sum(axis=0).astype(int)
	G = nx.DiGraph()
	need_total = 0
	for m in rng.permutation(inst.M):
		m = int(m)
		need = inst.K[m] - len(sol.A_star[m])
		if need <= 0:
			continue
		need_total += need
		G.add_edge('s', ('u', m), capacity=need)
		for n in rng.permutation(inst.N):
			n = int(n)
			if n not in sol.A_star[m] and load[n] < inst.L:
				G.add_edge(('u', m), ('a', n), capacity=1)
	for n in range(inst.N):
		if load[n] < inst.L:
			G.add_edge(('a', n), 't', capacity=int(inst.L - load[n]))
	value = 0
	if 't' in G:
		value, flow_dict = flow.maximum_flow(G, 's', 't')
	if value < need_total:
		# the spare blocks sit on APs the short users already hold
		logger.debug("residual capacity supplies %d of %d filler APs; re-placing the matching", value, need_total)
		return _complete_jointly(sol, inst, rng)
	fillers = [set() for _ in range(inst.M)]
	for node, out in flow_dict.items():
		if isinstance(node, tuple) and node[0] == 'u':
			fillers[node[1]] = {a[1] for a, units in out.items() if units > 0}
	logger.debug("filler APs assigned by flow for %d users", sum(1 for f in fillers if f))
	return _with_fillers(sol, fillers)

def _complete_jointly(sol, inst, rng):
	"""
	Matching and fillers placed together: a min-cost flow over every (user,
	AP) pair that must carry all of sum(K). Graph edges are priced so far
	below filler pairs that the flow keeps as many matched edges as any
	complete assignment can; random costs inside each class break ties.
	"""
	total = inst.K_sum
	# one graph edge more always outweighs any rearrangement of the fillers
	edge_cost = -2 * _FILLER_SPREAD * total
	G = nx.DiGraph()
	for m in range(inst.M):
		G.add_edge('s', ('u', m), capacity=inst.K[m], weight=0)
		for n in range(inst.N):
			cost = int(rng.integers(0, _FILLER_SPREAD))
			if inst.adjacency[m, n]:
				cost += edge_cost
			G.add_edge(('u', m), ('a', n), capacity=1, weight=cost)
	for n in range(inst.N):
		G.add_edge(('a', n), 't', capacity=inst.L, weight=0)
	flow_dict = nx.max_flow_min_cost(G, 's', 't')

	X = np.zeros((inst.M, inst.N), dtype=np.uint8)
	fillers = [set() for _ in range(inst.M)]
	placed = 0
	for m in range(inst.M):
		for node, units in flow_dict[('u', m)].items():
			if units <= 0:
				continue
			placed += 1
			if inst.adjacency[m, node[1]]:
				X[m, node[1]] = 1
			else:
				fillers[m].add(node[1])
	if placed < total:
		raise CompletionInfeasible(f"only {placed} of {total} AP slots can be placed")
	if X.sum() < sol.cardinality:
		logger.warning("completion kept %d of %d matched edges", int(X.sum()), sol.cardinality)
	rebuilt = _solution_from_X(X, inst, sol.iterations, sol.converged, sol.solver)
	return _with_fillers(rebuilt, fillers)

def format_solution(sol: MatchingSolution) -> str:
	"""'m: n1 n2 ...' per user, 1-based, filler APs marked with '*'."""
	lines = []
	for m, aps in enumerate(sol.A_star):
		filler = set(sol.fillers[m]) if sol.fillers else set()
		parts = [f"{n + 1}*" if n in filler else str(n + 1) for n in aps]
		lines.append(f"{m + 1}: " + " ".join(parts))
	return "\n".join(lines) + "\n"
