"""
Monte Carlo estimation of content outage.

Full pipeline, per SNR point and trial: Rayleigh gains, mutual information
per RB, one-bit CSI at alpha*_m = R_m/K_m, b-matching AP selection with
fairness completion, then user m is in outage when the mutual information
summed over its APs falls short of R_m.

Every trial draws from a generator keyed by (seed, SNR index, trial index),
so chunks of trials can run in any order or in worker processes and still
reduce to the same totals.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple
from multiprocessing import Pool

import numpy as np

from .bipartite_graph import from_csi, validate_demand
from .channel_model import (
	ap_outage_prob, conditional_sample_above, conditional_sample_below, mutual_information,
	quantize_csi, sample_gains_for, trial_rng,
)
from .coded_caching import SCHEMES, code_params
from .constants import (
	CONDITIONAL_CHUNK, DEFAULT_CONDITIONAL_MAX_TRIALS, DEFAULT_CONDITIONAL_TRIALS, DEFAULT_MAX_TRIALS,
	DEFAULT_SEED, DEFAULT_TRIALS, MIN_OUTAGE_EVENTS, TRIAL_CHUNK, WILSON_Z,
)
from .errors import InsufficientData
from .matching_engine import FairnessPolicy, check_feasible, complete_fairness, solve

logger = logging.getLogger(__name__)

# -------

@dataclass(frozen=True)
class ExperimentConfig:
	"""
	One content-outage sweep. Set R (fixed rate, nats per user) or r
	(multiplexing gains, R_m = r_m ln gamma at each point), not both.
	"""
	M: int
	N: int
	L: int
	K: tuple
	gammas: tuple
	R: tuple | None = None
	r: tuple | None = None
	trials: int = DEFAULT_TRIALS
	max_trials: int = DEFAULT_MAX_TRIALS
	escalate: bool = True
	seed: int = DEFAULT_SEED
	policy: FairnessPolicy = field(default_factory=FairnessPolicy)
	solver: str = "exact"
	users: tuple | None = None
	tilt: float | None = None
	target_user: int = 0
	workers: int = 1
	scheme: str = "MSR"
	D: int | None = None

	def __post_init__(self):
		K = validate_demand(self.K, self.N, self.L)
		if len(K) != self.M:
			raise ValueError(f"K has {len(K)} entries for M={self.M} users")
		object.__setattr__(self, 'K', K)
		if (self.R is None) == (self.r is None):
			raise ValueError("set exactly one of R (fixed rate) and r (multiplexing gain)")
		for name in ('R', 'r'):
			value = getattr(self, name)
			if value is not None:
				value = tuple(float(x) for x in value)
				if len(value) != self.M:
					raise ValueError(f"{name} has {len(value)} entries for M={self.M} users")
				if any(x < 0 for x in value):
					raise ValueError(f"{name} entries must be non-negative")
				object.__setattr__(self, name, value)
		gammas = tuple(float(x) for x in self.gammas)
		if not gammas or gammas[0] <= 0 or any(b <= a for a, b in zip(gammas, gammas[1:])):
			raise ValueError("the SNR grid must be non-empty, positive and strictly increasing")
		object.__setattr__(self, 'gammas', gammas)
		if self.trials < 1 or self.max_trials < self.trials:
			raise ValueError(f"need 1 <= trials <= max_trials, got {self.trials} and {self.max_trials}")
		if self.tilt is not None and not 0.0 < self.tilt < 1.0:
			raise ValueError(f"tilt must lie in (0, 1), got {self.tilt}")
		if not 0 <= self.target_user < self.M:
			raise ValueError(f"target user {self.target_user + 1} outside 1..{self.M}")
		users = tuple(range(self.M)) if self.users is None else tuple(int(u) for u in self.users)
		if any(not 0 <= u < self.M for u in users):
			raise ValueError(f"reported users must lie in 1..{self.M}")
		object.__setattr__(self, 'users', users)
		if self.scheme.upper() not in SCHEMES:
			raise ValueError(f"unknown code scheme {self.scheme!r}")
		if self.D is not None and not max(self.K) <= self.D <= self.N:
			raise ValueError(f"repair degree D={self.D} must lie in max(K)..N")

	def rates_at(self, gamma):
		if self.R is not None:
			return np.array(self.R)
		return np.maximum(np.array(self.r) * math.log(gamma), 0.0)

	def thresholds_at(self, gamma):
		"""Per-AP fragment size alpha*_m of the configured code; MBR stores more than R/K."""
		D = self.N if self.D is None else self.D
		return np.array([code_params(self.scheme, R, K, D).alpha for R, K in zip(self.rates_at(gamma), self.K)])

@dataclass(frozen=True)
class OutageCurve:
	user: int
	gammas: tuple
	p_hat: tuple
	ci_lo: tuple
	ci_hi: tuple
	trials: tuple
	events: tuple
	exponent: tuple | None = None
	weighted: bool = False

@dataclass(frozen=True)
class ConditionalConfig:
	K: int
	k: int
	R: float
	gamma: float
	trials: int = DEFAULT_CONDITIONAL_TRIALS
	max_trials: int = DEFAULT_CONDITIONAL_MAX_TRIALS
	escalate: bool = True

	def __post_init__(self):
		if not 0 <= self.k <= self.K:
			raise ValueError(f"need 0 <= k <= K, got k={self.k}, K={self.K}")
		if not self.R > 0 or not self.gamma > 0:
			raise ValueError("R and gamma must be positive")
		if self.trials < 1 or self.max_trials < self.trials:
			raise ValueError(f"need 1 <= trials <= max_trials, got {self.trials} and {self.max_trials}")

	@property
	def rho(self) -> float:
		return 1.0 - self.k / self.K

class Estimate(NamedTuple):
	p_hat: float
	ci_lo: float
	ci_hi: float
	trials: int
	events: int

	@property
	def sigma(self) -> float:
		"""Binomial standard deviation of p_hat."""
		return math.sqrt(max(self.p_hat * (1.0 - self.p_hat), 0.0) / self.trials)

# --- Intervals ---

def wilson_interval(events, trials, z=WILSON_Z):
	if trials <= 0:
		return 0.0, 1.0
	p = events / trials
	denom = 1.0 + z * z / trials
	centre = (p + z * z / (2 * trials)) / denom
	half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
	return max(0.0, centre - half), min(1.0, centre + half)

def weighted_interval(sum_w, sum_w2, trials, z=WILSON_Z):
	"""Normal interval for a mean of likelihood-ratio weights."""
	mean = sum_w / trials
	var = max(sum_w2 / trials - mean * mean, 0.0) / trials
	half = z * math.sqrt(var)
	return max(0.0, mean - half), min(1.0, mean + half)

# --- Content outage ---

def _trial(cfg: ExperimentConfig, g_index, gamma, t, rates, alpha):
	"""One pipeline run; returns (per-user outage flags, likelihood-ratio weight)."""
	rng = trial_rng(cfg.seed, g_index, t)
	info = mutual_information(sample_gains_for(rng, cfg.M, cfg.N), gamma)
	weight = 1.0
	if cfg.tilt is not None:
		u = cfg.target_user
		p = ap_outage_prob(alpha[u], gamma).p
		tilted = max(p, cfg.tilt)
		up = rng.random(cfg.N) >= tilted
		info[u] = np.where(
			up,
			conditional_sample_above(alpha[u], gamma, cfg.N, rng),
			conditional_sample_below(alpha[u], gamma, cfg.N, rng) if alpha[u] > 0 else 0.0,
		)
		weight = float(np.prod(np.where(up, (1.0 - p) / (1.0 - tilted), p / tilted)))
	inst = from_csi(quantize_csi(info, alpha), cfg.K, cfg.L)
	sol = solve(inst, cfg.policy, cfg.solver, rng=rng)
	sol = complete_fairness(sol, inst, cfg.policy, rng=rng)
	check_feasible(sol, inst)
	outage = np.array([info[m, list(sol.A_star[m])].sum() < rates[m] for m in range(cfg.M)])
	return outage, weight

def _run_chunk(cfg, g_index, gamma, start, count):
	"""Sums over trials start..start+count: (weighted outages, squared weights, event counts)."""
	rates = cfg.rates_at(gamma)
	alpha = cfg.thresholds_at(gamma)
	sum_w = np.zeros(cfg.M)
	sum_w2 = np.zeros(cfg.M)
	events = np.zeros(cfg.M, dtype=np.int64)
	for t in range(start, start + count):
		outage, weight = _trial(cfg, g_index, gamma, t, rates, alpha)
		sum_w += outage * weight
		sum_w2 += outage * weight * weight
		events += outage
	return sum_w, sum_w2, events

def _chunks(start, count):
	return [(s, min(TRIAL_CHUNK, start + count - s)) for s in range(start, start + count, TRIAL_CHUNK)]

def simulate_content_outage(cfg: ExperimentConfig) -> dict:
	"""
	Outage curve per reported user. Trials at a point double until every
	reported user with a positive rate has MIN_OUTAGE_EVENTS outages or
	max_trials is reached.
	"""
	gammas = cfg.gammas
	per_point = []
	pool = Pool(cfg.workers) if cfg.workers > 1 else None
	try:
		for g_index, gamma in enumerate(gammas):
			positive = [u for u in cfg.users if cfg.rates_at(gamma)[u] > 0]
			sum_w = np.zeros(cfg.M)
			sum_w2 = np.zeros(cfg.M)
			events = np.zeros(cfg.M, dtype=np.int64)
			done = 0
			batch = cfg.trials
			while True:
				jobs = [(cfg, g_index, gamma, s, c) for s, c in _chunks(done, batch)]
				results = pool.starmap(_run_chunk, jobs) if pool else [_run_chunk(*job) for job in jobs]
				for w, w2, e in results:
					sum_w += w
					sum_w2 += w2
					events += e
				done += batch
				fewest = min((events[u] for u in positive), default=None)
				if not cfg.escalate or fewest is None or fewest >= MIN_OUTAGE_EVENTS or done >= cfg.max_trials:
					break
				batch = min(done, cfg.max_trials - done)
				logger.debug("gamma=%.4g: %d outage events after %d trials, escalating", gamma, fewest, done)
			per_point.append((sum_w, sum_w2, events, done))
	finally:
		if pool:
			pool.close()
			pool.join()

	curves = {}
	for u in cfg.users:
		p_hat, lo, hi, trials, counts = [], [], [], [], []
		for sum_w, sum_w2, events, done in per_point:
			if cfg.tilt is None:
				p_hat.append(int(events[u]) / done)
				interval = wilson_interval(int(events[u]), done)
			else:
				p_hat.append(float(sum_w[u]) / done)
				interval = weighted_interval(float(sum_w[u]), float(sum_w2[u]), done)
			lo.append(interval[0])
			hi.append(interval[1])
			trials.append(done)
			counts.append(int(events[u]))
		curve = OutageCurve(u, cfg.gammas, tuple(p_hat), tuple(lo), tuple(hi), tuple(trials), tuple(counts),
							weighted=cfg.tilt is not None)
		try:
			curve = _with_exponent(curve)
		except InsufficientData:
			pass
		curves[u] = curve
	return curves

def _with_exponent(curve: OutageCurve) -> OutageCurve:
	return replace(curve, exponent=estimate_exponent(curve))

def unconditioned_single_user(K, N, R, gamma, trials, seed=DEFAULT_SEED) -> Estimate:
	"""Outage of a lone user holding K of N APs with one RB each."""
	cfg = ExperimentConfig(M=1, N=N, L=1, K=(K,), R=(R,), gammas=(gamma,), trials=trials,
						   max_trials=trials, escalate=False, seed=seed)
	curve = simulate_content_outage(cfg)[0]
	return Estimate(curve.p_hat[0], curve.ci_lo[0], curve.ci_hi[0], curve.trials[0], curve.events[0])

# --- Conditional outage ---

def _count_escalating(draw_sums, R, trials, max_trials, escalate, seed, stream) -> Estimate:
	"""
	Count sums below R over vectorized batches of trials, doubling the trial
	count until MIN_OUTAGE_EVENTS outages are seen or max_trials is reached.
	draw_sums(rows, rng) returns one sum of mutual informations per row.
	"""
	events = 0
	done = 0
	batch = trials
	chunk_index = 0
	while True:
		remaining = batch
		while remaining > 0:
			rows = min(remaining, CONDITIONAL_CHUNK)
			rng = trial_rng(seed, *stream, chunk_index)
			chunk_index += 1
			events += int(np.count_nonzero(draw_sums(rows, rng) < R))
			remaining -= rows
		done += batch
		if not escalate or events >= MIN_OUTAGE_EVENTS or done >= max_trials:
			break
		batch = min(done, max_trials - done)
	lo, hi = wilson_interval(events, done)
	return Estimate(events / done, lo, hi, done, events)

def simulate_conditional_outage(cfg: ConditionalConfig, seed, stream=()) -> Estimate:
	"""
	Pr{sum of k non-outage draws and K - k outage draws < R}, with draws
	from the exact conditional laws by inverse transform at alpha* = R/K.
	"""
	alpha = cfg.R / cfg.K

	def draw_sums(rows, rng):
		total = np.zeros(rows)
		if cfg.k > 0:
			total += conditional_sample_above(alpha, cfg.gamma, (rows, cfg.k), rng).sum(axis=1)
		if cfg.K - cfg.k > 0:
			total += conditional_sample_below(alpha, cfg.gamma, (rows, cfg.K - cfg.k), rng).sum(axis=1)
		return total

	return _count_escalating(draw_sums, cfg.R, cfg.trials, cfg.max_trials, cfg.escalate, seed, stream)

def simulate_unconditioned_outage(cfg: ConditionalConfig, seed, stream=()) -> Estimate:
	"""
	Pr{sum of K unconditioned Rayleigh mutual informations < R}: the outage
	of one user holding K APs with no conditioning on how many are in
	outage. cfg.k is ignored.
	"""
	def draw_sums(rows, rng):
		gains = sample_gains_for(rng, rows, cfg.K)
		return mutual_information(gains, cfg.gamma).sum(axis=1)

	return _count_escalating(draw_sums, cfg.R, cfg.trials, cfg.max_trials, cfg.escalate, seed, stream)

# --- Exponents ---

def estimate_exponent(curve: OutageCurve):
	"""
	-d ln p / d ln gamma at every grid point with a nonzero estimate, by
	centred differences (one-sided at the ends of the usable points).
	Points with p_hat = 0 get None.
	"""
	gamma_ln = np.log(np.array(curve.gammas, dtype=float))
	p = np.array(curve.p_hat, dtype=float)
	usable = np.flatnonzero(p > 0)
	if usable.size < 3:
		raise InsufficientData(f"{usable.size} usable points; at least 3 are needed for a slope")
	slope = -np.gradient(np.log(p[usable]), gamma_ln[usable])
	exponent = [None] * p.size
	for i, value in zip(usable, slope):
		exponent[i] = float(value)
	return tuple(exponent)
