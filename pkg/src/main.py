"""
The experiment commands behind fog-match.py.

Each cmd_* function takes the command's fully resolved settings (flags over
config file over defaults), runs the experiment, writes the result CSV and
returns an exit code. Errors derived from FogMatchError carry their own exit
code and are mapped by the caller.
"""

import logging
import sys

import numpy as np

from .analytic_engine import (
	SaddleConfig, conditional_dmt, conditional_outage, content_outage_high_snr, content_outage_low_snr, dmr,
)
from .channel_model import db_to_linear
from .coded_caching import ContentSpec, code_params, optimal_k
from .constants import DEFAULT_EPSILON, EXIT_OK
from .errors import NoSaddle, UsageError, VerificationFailed
from .matching_engine import FairnessPolicy
from .outage_simulator import (
	ConditionalConfig, ExperimentConfig, simulate_conditional_outage, simulate_content_outage,
	simulate_unconditioned_outage,
)
from .reporting import CURVE_COLUMNS, OVERLAY_COLUMNS, RunManifest, write_result
from .verification import run_suites
from .version import get_version

logger = logging.getLogger(__name__)

# -------

def status(message):
	"""Progress line for the user. The CSV may be on stdout, so status goes to stderr."""
	print(message, file=sys.stderr)

def _manifest(experiment, opts):
	config = {key: value for key, value in opts.items() if key not in ('output', 'config')}
	return RunManifest(experiment, get_version(), opts['seed'], config)

def _or_trivial(compute, label):
	"""Evaluate an analytic curve point; with no saddle point the trivial bound 1 is reported."""
	try:
		return compute()
	except NoSaddle as e:
		logger.warning("%s: %s; reporting the trivial bound 1", label, e)
		return 1.0

def _slope_line(anchor_gamma, anchor_value, d, gammas):
	"""anchor_value * (gamma / anchor_gamma)^(-d) over the grid."""
	return [anchor_value * (g / anchor_gamma) ** (-d) for g in gammas]

def _last_positive(values, gammas):
	for value, gamma in zip(reversed(values), reversed(gammas)):
		if value is not None and value > 0:
			return gamma, value
	return None

# --- conditional ---

def cmd_conditional(opts) -> int:
	"""
	Monte Carlo against the saddle-point bound and DMT slope for one (K, k, R),
	with the unconditioned outage of the same K links for reference.
	"""
	K, k, R = opts['K'], opts['k'], opts['R']
	if K < 1 or not 0 <= k <= K:
		raise UsageError(f"need K >= 1 and 0 <= k <= K, got K={K}, k={k}")
	if not R > 0:
		raise UsageError(f"rate R must be positive, got {R}")
	snr_db = opts['snr_db']
	gammas = [float(g) for g in db_to_linear(snr_db)]

	rows = []
	bounds = []
	for i, (db, gamma) in enumerate(zip(snr_db, gammas)):
		cfg = ConditionalConfig(K, k, R, gamma, opts['trials'], opts['max_trials'], opts['escalate'])
		mc = simulate_conditional_outage(cfg, opts['seed'], (i,))
		rows.append((db, 1, "mc", mc.p_hat, mc.ci_lo, mc.ci_hi, mc.trials))
		# streams past the grid length keep these draws apart from the conditional ones
		plain = simulate_unconditioned_outage(cfg, opts['seed'], (len(snr_db) + i,))
		rows.append((db, 1, "unconditional", plain.p_hat, plain.ci_lo, plain.ci_hi, plain.trials))
		bound = _or_trivial(lambda: conditional_outage(SaddleConfig.from_rate(K, k, R, gamma), opts['method']),
							f"K={K} k={k} at {db:g} dB")
		bounds.append(bound)
		rows.append((db, 1, "bound", bound, None, None, None))
		status(f"{db:g} dB: simulated {mc.p_hat:.4g} over {mc.trials} trials, bound {bound:.4g}")

	anchor = _last_positive(bounds, gammas)
	if anchor is not None:
		d = conditional_dmt(K, k, 0.0).d
		line = _slope_line(*anchor, d, gammas)
		rows.extend((db, 1, "dmt", value, None, None, None) for db, value in zip(snr_db, line))

	rows.sort(key=lambda row: (row[0], row[1]))
	write_result(opts['output'], _manifest("conditional", opts), OVERLAY_COLUMNS, rows)
	return EXIT_OK

# --- content ---

def _broadcast(values, M, name):
	values = tuple(values)
	if len(values) == 1:
		return values * M
	if len(values) != M:
		raise UsageError(f"{name} has {len(values)} entries for M={M} users")
	return values

def _content_setup(opts):
	"""
	(M, K, R, r) from the content options. The rate is fixed (--rate, or
	--rates per user) or follows --mux; with --mux, --rates only sizes the
	contents for --optimal-k.
	"""
	if opts.get('rates') is not None and opts.get('rate') is not None:
		raise UsageError("--rates and --rate are alternatives")
	if all(opts.get(name) is None for name in ('rates', 'rate', 'mux')):
		raise UsageError("give --rate, --rates or --mux")
	if opts['N'] is None:
		raise UsageError("the number of Fog-APs (--N) is required")
	N, L = opts['N'], opts['L']

	if opts.get('rates') is not None:
		contents = ContentSpec(opts['rates'])
		if opts['M'] is not None and opts['M'] != contents.M:
			raise UsageError(f"--M={opts['M']} disagrees with {contents.M} content sizes")
		M = contents.M
		R, r = contents.R, None
		if opts.get('mux') is not None:
			R, r = None, (opts['mux'],) * M
		if opts.get('optimal_k'):
			K = optimal_k(contents, N, L)
			status(f"Demand proportional to content size: K = {', '.join(map(str, K))}")
		else:
			K = _broadcast(opts['K'], M, "K")
	else:
		if opts['M'] is None:
			raise UsageError("the number of users (--M) is required without --rates")
		if opts.get('optimal_k'):
			raise UsageError("--optimal-k needs per-user content sizes (--rates)")
		M = opts['M']
		K = _broadcast(opts['K'], M, "K")
		R = (opts['rate'],) * M if opts.get('rate') is not None else None
		r = (opts['mux'],) * M if opts.get('mux') is not None else None
	if r is not None and any(not 0 <= r[0] <= k for k in K):
		raise UsageError(f"multiplexing gain {r[0]} must lie in [0, min(K)] = [0, {min(K)}]")
	return M, tuple(K), R, r

def _experiment(opts, M, K, R, r, scheme="MSR", D=None, N=None, L=None):
	user = opts.get('user')
	if user is not None and not 1 <= user <= M:
		raise UsageError(f"--user {user} outside 1..{M}")
	policy = FairnessPolicy(eta=opts['eta'], epsilon=opts.get('epsilon', DEFAULT_EPSILON), seed=opts['seed'])
	return ExperimentConfig(
		M=M, N=opts['N'] if N is None else N, L=opts['L'] if L is None else L, K=K,
		gammas=tuple(float(g) for g in db_to_linear(opts['snr_db'])),
		R=R, r=r,
		trials=opts['trials'], max_trials=opts['max_trials'], escalate=opts['escalate'],
		seed=opts['seed'], policy=policy, solver=opts['solver'],
		users=None if user is None else (user - 1,),
		tilt=opts.get('tilt'), target_user=0 if user is None else user - 1,
		workers=opts['workers'], scheme=scheme, D=D,
	)

def _curve_rows(curves, snr_db):
	rows = []
	for u, curve in curves.items():
		exponents = curve.exponent or (None,) * len(snr_db)
		for i, db in enumerate(snr_db):
			rows.append((db, u + 1, curve.p_hat[i], curve.ci_lo[i], curve.ci_hi[i], curve.trials[i], exponents[i]))
	rows.sort(key=lambda row: (row[0], row[1]))
	return rows

def cmd_content(opts) -> int:
	"""Content outage by simulation, overlaid with both analytic approximations and the DMR slope."""
	M, K, R, r = _content_setup(opts)
	cfg = _experiment(opts, M, K, R, r)
	N, L, eta, method = cfg.N, cfg.L, opts['eta'], opts['method']
	K_sum = sum(K)
	snr_db = opts['snr_db']
	status(f"Simulating {M} users on {N} Fog-APs (L={L}, K={', '.join(map(str, K))}) "
		   f"at {len(snr_db)} SNR points...")
	curves = simulate_content_outage(cfg)

	rows = []
	for u, curve in curves.items():
		for i, (db, gamma) in enumerate(zip(snr_db, cfg.gammas)):
			rows.append((db, u + 1, "mc", curve.p_hat[i], curve.ci_lo[i], curve.ci_hi[i], curve.trials[i]))
			R_u = float(cfg.rates_at(gamma)[u])
			if R_u <= 0:
				continue
			label = f"user {u + 1} at {db:g} dB"
			high = _or_trivial(lambda: content_outage_high_snr(M, N, L, K[u], eta, R_u, gamma, K_sum, method), label)
			low = _or_trivial(lambda: content_outage_low_snr(N, K[u], R_u, gamma, method), label)
			rows.append((db, u + 1, "analytic_high", high, None, None, None))
			rows.append((db, u + 1, "analytic_low", low, None, None, None))

		d = dmr(M, N, L, K[u], eta, r[u] if r is not None else 0.0, K_sum)
		anchor = _last_positive(list(curve.p_hat), list(cfg.gammas))
		if anchor is not None:
			line = _slope_line(*anchor, d, cfg.gammas)
			rows.extend((db, u + 1, "dmr", value, None, None, None) for db, value in zip(snr_db, line))
		slope = _fitted_slope(curve)
		status(f"User {u + 1}: diversity {d:.4g}" + ("" if slope is None else f", simulated slope {slope:.3g}"))

	rows.sort(key=lambda row: (row[0], row[1]))
	extra = ()
	if opts.get('curves'):
		write_result(opts['curves'], _manifest("content-curves", opts), CURVE_COLUMNS, _curve_rows(curves, snr_db))
		extra = (opts['curves'],)
	write_result(opts['output'], _manifest("content", opts), OVERLAY_COLUMNS, rows, extra)
	return EXIT_OK

def _fitted_slope(curve):
	"""Least-squares -d ln p / d ln gamma over the points with a nonzero estimate."""
	p = np.array(curve.p_hat, dtype=float)
	keep = p > 0
	if keep.sum() < 3:
		return None
	return float(-np.polyfit(np.log(np.array(curve.gammas)[keep]), np.log(p[keep]), 1)[0])

# --- compare-codes ---

def _systems(opts):
	"""(M, N, L, K) per system: the --parameter-set grid, or the single --M --N --L --K system."""
	if opts.get('parameter_sets'):
		return [(M, N, L, (K,) * M) for M, N, L, K in opts['parameter_sets']]
	M = opts['M']
	return [(M, opts['N'], opts['L'], _broadcast(opts['K'], M, "K"))]

def cmd_compare_codes(opts) -> int:
	"""
	Content outage of the same demand cached with each code scheme. With a
	parameter grid every (M, N, L, K) set gets its own curves, tagged in the
	source column, so systems with different K can be compared by slope.
	"""
	R = opts['R']
	if not R > 0:
		raise UsageError(f"rate R must be positive, got {R}")
	snr_db = opts['snr_db']
	grid = bool(opts.get('parameter_sets'))

	rows = []
	for M, N, L, K in _systems(opts):
		D = opts.get('D') or N
		tag = f"_M{M}_N{N}_L{L}_K{K[0]}" if grid else ""
		for scheme in opts['schemes']:
			for k in sorted(set(K)):
				params = code_params(scheme, R, k, D if scheme != "MDS" else None)
				beta = "n/a" if params.beta is None else f"{params.beta:.4g}"
				status(f"{scheme} K={k}: (n, k, d) = ({params.n}, {params.k}, {params.d}), "
					   f"alpha={params.alpha:.4g}, beta={beta}")
			cfg = _experiment(opts, M, K, (R,) * M, None, scheme=scheme, D=D if scheme != "MDS" else None, N=N, L=L)
			curves = simulate_content_outage(cfg)
			source = f"mc_{scheme.lower()}{tag}"
			for u, curve in curves.items():
				for i, db in enumerate(snr_db):
					rows.append((db, u + 1, source, curve.p_hat[i], curve.ci_lo[i], curve.ci_hi[i], curve.trials[i]))
			if grid:
				d = dmr(M, N, L, K[0], opts['eta'], 0.0, sum(K))
				slope = _fitted_slope(next(iter(curves.values())))
				status(f"{scheme} M={M} N={N} L={L} K={K[0]}: diversity {d:.4g}"
					   + ("" if slope is None else f", simulated slope {slope:.3g}"))

	rows.sort(key=lambda row: (row[0], row[1], row[2]))
	write_result(opts['output'], _manifest("compare-codes", opts), OVERLAY_COLUMNS, rows)
	return EXIT_OK

# --- verify ---

def cmd_verify(opts) -> int:
	results = run_suites(opts.get('suites'), opts['quick'], opts['seed'], opts['inject_violation'])
	failed = []
	for result in results:
		mark = "✅" if result.ok else "❌"
		status(f"{mark} {result.name}: {result.passed}/{result.total}")
		for detail in result.failures:
			status(f"     {detail}")
		if not result.ok:
			failed.append(result.name)
	if failed:
		raise VerificationFailed(f"{len(failed)} suite(s) failed: {', '.join(failed)}")
	status("All verification suites passed.")
	return EXIT_OK

COMMANDS = {
	'conditional': cmd_conditional,
	'content': cmd_content,
	'compare-codes': cmd_compare_codes,
	'verify': cmd_verify,
}
