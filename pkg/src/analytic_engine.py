"""
Closed-form and saddle-point analysis of content outage.

Conditional outage: given that k of a user's K selected APs are out of
outage, the K mutual informations are independent draws, k from the law
of Z given Z >= alpha* and K - k from the law of Z given Z < alpha*. With
X = alpha* - Z the user is in outage when the sum of the X's is positive,
and the saddle-point approximation of that tail is built from the per-draw
cumulant generating function

	Lambda(l) = (alpha* - ln gamma) l + j0
	            + (1 - rho) ln Gamma(1 - l, e^alpha*/gamma)
	            + rho ln[Gamma(1 - l, 1/gamma) - Gamma(1 - l, e^alpha*/gamma)]

with rho = 1 - k/K and j0 = 1/gamma - rho ln p - (1 - rho) ln q. Its
derivatives in l come from derivatives of the incomplete gamma function in
its order.

Content outage at high SNR sums the conditional outage over the number of
non-outage APs, or, when competition between users dominates, uses the
edge count phi2 of the extremal graph. All probabilities are assembled in
log space.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .bipartite_graph import branch_threshold, phi2
from .channel_model import ap_outage_prob, conditional_cdf_above, conditional_cdf_below
from .constants import (
	DEFAULT_ETA, NUMERIC_GRID_POINTS, SADDLE_BRACKET, SADDLE_TOLERANCE, SIGMA_SQ_FLOOR,
)
from .errors import DomainError, NoSaddle
from .special import incomplete_gamma_band, order_derivative, upper_incomplete_gamma

logger = logging.getLogger(__name__)

_LAMBDA_MAX = 64.0
_OER_STEP = 1e-3

# -------

@dataclass(frozen=True)
class SaddleConfig:
	"""K draws, k of them from the non-outage law, fragment size alpha_star, SNR gamma."""
	K: int
	k: float
	alpha_star: float
	gamma: float

	def __post_init__(self):
		if self.K < 1:
			raise ValueError(f"K must be at least 1, got {self.K}")
		if not 0 <= self.k <= self.K:
			raise ValueError(f"k must lie in [0, K], got k={self.k}, K={self.K}")
		if not self.alpha_star > 0:
			raise ValueError(f"alpha_star must be positive, got {self.alpha_star}")
		if not self.gamma > 0:
			raise ValueError(f"gamma must be positive, got {self.gamma}")

	@classmethod
	def from_rate(cls, K, k, R, gamma):
		return cls(int(K), float(k), R / K, float(gamma))

	@property
	def rho(self) -> float:
		return 1.0 - self.k / self.K

	@property
	def p(self) -> float:
		return ap_outage_prob(self.alpha_star, self.gamma).p

	@property
	def q(self) -> float:
		return 1.0 - self.p

	@property
	def lo(self) -> float:
		return 1.0 / self.gamma

	@property
	def hi(self) -> float:
		return math.exp(self.alpha_star) / self.gamma

	@property
	def j0(self) -> float:
		log_q = -math.expm1(self.alpha_star) / self.gamma
		return 1.0 / self.gamma - self.rho * math.log(self.p) - (1.0 - self.rho) * log_q

class SaddlePoint(NamedTuple):
	lambda_star: float
	sigma_sq: float
	j1: float
	j0: float
	psi: float

class ConditionalBound(NamedTuple):
	value: float
	log_value: float
	clamped: bool
	saddle: SaddlePoint | None

class DmtPoint(NamedTuple):
	r: float
	d: float

# --- CGF ---

def _log_band(s, cfg):
	band = incomplete_gamma_band(s, cfg.lo, cfg.hi)
	if not band > 0:
		raise DomainError(f"incomplete gamma band is {band} at order {s}; evaluation failed")
	return math.log(band)

def _log_tail(s, cfg):
	tail = upper_incomplete_gamma(s, cfg.hi)
	if not tail > 0:
		raise DomainError(f"incomplete gamma tail is {tail} at order {s}; evaluation failed")
	return math.log(tail)

def _gamma_terms(lam, cfg):
	"""(1 - rho) ln Gamma(1-l, hi) + rho ln band(1-l), skipping terms with zero weight."""
	s = 1.0 - lam
	rho = cfg.rho
	total = 0.0
	if rho < 1.0:
		total += (1.0 - rho) * _log_tail(s, cfg)
	if rho > 0.0:
		total += rho * _log_band(s, cfg)
	return total

def cgf(lam, cfg: SaddleConfig) -> float:
	"""Per-draw CGF of X = alpha* - Z averaged over the conditioning."""
	return (cfg.alpha_star - math.log(cfg.gamma)) * lam + cfg.j0 + _gamma_terms(lam, cfg)

def cgf_derivatives(lam, cfg: SaddleConfig):
	"""(Lambda', Lambda'') at lam, through order derivatives of the incomplete gamma terms."""
	s = 1.0 - lam
	rho = cfg.rho
	d1 = cfg.alpha_star - math.log(cfg.gamma)
	d2 = 0.0
	parts = []
	if rho < 1.0:
		parts.append((1.0 - rho, lambda x: upper_incomplete_gamma(x, cfg.hi)))
	if rho > 0.0:
		parts.append((rho, lambda x: incomplete_gamma_band(x, cfg.lo, cfg.hi)))
	for weight, f in parts:
		g = f(s)
		if not g > 0:
			raise DomainError(f"incomplete gamma term is {g} at order {s}; evaluation failed")
		g1 = order_derivative(f, s, 1) / g
		g2 = order_derivative(f, s, 2) / g
		# d/dl f(1-l) = -f'(s)
		d1 -= weight * g1
		d2 += weight * (g2 - g1 * g1)
	return d1, d2

def solve_saddle(cfg: SaddleConfig) -> SaddlePoint:
	"""
	Root of Lambda' on (0, inf). Lambda is convex, so a sign change of
	Lambda' brackets the unique root; the bracket starts at SADDLE_BRACKET
	and its upper end doubles until Lambda' turns positive.
	"""
	def slope(lam):
		try:
			return cgf_derivatives(lam, cfg)[0]
		except DomainError as e:
			raise NoSaddle(f"CGF not representable at lambda={lam:.3g}: {e}") from e

	lo, hi = SADDLE_BRACKET
	f_lo = slope(lo)
	if f_lo >= 0.0:
		raise NoSaddle(f"Lambda'({lo}) = {f_lo:.3g} >= 0: outage is not a tail event at gamma={cfg.gamma:.4g}")
	f_hi = slope(hi)
	while f_hi < 0.0:
		lo, hi = hi, 2.0 * hi
		if hi > _LAMBDA_MAX:
			raise NoSaddle(f"Lambda' stays negative up to {_LAMBDA_MAX} (k={cfg.k}, K={cfg.K})")
		f_hi = slope(hi)
		if not math.isfinite(f_hi):
			raise NoSaddle(f"Lambda' is not finite at {hi} (gamma={cfg.gamma:.4g})")

	lam = optimize.brentq(slope, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
	d1, d2 = cgf_derivatives(lam, cfg)
	if abs(d1) > SADDLE_TOLERANCE:
		logger.debug("saddle residual %.3g above tolerance at gamma=%.4g", d1, cfg.gamma)
	sigma_sq = max(d2, SIGMA_SQ_FLOOR)
	psi = 1.0 / (math.sqrt(2.0 * math.pi * cfg.K * sigma_sq) * lam)
	return SaddlePoint(lam, sigma_sq, -_gamma_terms(lam, cfg), cfg.j0, psi)

def conditional_upper_bound(cfg: SaddleConfig, R=None) -> ConditionalBound:
	"""
	psi * exp(K Lambda(lambda*)), clamped to [0, 1].

	k = K gives exactly 0 (every draw is at least alpha*, so the sum reaches
	R) and k = 0 gives exactly 1; no saddle point is needed for either.
	"""
	if R is not None and not math.isclose(R, cfg.K * cfg.alpha_star, rel_tol=1e-12, abs_tol=1e-15):
		raise ValueError(f"R={R} does not match K * alpha_star = {cfg.K * cfg.alpha_star}")
	if cfg.k >= cfg.K:
		return ConditionalBound(0.0, -math.inf, False, None)
	if cfg.k <= 0:
		return ConditionalBound(1.0, 0.0, False, None)
	saddle = solve_saddle(cfg)
	log_value = math.log(saddle.psi) + cfg.K * cgf(saddle.lambda_star, cfg)
	clamped = log_value > 0.0
	return ConditionalBound(math.exp(min(log_value, 0.0)), min(log_value, 0.0), clamped, saddle)

def conditional_outage_numeric(K: int, k: int, R: float, gamma: float, points=NUMERIC_GRID_POINTS) -> float:
	"""
	Pr{sum of the K conditional draws < R} by discretising both conditional
	laws on [0, R] and convolving. Mass above R is dropped since no draw is
	negative.
	"""
	if int(k) != k:
		raise ValueError(f"numeric conditional outage needs an integer k, got {k}")
	k = int(k)
	if k >= K:
		return 0.0
	if k <= 0:
		return 1.0
	alpha = R / K
	edges = np.linspace(0.0, R, points + 1)
	above = np.diff(conditional_cdf_above(edges, alpha, gamma))
	below = np.diff(conditional_cdf_below(edges, alpha, gamma))
	pmf = np.array([1.0])
	for part in [above] * k + [below] * (K - k):
		pmf = np.convolve(pmf, part)[:points]
	# each draw sits somewhere inside its cell; centre the sum's cell offset
	cut = points - K / 2.0
	index = np.arange(pmf.size)
	return float(np.clip(pmf[index < cut].sum(), 0.0, 1.0))

def conditional_outage(cfg: SaddleConfig, method="auto") -> float:
	"""
	Conditional outage by "bound" (saddle point), "numeric" (convolution) or
	"auto" (saddle point where one exists, otherwise numeric, and the trivial
	bound 1 when k is not an integer).
	"""
	R = cfg.K * cfg.alpha_star
	if method == "bound":
		return conditional_upper_bound(cfg).value
	if method == "numeric":
		return conditional_outage_numeric(cfg.K, cfg.k, R, cfg.gamma)
	if method != "auto":
		raise ValueError(f"unknown method {method!r}")
	try:
		return conditional_upper_bound(cfg).value
	except NoSaddle as e:
		logger.debug("no saddle point (%s); falling back", e)
		if float(cfg.k).is_integer():
			return conditional_outage_numeric(cfg.K, int(cfg.k), R, cfg.gamma)
		return 1.0

# --- Content outage expansions ---

def _log_binomial(n, k):
	return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))

def _log(x):
	return math.log(x) if x > 0 else -math.inf

def _log_sum_over_kappa(N, K_m, R, gamma, method):
	p = ap_outage_prob(R / K_m, gamma).p
	terms = []
	for kappa in range(N - K_m + 1, N + 1):
		cfg = SaddleConfig.from_rate(K_m, N - kappa, R, gamma)
		terms.append(_log_binomial(N, kappa) + _log(conditional_outage(cfg, method)) + kappa * math.log(p))
	return float(np.logaddexp.reduce(terms))

def _log_phi2_term(M, N, L, K_m, K_sum, eta, R, gamma, method):
	edges = phi2(M, L, K_sum)
	if edges > M * N:
		raise ValueError(f"phi2={edges} exceeds M*N={M * N}")
	p = ap_outage_prob(R / K_m, gamma).p
	cfg = SaddleConfig.from_rate(K_m, eta * K_m, R, gamma)
	return _log_binomial(M * N, edges) + _log(conditional_outage(cfg, method)) + (M * N - edges) * math.log(p)

def log_content_outage_high_snr(M, N, L, K_m, eta, R, gamma, K_sum=None, method="auto") -> float:
	"""Natural log of content_outage_high_snr, without the final clamp."""
	if K_sum is None:
		K_sum = M * K_m
	if R <= 0:
		return -math.inf
	threshold = branch_threshold(M, L, K_sum, K_m, eta)
	if math.isclose(N, threshold, rel_tol=1e-12, abs_tol=1e-12):
		return float(np.logaddexp(
			_log_sum_over_kappa(N, K_m, R, gamma, method),
			_log_phi2_term(M, N, L, K_m, K_sum, eta, R, gamma, method),
		))
	if N > threshold:
		return _log_sum_over_kappa(N, K_m, R, gamma, method)
	return _log_phi2_term(M, N, L, K_m, K_sum, eta, R, gamma, method)

def content_outage_high_snr(M, N, L, K_m, eta, R, gamma, K_sum=None, method="auto") -> float:
	"""
	First-order content outage of a user demanding K_m APs. K_sum defaults
	to M*K_m (every user demanding the same).
	"""
	return math.exp(min(log_content_outage_high_snr(M, N, L, K_m, eta, R, gamma, K_sum, method), 0.0))

def content_outage_low_snr(N, K_m, R, gamma, method="auto") -> float:
	"""p^N + N p_con(R | K_m, 1) p^(N-1) q."""
	if R <= 0:
		return 0.0
	p, q = ap_outage_prob(R / K_m, gamma)
	p_con = conditional_outage(SaddleConfig.from_rate(K_m, 1, R, gamma), method)
	return min(p ** N + N * p_con * p ** (N - 1) * q, 1.0)

# --- Diversity-multiplexing ---

def _check_mux(r, K_m):
	if not 0.0 <= r <= K_m:
		raise ValueError(f"multiplexing gain must lie in [0, K_m={K_m}], got {r}")

def conditional_dmt(K_m, k_m, r) -> DmtPoint:
	"""d = K_m (1 - rho)(1 - r/K_m) = k_m (1 - r/K_m)."""
	_check_mux(r, K_m)
	return DmtPoint(r, k_m * (1.0 - r / K_m))

def dmr(M, N, L, K_m, eta, r, K_sum=None) -> float:
	"""Diversity gain of a user at multiplexing gain r."""
	_check_mux(r, K_m)
	if K_sum is None:
		K_sum = M * K_m
	scale = 1.0 - r / K_m
	if N >= branch_threshold(M, L, K_sum, K_m, eta):
		return N * scale
	return (M * N - phi2(M, L, K_sum) + eta * K_m) * scale

@dataclass(frozen=True)
class UserRate:
	"""
	One user's operating point: fixed rate R (nats) or multiplexing gain r,
	in which case the rate follows R = r ln gamma.
	"""
	M: int
	N: int
	L: int
	K: int
	eta: float = DEFAULT_ETA
	R: float | None = None
	r: float | None = None
	K_sum: int | None = None

	def __post_init__(self):
		if (self.R is None) == (self.r is None):
			raise ValueError("exactly one of R (fixed rate) and r (multiplexing gain) must be set")

	def rate_at(self, gamma):
		return self.R if self.R is not None else self.r * math.log(gamma)

def dmr_region(users) -> tuple:
	"""Per-user diversity gains; fixed-rate users sit at r = 0."""
	return tuple(dmr(u.M, u.N, u.L, u.K, u.eta, u.r or 0.0, u.K_sum) for u in users)

def oer(users, gamma, method="auto") -> tuple:
	"""
	Outage exponent of each user, -d ln p / d ln gamma of the high-SNR
	approximation, by central differences in ln gamma. For users at a fixed
	multiplexing gain the rate moves with gamma along the stencil.
	"""
	exponents = []
	t0 = math.log(gamma)
	for u in users:
		def log_p(t, u=u):
			g = math.exp(t)
			return log_content_outage_high_snr(u.M, u.N, u.L, u.K, u.eta, u.rate_at(g), g, u.K_sum, method)
		exponents.append(-order_derivative(log_p, t0, 1, step=_OER_STEP))
	return tuple(exponents)
