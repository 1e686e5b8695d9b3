"""
Distributed-storage code parameters for cached contents.

A content of R nats is split over K_m Fog-APs by an (n, k, d) code: any k
nodes recover it, and a failed node is repaired from d helpers. MSR codes
minimise the per-node storage alpha, MBR codes the repair bandwidth beta;
plain MDS codes have no repair bandwidth figure.
"""

import math
from dataclasses import dataclass

from .errors import InvalidDimensions, RoundingInfeasible

# -------

SCHEMES = ("MDS", "MBR", "MSR")
ROUNDING_POLICIES = ("largest-remainder", "nearest", "none")

@dataclass(frozen=True)
class ContentSpec:
	"""Content sizes R_m in nats, one per user."""
	R: tuple

	def __post_init__(self):
		R = tuple(float(r) for r in self.R)
		if not R:
			raise ValueError("at least one content is required")
		if any(not r > 0 for r in R):
			raise ValueError(f"content sizes must be positive, got {R}")
		object.__setattr__(self, 'R', R)

	@property
	def M(self) -> int:
		return len(self.R)

@dataclass(frozen=True)
class CodeParameters:
	scheme: str
	n: int
	k: float
	d: float | None
	alpha: float
	beta: float | None

	def __post_init__(self):
		if self.scheme not in SCHEMES:
			raise InvalidDimensions(f"unknown scheme {self.scheme!r}")
		if not 0 < self.k <= self.n:
			raise InvalidDimensions(f"code needs 0 < k <= n, got k={self.k}, n={self.n}")
		if self.scheme == "MDS":
			if self.d is not None or self.beta is not None:
				raise InvalidDimensions("MDS codes carry no repair degree or bandwidth")
		elif self.d is None or not self.k <= self.d <= self.n:
			# d = n is admitted: the DMR-optimal code for a single content is (N, N, N)
			raise InvalidDimensions(f"{self.scheme} code needs k <= d <= n, got ({self.n}, {self.k}, {self.d})")

def _check_dimensions(K, D):
	if K < 1 or K > D:
		raise InvalidDimensions(f"code dimensions need 1 <= K <= D, got K={K}, D={D}")

def msr_params(R, K, D):
	"""(alpha, beta) = (R/K, D/(D-K+1) * R/K)."""
	_check_dimensions(K, D)
	alpha = R / K
	return alpha, D / (D - K + 1) * alpha

def mbr_params(R, K, D):
	"""alpha = beta = 2D/(2D-K+1) * R/K."""
	_check_dimensions(K, D)
	alpha = 2 * D / (2 * D - K + 1) * R / K
	return alpha, alpha

def mds_params(R, K):
	if K < 1:
		raise InvalidDimensions(f"code dimension K must be at least 1, got {K}")
	return R / K, None

def code_params(scheme: str, R, K, D=None, n=None) -> CodeParameters:
	"""CodeParameters of one scheme; n defaults to D (or K for MDS)."""
	scheme = scheme.upper()
	if scheme == "MSR":
		alpha, beta = msr_params(R, K, D)
	elif scheme == "MBR":
		alpha, beta = mbr_params(R, K, D)
	elif scheme == "MDS":
		alpha, beta = mds_params(R, K)
		D = None
	else:
		raise InvalidDimensions(f"unknown scheme {scheme!r}")
	if n is None:
		n = D if D is not None else K
	return CodeParameters(scheme, int(n), K, D, alpha, beta)

# --- DMR-optimal demand and code ---

def ideal_k(contents: ContentSpec, N: int):
	"""K*_m = R_m N / sum(R)."""
	total = sum(contents.R)
	return tuple(r * N / total for r in contents.R)

def _largest_remainder(ideal, N, target):
	K = [min(max(math.floor(x), 1), N) for x in ideal]
	remainder = [x - math.floor(x) for x in ideal]
	# raise the largest remainders first, lower index on ties
	for m in sorted(range(len(K)), key=lambda m: (-remainder[m], m)):
		if sum(K) >= target:
			break
		if K[m] < N and K[m] < math.ceil(ideal[m]):
			K[m] += 1
	# floors lifted to 1 can overshoot; take back from the most over-allocated
	while sum(K) > target:
		candidates = [m for m in range(len(K)) if K[m] > 1]
		if not candidates:
			break
		m = min(candidates, key=lambda m: (-(K[m] - ideal[m]), m))
		K[m] -= 1
	return K

def optimal_k(contents: ContentSpec, N: int, L=None, rounding="largest-remainder"):
	"""
	Demand vector proportional to content size. With rounding="none" the
	ideal real values are returned; otherwise integers with 1 <= K_m <= N
	and sum(K) <= min(round(sum of ideal), N*L).
	"""
	if rounding not in ROUNDING_POLICIES:
		raise ValueError(f"unknown rounding policy {rounding!r}; choose from {', '.join(ROUNDING_POLICIES)}")
	ideal = ideal_k(contents, N)
	if rounding == "none":
		return ideal
	target = round(sum(ideal))
	if L is not None:
		target = min(target, N * L)
	if contents.M > target:
		raise RoundingInfeasible(f"{contents.M} contents cannot each get K >= 1 within a total of {target}")
	if rounding == "nearest":
		K = [int(math.floor(x + 0.5)) for x in ideal]
	else:
		K = _largest_remainder(ideal, N, target)
	if any(not 1 <= k <= N for k in K) or sum(K) > target:
		raise RoundingInfeasible(f"rounding {rounding!r} gives K={K}, outside 1..{N} or above total {target}")
	return tuple(K)

def dmr_optimal_code(contents: ContentSpec, N: int, L=None, rounding="largest-remainder"):
	"""
	One MSR code per content with (n, k, d) = (N, K*_m, K*_m). At ideal K*
	every content stores sum(R)/N per node and repairs with beta = R_m.
	"""
	K = optimal_k(contents, N, L, rounding)
	return [code_params("MSR", R, k, k, n=N) for R, k in zip(contents.R, K)]
