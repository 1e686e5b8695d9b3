"""
Rayleigh block-fading channel between users and Fog-APs.

Gains are unit-variance circularly symmetric complex Gaussians, one per
(user, AP) pair. A resource block carries ln(1 + |h|^2 gamma) nats, and the
one-bit CSI of a link says whether that reaches the per-AP fragment size
alpha*.
"""

from typing import NamedTuple

import numpy as np

# -------

class ApOutageProbs(NamedTuple):
	"""Fog-AP outage probability p and its complement q = 1 - p."""
	p: float | np.ndarray
	q: float | np.ndarray

def trial_rng(seed, *indices) -> np.random.Generator:
	"""Generator keyed by (seed, *indices); independent of the order trials run in."""
	return np.random.default_rng(np.random.SeedSequence([int(seed), *(int(i) for i in indices)]))

def sample_gains_for(rng: np.random.Generator, M: int, N: int) -> np.ndarray:
	"""M x N complex gains with E|h|^2 = 1, drawn from an existing generator."""
	parts = rng.standard_normal((2, M, N)) * np.sqrt(0.5)
	return parts[0] + 1j * parts[1]

def sample_gains(M: int, N: int, seed) -> np.ndarray:
	return sample_gains_for(trial_rng(seed), M, N)

def gain_power(h):
	"""|h|^2 without going through abs()."""
	h = np.asarray(h)
	return h.real * h.real + h.imag * h.imag

def mutual_information(h, gamma):
	"""Nats per RB use: ln(1 + |h|^2 gamma). Works elementwise on arrays."""
	return np.log1p(gain_power(h) * gamma)

def ap_outage_prob(alpha_star, gamma) -> ApOutageProbs:
	"""
	Probability that one RB carries less than alpha_star nats:
	p = 1 - exp(-(e^alpha_star - 1) / gamma).
	"""
	p = -np.expm1(-np.expm1(alpha_star) / gamma)
	if np.ndim(p) == 0:
		p = float(p)
	return ApOutageProbs(p, 1.0 - p)

def quantize_csi(info, alpha_star) -> np.ndarray:
	"""One-bit CSI: 1 where I_mn >= alpha*_m. alpha_star is a scalar or one value per user."""
	info = np.asarray(info, dtype=float)
	alpha = np.asarray(alpha_star, dtype=float)
	if alpha.ndim == 1:
		alpha = alpha[:, None]
	return (info >= alpha).astype(np.uint8)

# --- Conditional laws of Z = ln(1 + |h|^2 gamma) given the CSI bit ---

def conditional_sample_above(alpha_star, gamma, size, rng):
	"""Draws of Z given Z >= alpha_star (memoryless exponential tail)."""
	e = rng.standard_exponential(size)
	z = np.log(np.exp(alpha_star) + gamma * e)
	return np.maximum(z, alpha_star)

def conditional_sample_below(alpha_star, gamma, size, rng):
	"""Draws of Z given Z < alpha_star, by inverting the truncated exponential."""
	p = ap_outage_prob(alpha_star, gamma).p
	u = rng.random(size)
	z = np.log1p(-gamma * np.log1p(-u * p))
	return np.minimum(z, np.nextafter(alpha_star, -np.inf))

def conditional_cdf_above(z, alpha_star, gamma):
	z = np.asarray(z, dtype=float)
	tail = -np.expm1(-(np.exp(np.maximum(z, alpha_star)) - np.exp(alpha_star)) / gamma)
	return np.where(z < alpha_star, 0.0, tail)

def conditional_cdf_below(z, alpha_star, gamma):
	z = np.asarray(z, dtype=float)
	p = ap_outage_prob(alpha_star, gamma).p
	inside = -np.expm1(-np.expm1(np.clip(z, 0.0, alpha_star)) / gamma) / p
	return np.where(z >= alpha_star, 1.0, np.where(z < 0.0, 0.0, inside))

def db_to_linear(db):
	return np.power(10.0, np.asarray(db, dtype=float) / 10.0)

def linear_to_db(gamma):
	return 10.0 * np.log10(np.asarray(gamma, dtype=float))
