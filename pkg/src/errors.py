"""
Error types for fog-match.

Every error raised on purpose by the library derives from FogMatchError.
The `exit_code` attribute is what the command-line front end returns when
the error escapes a command.
"""

class FogMatchError(Exception):
	"""Base class for all fog-match errors."""
	exit_code = 1

# --- Configuration and instance construction ---

class InfeasibleDemand(FogMatchError, ValueError):
	"""Demand vector violates K_m <= N or sum(K) <= N*L."""
	exit_code = 2

class InvalidDimensions(FogMatchError, ValueError):
	"""Code dimensions outside 1 <= K <= D."""
	exit_code = 2

class RoundingInfeasible(FogMatchError, ValueError):
	"""No integer rounding keeps every K*_m inside [1, N]."""
	exit_code = 2

# --- Matching ---

class RankOutOfRange(FogMatchError, IndexError):
	"""Selection rank exceeds the size of the multiset."""

class CompletionInfeasible(FogMatchError):
	"""Residual AP capacity cannot supply the filler APs a user needs."""

# --- Numerics ---

class DomainError(FogMatchError, ValueError):
	"""Argument outside the domain of a special function."""

class NoSaddle(FogMatchError):
	"""The CGF derivative has no root in the admissible strip."""

class InsufficientData(FogMatchError, ValueError):
	"""Too few usable points to estimate a slope."""

class VerificationFailed(FogMatchError):
	"""One or more verification suites failed."""
	exit_code = 3

# --- Command line ---

class UsageError(FogMatchError, ValueError):
	"""Inconsistent or missing command options."""

class ConfigError(UsageError):
	"""Unreadable config file, unknown key or unparsable value."""
