"""
Constants and default configuration values for fog-match.
"""

import sys

# Application settings
APP_NAME = "fog-match"
SEED_ENV_VAR = "FOGMATCH_SEED"
DEBUG_PY = 'debugpy' in sys.modules
DEFAULT_SEED = 2024

# Fairness policy
DEFAULT_ETA = 0.5				# target non-outage fraction
DEFAULT_EPSILON = 0.5
JITTER_FRACTION = 0.9			# jitter_scale = JITTER_FRACTION / (2*M*N)

# Message passing
ITERATION_CAP_FACTOR = 100		# max_iters = 100 * (M + N)
MESSAGE_PASSING_RESTARTS = 3	# fresh jitter draws before the exact fallback

# Monte Carlo
WILSON_Z = 1.96
MIN_OUTAGE_EVENTS = 50
DEFAULT_TRIALS = 5_000
DEFAULT_CONDITIONAL_TRIALS = 100_000
DEFAULT_CONDITIONAL_MAX_TRIALS = 10_000_000
DEFAULT_MAX_TRIALS = 200_000
CONDITIONAL_CHUNK = 250_000		# rows per vectorized conditional batch
TRIAL_CHUNK = 4096				# trials handed to one worker task

# Numerics
RICHARDSON_STEP = 1e-5
SECOND_ORDER_STEP = 1e-3
SADDLE_BRACKET = (1e-6, 0.999)
SADDLE_TOLERANCE = 1e-9
SIGMA_SQ_FLOOR = 1e-12
CF_MAX_ITERATIONS = 2000
SERIES_MAX_TERMS = 400
NUMERIC_GRID_POINTS = 4096		# grid for the convolution oracle

# Output
FLOAT_FORMAT = "%.10g"
MANIFEST_SUFFIX = ".manifest.json"

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY_FAILED = 3
