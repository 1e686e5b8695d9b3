"""
Settings management for fog-match.

Experiment parameters come from three places, highest precedence first:
command-line flags, a key=value config file, and built-in defaults. The
seed default can also be set through the FOGMATCH_SEED environment variable.
"""

import logging
import os
from dataclasses import dataclass
from typing import Any, Callable

from .constants import DEFAULT_SEED, SEED_ENV_VAR
from .errors import ConfigError

logger = logging.getLogger(__name__)

# -------

@dataclass(frozen=True)
class Option:
	"""One configurable value: its default and how to parse it from config-file text."""
	default: Any
	parse: Callable[[str], Any]

def normalize_key(key: str) -> str:
	return key.strip().replace('-', '_')

def load_config_file(path) -> dict:
	"""
	Read 'key = value' lines. Blank lines and lines starting with '#' are
	skipped; keys may use dashes or underscores. Values stay strings.
	"""
	try:
		with open(path, "rt") as f:
			lines = f.readlines()
	except OSError as e:
		raise ConfigError(f"cannot read config file {path}: {e}") from e

	values = {}
	for number, line in enumerate(lines, 1):
		line = line.strip()
		if not line or line.startswith('#'):
			continue
		if '=' not in line:
			raise ConfigError(f"{path}:{number}: expected 'key = value', got {line!r}")
		key, value = line.split('=', 1)
		key = normalize_key(key)
		if not key:
			raise ConfigError(f"{path}:{number}: missing key")
		values[key] = value.strip()
	logger.debug("loaded %d settings from %s", len(values), path)
	return values

def default_seed() -> int:
	"""DEFAULT_SEED unless FOGMATCH_SEED holds an integer."""
	raw = os.environ.get(SEED_ENV_VAR)
	if raw is None or raw.strip() == "":
		return DEFAULT_SEED
	try:
		return int(raw)
	except ValueError:
		raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None

def resolve(flags: dict, options: dict, config: dict | None = None) -> dict:
	"""
	Merge one command's settings. `flags` holds parsed command-line values
	with None meaning "not given"; `options` maps each key to an Option.
	Config-file keys the command does not know are an error.
	"""
	config = config or {}
	unknown = sorted(set(config) - set(options))
	if unknown:
		raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

	resolved = {}
	for key, option in options.items():
		value = flags.get(key)
		if value is None and key in config:
			value = option.parse(config[key])
			if value is None:
				raise ConfigError(f"invalid value {config[key]!r} for config key '{key}'")
		if value is None:
			value = option.default() if callable(option.default) else option.default
		resolved[key] = value
	return resolved
