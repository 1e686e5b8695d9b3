"""
Command-line value parsing for fog-match.

The parsers here turn the strings typed on the command line (or written in
a config file) into the values the experiment commands consume. Like the
rest of this module they return None when the input cannot be parsed and
leave the error message to the caller.
"""

import math
import re


_NUMBER = r'[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?'


def parse_snr_range(text):
	"""
	Parse an SNR grid in dB.

	Supports:
	- Ranges 'lo:hi:step', inclusive of hi when it lies on the grid: '0:40:5'
	- Explicit lists: '0,10,20'
	- A single value: '30'

	Returns a tuple of floats in increasing order, or None if parsing fails.
	"""
	if not text:
		return None
	text = text.strip()
	if ' ' in text:
		return None

	if ':' in text:
		parts = text.split(':')
		if len(parts) != 3 or not all(re.fullmatch(_NUMBER, p) for p in parts):
			return None
		lo, hi, step = (float(p) for p in parts)
		if step <= 0 or hi < lo:
			return None
		count = int(math.floor((hi - lo) / step + 1e-9)) + 1
		return tuple(round(lo + i * step, 10) for i in range(count))

	values = parse_float_list(text)
	if values is None or any(b <= a for a, b in zip(values, values[1:])):
		return None
	return values


def parse_float_list(text):
	"""Parse '1.5,2,3' into (1.5, 2.0, 3.0). Returns None if parsing fails."""
	if not text:
		return None
	parts = text.split(',')
	if not all(re.fullmatch(_NUMBER, p.strip()) for p in parts):
		return None
	return tuple(float(p) for p in parts)


def parse_int_list(text):
	"""Parse '2,3,2' into (2, 3, 2). Returns None if parsing fails."""
	if not text:
		return None
	parts = [p.strip() for p in text.split(',')]
	if not all(re.fullmatch(r'[-+]?\d+', p) for p in parts):
		return None
	return tuple(int(p) for p in parts)


def parse_scheme_list(text, known):
	"""Parse 'msr,mbr' into ('MSR', 'MBR'), keeping only names in `known`. None on an unknown name."""
	if not text:
		return None
	names = tuple(p.strip().upper() for p in text.split(','))
	if not names or any(n not in known for n in names):
		return None
	return names


def parse_bool(text):
	"""Config-file booleans: true/false, yes/no, on/off, 1/0. None otherwise."""
	if isinstance(text, bool):
		return text
	value = str(text).strip().lower()
	if value in ('1', 'true', 'yes', 'on'):
		return True
	if value in ('0', 'false', 'no', 'off'):
		return False
	return None


def format_snr_range(values):
	"""Compact form of a dB grid: 'lo:hi:step' when evenly spaced, otherwise a comma list."""
	if not values:
		return ""
	if len(values) > 2:
		steps = [round(b - a, 9) for a, b in zip(values, values[1:])]
		if len(set(steps)) == 1:
			return f"{values[0]:g}:{values[-1]:g}:{steps[0]:g}"
	return ','.join(f"{v:g}" for v in values)


def parse_int(text):
	"""Parse an integer; None if parsing fails."""
	if isinstance(text, int) and not isinstance(text, bool):
		return text
	text = str(text).strip()
	return int(text) if re.fullmatch(r'[-+]?\d+', text) else None


def parse_float(text):
	"""Parse a finite real number; None if parsing fails."""
	if isinstance(text, (int, float)) and not isinstance(text, bool):
		return float(text)
	text = str(text).strip()
	return float(text) if re.fullmatch(_NUMBER, text) else None


def parse_parameter_set(text):
	"""
	Parse one system configuration 'M,N,L,K' into a tuple of four positive
	integers. Returns None if parsing fails.
	"""
	values = parse_int_list(text)
	if values is None or len(values) != 4 or any(v < 1 for v in values):
		return None
	return values


def parse_parameter_sets(text):
	"""Parse 'M,N,L,K;M,N,L,K' (config-file form of a parameter grid). None if any set fails."""
	if not text:
		return None
	sets = tuple(parse_parameter_set(part) for part in str(text).split(';'))
	if any(s is None for s in sets):
		return None
	return sets
