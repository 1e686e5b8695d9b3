"""
Result files written by the experiment commands.

Every CSV starts with '#' lines naming the experiment, version, seed and the
full resolved configuration, so the file alone says how to regenerate it.
Nothing time-dependent goes into the CSV: two runs with the same seed and
config produce identical bytes. The wall-clock time and output paths go into
a JSON sidecar next to the CSV instead.
"""

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .constants import FLOAT_FORMAT, MANIFEST_SUFFIX
from .version import get_version_info

# -------

OVERLAY_COLUMNS = ("gamma_db", "user", "source", "value", "ci_lo", "ci_hi", "trials")
CURVE_COLUMNS = ("gamma_db", "user", "p_hat", "ci_lo", "ci_hi", "trials", "exponent")

@dataclass(frozen=True)
class RunManifest:
	experiment: str
	version: str
	seed: int
	config: dict = field(default_factory=dict)

	def header_lines(self):
		lines = [
			f"# experiment: {self.experiment}",
			f"# version: {self.version}",
			f"# seed: {self.seed}",
		]
		lines.extend(f"# {key}={format_value(self.config[key])}" for key in sorted(self.config))
		return lines

def format_value(value) -> str:
	"""Cell text: floats through FLOAT_FORMAT, None as empty, sequences comma-joined (semicolons between nested ones)."""
	if value is None:
		return ""
	if isinstance(value, bool):
		return "true" if value else "false"
	if isinstance(value, float):
		if math.isnan(value):
			return "nan"
		if math.isinf(value):
			return "inf" if value > 0 else "-inf"
		return FLOAT_FORMAT % value
	if isinstance(value, (tuple, list)):
		nested = any(isinstance(v, (tuple, list)) for v in value)
		return (';' if nested else ',').join(format_value(v) for v in value)
	if hasattr(value, 'item'):
		return format_value(value.item())
	return str(value)

def write_csv(stream, manifest: RunManifest, columns, rows):
	for line in manifest.header_lines():
		stream.write(line + "\n")
	writer = csv.writer(stream, lineterminator="\n")
	writer.writerow(columns)
	for row in rows:
		writer.writerow([format_value(v) for v in row])

def write_result(path, manifest: RunManifest, columns, rows, extra_outputs=()):
	"""
	Write the CSV to `path` (stdout when path is None or '-') and, for a real
	file, the manifest sidecar. Returns the sidecar path or None.
	"""
	if path in (None, '-'):
		write_csv(sys.stdout, manifest, columns, rows)
		return None
	with open(path, "wt", newline="") as f:
		write_csv(f, manifest, columns, rows)
	return write_sidecar(path, manifest, [str(path), *map(str, extra_outputs)])

def write_sidecar(path, manifest: RunManifest, outputs):
	sidecar = f"{path}{MANIFEST_SUFFIX}"
	data = {
		"experiment": manifest.experiment,
		"version": manifest.version,
		"seed": manifest.seed,
		"commit": get_version_info()["commit_hash"],
		"config": {key: format_value(value) for key, value in sorted(manifest.config.items())},
		"outputs": list(outputs),
		"finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
	}
	with open(sidecar, "wt") as f:
		json.dump(data, f, indent=2)
		f.write("\n")
	return sidecar

def read_csv_rows(path):
	"""(header lines without '#', list of row dicts). Used to compare runs."""
	header, body = [], []
	with open(path, "rt", newline="") as f:
		for line in f:
			if line.startswith('#'):
				header.append(line[1:].strip())
			else:
				body.append(line)
	return header, list(csv.DictReader(body))
