"""
Version information for fog-match, taken from git when available.

git tag v0.3.0
python -m src.version
"""

import os, subprocess

_REPO_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

def _git(*args) -> str:
	# raises CalledProcessError outside a checkout, FileNotFoundError without git
	result = subprocess.run(['git', *args], cwd=_REPO_DIR, capture_output=True, text=True, check=True)
	return result.stdout.strip()

def get_git_version() -> str:
	"""
	'1.0.0' on a tag, '1.0.0-5-g1a2b3c4' past one, '0.0.0-dev-<hash>' with
	no tags, '0.0.0-unknown' outside a checkout.
	"""
	try:
		return _git('describe', '--tags', '--always', '--dirty=-dirty').removeprefix('v')
	except (subprocess.CalledProcessError, FileNotFoundError):
		pass
	try:
		return f"0.0.0-dev-{_git('rev-parse', '--short', 'HEAD')}"
	except (subprocess.CalledProcessError, FileNotFoundError):
		return "0.0.0-unknown"

def get_build_info() -> dict:
	"""Version plus commit and dirty flag; the commit goes into every manifest sidecar."""
	try:
		# porcelain output is empty on a clean tree
		commit = _git('rev-parse', 'HEAD')
		dirty = bool(_git('status', '--porcelain'))
	except (subprocess.CalledProcessError, FileNotFoundError):
		commit, dirty = 'unknown', False
	return {
		'version': get_git_version(),
		'commit_hash': commit,
		'commit_hash_short': commit[:7],
		'is_dirty': dirty,
	}

_build_info = None	# computed once per process

def get_version_info() -> dict:
	global _build_info
	if _build_info is None:
		_build_info = get_build_info()
	return _build_info.copy()

def get_version() -> str:
	return get_version_info()['version']

if __name__ == "__main__":
	info = get_version_info()
	print(f"Version: {info['version']}")
	print(f"Commit: {info['commit_hash_short']}")
	print(f"Dirty: {info['is_dirty']}")
