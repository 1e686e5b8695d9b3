"""
fog-match.py - fog-match command-line entry point

fog-match studies content outage in a Fog radio access network where
cached contents are split over several Fog access points with
distributed-storage codes and every user is matched to the APs that serve
it by a fairness maximum b-matching.

Commands:
- conditional     Monte Carlo conditional outage against the saddle-point bound
- content         content outage by simulation with the analytic curves overlaid
- compare-codes   the same demand cached with MSR, MBR or MDS codes
- verify          self-checks of the matching, special functions and bounds

Settings come from command-line flags, then a key=value config file
(--config), then built-in defaults. Exit codes: 0 success, 1 usage or
internal error, 2 infeasible configuration, 3 failed verification.
"""

import sys, argparse, logging

from src import constants, main, settings
from src.coded_caching import SCHEMES
from src.errors import FogMatchError
from src.settings import Option
from src.verification import SUITES
from src.version import get_version
from utilities import (
	format_snr_range, parse_bool, parse_float, parse_float_list, parse_int, parse_int_list,
	parse_parameter_set, parse_parameter_sets, parse_scheme_list, parse_snr_range,
)

# --- Options ---

DEFAULT_SNR_DB = "0:40:5"

def _choice(*allowed):
	def parse(text):
		text = str(text).strip()
		return text if text in allowed else None
	return parse

_COMMON = {
	'seed': Option(settings.default_seed, parse_int),
}

_SIMULATION = {
	'snr_db': Option(parse_snr_range(DEFAULT_SNR_DB), parse_snr_range),
	'trials': Option(constants.DEFAULT_TRIALS, parse_int),
	'max_trials': Option(constants.DEFAULT_MAX_TRIALS, parse_int),
	'escalate': Option(True, parse_bool),
}

_MATCHING = {
	'eta': Option(constants.DEFAULT_ETA, parse_float),
	'tilt': Option(None, parse_float),
	'workers': Option(1, parse_int),
	'solver': Option("exact", _choice("exact", "message-passing")),
}

OPTIONS = {
	'conditional': {
		'K': Option(2, parse_int),
		'k': Option(1, parse_int),
		'R': Option(2.0, parse_float),
		**_SIMULATION,
		'trials': Option(constants.DEFAULT_CONDITIONAL_TRIALS, parse_int),
		'max_trials': Option(constants.DEFAULT_CONDITIONAL_MAX_TRIALS, parse_int),
		'method': Option("auto", _choice("auto", "bound", "numeric")),
		**_COMMON,
	},
	'content': {
		'M': Option(None, parse_int),
		'N': Option(None, parse_int),
		'L': Option(1, parse_int),
		'K': Option((1,), parse_int_list),
		'rates': Option(None, parse_float_list),
		'rate': Option(None, parse_float),
		'mux': Option(None, parse_float),
		'optimal_k': Option(False, parse_bool),
		'epsilon': Option(constants.DEFAULT_EPSILON, parse_float),
		'user': Option(None, parse_int),
		'method': Option("auto", _choice("auto", "bound", "numeric")),
		'curves': Option(None, str),
		**_SIMULATION,
		**_MATCHING,
		**_COMMON,
	},
	'compare-codes': {
		'M': Option(2, parse_int),
		'N': Option(5, parse_int),
		'L': Option(1, parse_int),
		'K': Option((2,), parse_int_list),
		'R': Option(2.0, parse_float),
		'D': Option(None, parse_int),
		'schemes': Option(("MSR", "MBR"), lambda text: parse_scheme_list(text, SCHEMES)),
		'parameter_sets': Option(None, parse_parameter_sets),
		'user': Option(None, parse_int),
		**_SIMULATION,
		**_MATCHING,
		**_COMMON,
	},
	'verify': {
		'quick': Option(False, parse_bool),
		'suites': Option(None, lambda text: tuple(s.strip() for s in text.split(',')) or None),
		'inject_violation': Option(False, parse_bool),
		**_COMMON,
	},
}

# --- Argument parsing ---

class ArgumentParser(argparse.ArgumentParser):
	"""argparse with usage errors mapped to exit code 1."""
	def error(self, message):
		self.print_usage(sys.stderr)
		print(f"❌ {self.prog}: {message}", file=sys.stderr)
		sys.exit(constants.EXIT_USAGE)

def _checked(parse, what):
	"""Wrap a None-on-failure parser from utilities as an argparse type."""
	def convert(text):
		value = parse(text)
		if value is None:
			raise argparse.ArgumentTypeError(f"invalid {what}: {text!r}")
		return value
	return convert

def _positive(parse, what):
	def convert(text):
		value = _checked(parse, what)(text)
		if value <= 0:
			raise argparse.ArgumentTypeError(f"{what} must be positive, got {text!r}")
		return value
	return convert

def _add_simulation_arguments(p, default_trials):
	p.add_argument('--snr-db', dest='snr_db', type=_checked(parse_snr_range, "SNR range"), metavar='RANGE',
				   help=f"SNR grid in dB as lo:hi:step or a comma list (default {DEFAULT_SNR_DB})")
	p.add_argument('--trials', type=_positive(parse_int, "trial count"),
				   help=f"initial trials per SNR point (default {default_trials})")
	p.add_argument('--max-trials', dest='max_trials', type=_positive(parse_int, "trial count"),
				   help="ceiling for adaptive escalation")
	p.add_argument('--no-escalate', dest='escalate', action='store_const', const=False,
				   help=f"stop at --trials even with fewer than {constants.MIN_OUTAGE_EVENTS} outage events")
	p.add_argument('--seed', type=_checked(parse_int, "seed"),
				   help=f"master seed (default ${constants.SEED_ENV_VAR} or {constants.DEFAULT_SEED})")

def _add_matching_arguments(p):
	p.add_argument('--eta', type=_checked(parse_float, "eta"),
				   help=f"target non-outage fraction (default {constants.DEFAULT_ETA})")
	p.add_argument('--tilt', type=_checked(parse_float, "tilt"),
				   help="importance-sampling AP outage probability for the reported user, in (0, 1)")
	p.add_argument('--workers', type=_positive(parse_int, "worker count"), help="worker processes (default 1)")
	p.add_argument('--solver', choices=("exact", "message-passing"), help="matching solver (default exact)")
	p.add_argument('--user', type=_positive(parse_int, "user"), help="report only this user (1-based)")

def parse_arguments():
	"""Parse command line arguments."""
	parser = ArgumentParser(
		prog='fog-match.py',
		description='fog-match - content outage of coded caching in Fog-RANs',
		formatter_class=argparse.RawDescriptionHelpFormatter,
		epilog=f"""
Examples:
  fog-match.py conditional --K 2 --k 1 --R 2 --snr-db 0:40:5
  fog-match.py content --M 2 --N 5 --L 1 --K 2 --rate 2 --output outage.csv
  fog-match.py content --N 5 --rates 2,3 --optimal-k --mux 0.5
  fog-match.py compare-codes --M 2 --N 5 --K 2 --R 2 --schemes MSR,MBR
  fog-match.py compare-codes --schemes MSR --parameter-set 6,4,3,2 --parameter-set 8,4,4,2 --parameter-set 10,5,6,3
  fog-match.py verify --quick
Exit codes: 0 success, 1 usage error, 2 infeasible configuration, 3 verification failed.
Seeds default to ${constants.SEED_ENV_VAR} when set.
		""".strip()
	)
	parser.add_argument('--version', action='version', version=f"%(prog)s {get_version()}")
	parser.add_argument('--verbose', '-v', action='store_true', help='debug logging on stderr')

	shared = ArgumentParser(add_help=False)
	shared.add_argument('--config', metavar='PATH', help='key=value settings file; flags take precedence')
	shared.add_argument('--output', '-o', metavar='PATH', help="result CSV (default stdout); '-' for stdout")

	subparsers = parser.add_subparsers(dest='command', help='Available commands')

	cond = subparsers.add_parser('conditional', parents=[shared],
								 help='conditional outage: Monte Carlo, saddle-point bound and DMT slope')
	cond.add_argument('--K', type=_positive(parse_int, "K"), help='APs serving the user (default 2)')
	cond.add_argument('--k', type=_checked(parse_int, "k"), help='APs out of outage, 0..K (default 1)')
	cond.add_argument('--R', type=_checked(parse_float, "rate"), help='content size in nats (default 2)')
	cond.add_argument('--method', choices=("auto", "bound", "numeric"), help='analytic curve (default auto)')
	_add_simulation_arguments(cond, constants.DEFAULT_CONDITIONAL_TRIALS)

	content = subparsers.add_parser('content', parents=[shared],
									help='content outage by simulation with analytic overlays')
	content.add_argument('--M', type=_positive(parse_int, "M"), help='number of users')
	content.add_argument('--N', type=_positive(parse_int, "N"), help='number of Fog-APs')
	content.add_argument('--L', type=_positive(parse_int, "L"), help='resource blocks per AP (default 1)')
	content.add_argument('--K', type=_checked(parse_int_list, "demand list"), help='APs per user, one value or a list')
	rate = content.add_mutually_exclusive_group()
	rate.add_argument('--rates', type=_checked(parse_float_list, "rate list"), help='content sizes in nats, one per user')
	rate.add_argument('--rate', type=_checked(parse_float, "rate"), help='content size in nats for every user')
	content.add_argument('--mux', type=_checked(parse_float, "multiplexing gain"),
						 help='multiplexing gain r; the rate follows R = r ln(SNR)')
	content.add_argument('--optimal-k', dest='optimal_k', action='store_const', const=True,
						 help='demand proportional to content size (needs --rates)')
	content.add_argument('--epsilon', type=_checked(parse_float, "epsilon"), help='b-matching tolerance')
	content.add_argument('--method', choices=("auto", "bound", "numeric"), help='conditional outage evaluation')
	content.add_argument('--curves', metavar='PATH', help='also write per-user curves with outage exponents')
	_add_simulation_arguments(content, constants.DEFAULT_TRIALS)
	_add_matching_arguments(content)

	codes = subparsers.add_parser('compare-codes', parents=[shared],
								  help='content outage under MSR, MBR and MDS codes')
	codes.add_argument('--M', type=_positive(parse_int, "M"), help='number of users (default 2)')
	codes.add_argument('--N', type=_positive(parse_int, "N"), help='number of Fog-APs (default 5)')
	codes.add_argument('--L', type=_positive(parse_int, "L"), help='resource blocks per AP (default 1)')
	codes.add_argument('--K', type=_checked(parse_int_list, "demand list"), help='APs per user (default 2)')
	codes.add_argument('--R', type=_checked(parse_float, "rate"), help='content size in nats (default 2)')
	codes.add_argument('--D', type=_positive(parse_int, "repair degree"), help='repair degree (default N)')
	codes.add_argument('--schemes', type=_checked(lambda t: parse_scheme_list(t, SCHEMES), "scheme list"),
					   help=f"comma list from {', '.join(SCHEMES)} (default MSR,MBR)")
	codes.add_argument('--parameter-set', dest='parameter_sets', action='append', metavar='M,N,L,K',
					   type=_checked(parse_parameter_set, "parameter set M,N,L,K"),
					   help='one system configuration per curve; repeat to compare several (overrides --M --N --L --K)')
	_add_simulation_arguments(codes, constants.DEFAULT_TRIALS)
	_add_matching_arguments(codes)

	verify = subparsers.add_parser('verify', parents=[shared], help='run the self-check suites')
	verify.add_argument('--quick', action='store_const', const=True, help='smaller instance counts')
	verify.add_argument('--suite', dest='suites', action='append', choices=tuple(SUITES),
						help='run only this suite (repeatable)')
	verify.add_argument('--inject-violation', dest='inject_violation', action='store_const', const=True,
						help=argparse.SUPPRESS)
	verify.add_argument('--seed', type=_checked(parse_int, "seed"), help='master seed')

	return parser.parse_args()

# --- Main Logic ---

def configure_logging(verbose):
	logging.basicConfig(
		level=logging.DEBUG if verbose else logging.WARNING,
		format="%(levelname)s %(name)s: %(message)s",
		stream=sys.stderr,
	)

def resolve_options(args):
	"""Merge flags, the config file and defaults for args.command."""
	config = settings.load_config_file(args.config) if args.config else {}
	options = OPTIONS[args.command]
	flags = {key: getattr(args, key, None) for key in options}
	for key in ('suites', 'parameter_sets'):
		if flags.get(key) is not None:
			flags[key] = tuple(flags[key])
	resolved = settings.resolve(flags, options, config)
	resolved['output'] = args.output
	return resolved

def run(args):
	if args.command is None:
		print("❌ No command given. Run with --help for the list of commands.", file=sys.stderr)
		return constants.EXIT_USAGE
	try:
		opts = resolve_options(args)
		if 'snr_db' in opts:
			logging.getLogger(__name__).debug("SNR grid %s dB", format_snr_range(opts['snr_db']))
		return main.COMMANDS[args.command](opts)
	except FogMatchError as e:
		print(f"❌ {e}", file=sys.stderr)
		return e.exit_code
	except ValueError as e:
		print(f"❌ Invalid configuration: {e}", file=sys.stderr)
		return constants.EXIT_USAGE
	except KeyboardInterrupt:
		print("Exiting due to keyboard interrupt.", file=sys.stderr)
		return constants.EXIT_USAGE

if __name__ == "__main__":
	args = parse_arguments()
	configure_logging(args.verbose)
	sys.exit(run(args))
