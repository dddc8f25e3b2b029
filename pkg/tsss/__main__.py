#
#	__main__.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Starter for the TSSS engine: python -m tsss <command> ...
#

import argparse, sys
from typing import List, Optional
from tsss.Configuration import Configuration, version
from tsss.Constants import Constants as C
from tsss.Logging import Logging
from tsss.Commands import commands
from tsss import Engine


description = 'TSSS ' + version + ' - multi-hop retrieval-augmented question answering with template reasoning and similarity-based termination'


def _floatList(value: str) -> List[float]:
	try:
		return [ float(v) for v in value.split(',') if len(v.strip()) > 0 ]
	except ValueError:
		raise argparse.ArgumentTypeError('not a comma separated list of numbers: %s' % value)


def _intList(value: str) -> List[int]:
	try:
		result = [ int(v) for v in value.split(',') if len(v.strip()) > 0 ]
	except ValueError:
		raise argparse.ArgumentTypeError('not a comma separated list of integers: %s' % value)
	if len(result) == 0 or any(v < 1 for v in result):
		raise argparse.ArgumentTypeError('values must be positive integers: %s' % value)
	return result


def _positive(value: str) -> int:
	try:
		if (v := int(value)) >= 1:
			return v
	except ValueError:
		pass
	raise argparse.ArgumentTypeError('not a positive integer: %s' % value)


# Handle command line arguments
def parseArgs(argv: Optional[List[str]] = None) -> argparse.Namespace:
	parser = argparse.ArgumentParser(prog='tsss', description=description)
	parser.add_argument('--config', action='store', dest='configfile', default=None, help='specify the configuration file (default: tsss.ini, if present)')
	parser.add_argument('--log-level', action='store', dest='loglevel', default=None, choices=[ 'info', 'error', 'warn', 'debug', 'off'], type=str.lower, help='set the log level, or turn logging off')

	# Run settings shared by the question answering commands
	runArgs = argparse.ArgumentParser(add_help=False)
	runArgs.add_argument('--tau', action='store', dest='tau', default=None, type=float, help='similarity threshold for termination, in [-1, 1] (default 0.85)')
	runArgs.add_argument('--k', action='store', dest='k', default=None, type=_positive, help='passages retrieved per query (default 3)')
	runArgs.add_argument('--max-hops', action='store', dest='maxhops', default=None, type=_positive, help='maximum number of hops (default 10)')
	runArgs.add_argument('--method', action='store', dest='method', default=None, choices=C.methods, help='answering method (default tsss)')
	runArgs.add_argument('--index', action='store', dest='index', default=None, help='index file')

	batchArgs = argparse.ArgumentParser(add_help=False)
	batchArgs.add_argument('--dataset', action='store', dest='dataset', default=None, help='dataset JSONL file')
	batchArgs.add_argument('--output', action='store', dest='output', default=None, help='report directory')
	batchArgs.add_argument('--parallelism', action='store', dest='parallelism', default=None, type=_positive, help='questions answered concurrently')
	batchArgs.add_argument('--judge', action='store_true', dest='judge', default=None, help='run the LLM judge (ACC_L)')
	batchArgs.add_argument('--best-effort', action='store_true', dest='besteffort', default=False, help='exit with 0 even when items failed')

	subparsers = parser.add_subparsers(dest='command', metavar='command')
	subparsers.required = True

	ingest = subparsers.add_parser('ingest', help='build the index from a JSONL corpus')
	ingest.add_argument('--corpus', action='store', dest='corpus', default=None, help='corpus JSONL file with id, title, contents')
	ingest.add_argument('--index', action='store', dest='index', default=None, help='index file to write')
	ingest.add_argument('--force', action='store_true', dest='force', default=False, help='overwrite an existing index')

	ask = subparsers.add_parser('ask', parents=[ runArgs ], help='answer a single question')
	ask.add_argument('question', help='the question')
	ask.add_argument('-v', '--verbose', action='store_true', dest='verbose', default=False, help='print the hop log with scores and decisions')
	ask.add_argument('--trace', action='store', dest='trace', default=None, help='write the trace as JSON to this file')

	evaluate = subparsers.add_parser('eval', parents=[ runArgs, batchArgs ], help='evaluate a method on a dataset')
	evaluate.add_argument('--per-item', action='store_true', dest='peritem', default=False, help='also write all traces as JSONL')

	bench = subparsers.add_parser('bench', parents=[ runArgs, batchArgs ], help='sweep the termination threshold')
	bench.add_argument('--taus', action='store', dest='taus', default=None, type=_floatList, help='comma separated thresholds (default 0.8,0.85,0.9)')

	cost = subparsers.add_parser('cost-model', help='print the decode cost grid with and without KV-cache')
	cost.add_argument('--T', action='store', dest='T', default=[ 128, 512, 2048, 8192 ], type=_intList, help='comma separated sequence lengths')
	cost.add_argument('--d', action='store', dest='d', default=[ 128, 4096 ], type=_intList, help='comma separated model dimensions')
	cost.add_argument('--window', action='store', dest='window', default=None, type=_positive, help='also compute the sliding-window variant')
	cost.add_argument('--csv', action='store', dest='csv', default=None, help='write the grid as CSV to this file')

	return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
	args = parseArgs(argv)		# exits with 2 on usage errors
	if not Configuration.init(args):
		return C.exitUsageError
	Logging.init()
	try:
		Engine.startup()
		return commands[args.command](args)
	finally:
		Logging.finit()


if __name__ == '__main__':
	sys.exit(main())
