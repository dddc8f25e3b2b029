#
#	Commands.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	The command line subcommands. Each command returns an exit code. Data goes
#	to standard output or files, logs and errors to standard error.
#

import argparse, csv, functools, io, os
from typing import Callable
from rich.console import Console
from rich.table import Table
from tsss.Baselines import getRunner
from tsss.Configuration import Configuration
from tsss.Constants import Constants as C
from tsss.CostModel import costGrid
from tsss.Evaluation import loadDataset, runEval, sweepRows, tauSweep, writeReport, writeSweep
from tsss.Logging import Logging
from tsss.Orchestrator import RunConfig, Trace
from tsss.Storage import PassageStore, readCorpus
from tsss.Types import TSSSError
from tsss.VectorIndex import buildIndex, saveIndex
from tsss import Engine, Utils


console = Console()
errConsole = Console(stderr=True)

Command = Callable[[argparse.Namespace], int]


def command(fn: Command) -> Command:
	""" Map expected failures to exit codes: configuration problems are usage
		errors, everything else is a run error.
	"""
	@functools.wraps(fn)
	def wrapper(args: argparse.Namespace) -> int:
		try:
			return fn(args)
		except TSSSError as e:
			Logging.logErr(str(e))
			errConsole.print('[red]Error:[/red] %s' % str(e), highlight=False)
			return C.exitUsageError if e.rc == C.rcConfigurationError else C.exitRunError
	return wrapper


#########################################################################
#
#	ingest
#

@command
def cmdIngest(args: argparse.Namespace) -> int:
	corpusPath = Configuration.get('paths.corpus')
	indexPath = Configuration.get('paths.index')
	storePath = Configuration.get('paths.store')
	if not getattr(args, 'force', False) and (os.path.exists(indexPath) or os.path.exists(storePath)):
		raise TSSSError(C.rcAlreadyExists, 'index exists: %s (use --force to overwrite)' % indexPath)

	passages = readCorpus(corpusPath)
	embedder = Engine.createEmbedder()
	index = buildIndex(passages, embedder, Configuration.get('embedding.embedTitle'), Configuration.get('embedding.batchSize'))
	Utils.makeParentDirs(indexPath)
	saveIndex(index, indexPath)

	store = PassageStore(storePath)
	store.purge()	# --force
	store.insertPassages(passages)
	store.close()

	console.print('Indexed %d passages (dim %d) into %s' % (index.count, index.dim, indexPath))
	return C.exitSuccess


#########################################################################
#
#	ask
#

def printHops(trace: Trace) -> None:
	table = Table(title='Hops', show_lines=False)
	for column in [ 'hop', 'sub-query', 'score', 'decision', 'passages', 'response' ]:
		table.add_column(column)
	for hop in trace.hops:
		table.add_row(	str(hop.index),
						hop.subQuery,
						'%.4f' % hop.decision.score if hop.decision else '-',
						('HALT' if hop.decision.halt else 'CONTINUE') if hop.decision else '-',
						', '.join(h.hit.passageId for h in hop.hits),
						hop.response)
	console.print(table)
	console.print('termination: %s, retrievals: %d, generated tokens: %d, cached tokens: %d, %.2f s' % (trace.terminationKind.value if trace.terminationKind else None, trace.retrievals, trace.generatedTokens, trace.cachedTokens, trace.seconds))


@command
def cmdAsk(args: argparse.Namespace) -> int:
	embedder = Engine.createEmbedder()
	tokenizer = Engine.createTokenizer()
	llm = Engine.createBackend('llm', tokenizer)
	retriever = Engine.openRetriever(embedder)
	runner = getRunner(Configuration.get('eval.method'))
	try:
		trace = runner(args.question, retriever, llm, None, RunConfig.fromConfiguration(), tokenizer)
	except TSSSError as e:
		if e.trace is not None and args.trace:
			Utils.writeText(args.trace, e.trace.serialize() + '\n')
		raise
	if args.verbose:
		printHops(trace)
	console.print(trace.finalAnswer, highlight=False)
	if args.trace:
		Utils.writeText(args.trace, trace.serialize() + '\n')
		Logging.log('Trace written to: %s' % args.trace)
	return C.exitSuccess


#########################################################################
#
#	eval and bench
#

@command
def cmdEval(args: argparse.Namespace) -> int:
	items = loadDataset(Configuration.get('paths.dataset'))
	tokenizer = Engine.createTokenizer()
	retriever = Engine.openRetriever(Engine.createEmbedder())
	report = runEval(	Configuration.get('eval.method'),
						items,
						retriever,
						Engine.createBackend('llm', tokenizer),
						RunConfig.fromConfiguration(),
						tokenizer,
						Engine.createJudge(),
						Configuration.get('eval.parallelism'),
						Configuration.get('judge.rateLimit'),
						Configuration.get('run.shareCache'))
	writeReport(report, Configuration.get('paths.output'), args.peritem)
	console.print(report.tableRow(), highlight=False)
	if report.itemErrors > 0 and not (args.besteffort or Configuration.get('eval.bestEffort')):
		errConsole.print('%d item(s) failed' % report.itemErrors)
		return C.exitRunError
	return C.exitSuccess


@command
def cmdBenchTau(args: argparse.Namespace) -> int:
	taus = args.taus if args.taus else Configuration.get('eval.taus')
	if any(not -1.0 <= t <= 1.0 for t in taus):
		raise TSSSError(C.rcConfigurationError, 'taus must be in [-1, 1]: %s' % taus)
	items = loadDataset(Configuration.get('paths.dataset'))
	tokenizer = Engine.createTokenizer()
	retriever = Engine.openRetriever(Engine.createEmbedder())
	reports = tauSweep(	taus,
						items,
						retriever,
						lambda: Engine.createBackend('llm', tokenizer),
						RunConfig.fromConfiguration(),
						tokenizer,
						Engine.createJudge if Configuration.get('judge.enable') else None,
						Configuration.get('eval.parallelism'),
						Configuration.get('judge.rateLimit'))
	writeSweep(reports, Configuration.get('paths.output'))

	table = Table(title='Threshold sweep')
	for column in [ 'tau', 'EM', 'ACC_L', 'T (s)', 'tokens', 'hops', 'errors', 'replay %' ]:
		table.add_column(column, justify='right')
	for row in sweepRows(reports):
		table.add_row(	'%.2f' % row['tau'],
						'%.1f' % row['em'],
						'%.1f' % row['acc_l'] if row['acc_l'] is not None else '-',
						'%.2f' % row['mean_seconds'],
						'%.1f' % row['mean_tokens'],
						'%.2f' % row['mean_hops'],
						str(row['item_errors']),
						'%.1f' % row['replay_agreement'] if row['replay_agreement'] is not None else '-')
	console.print(table)
	if sum(r.itemErrors for r in reports) > 0 and not (args.besteffort or Configuration.get('eval.bestEffort')):
		return C.exitRunError
	return C.exitSuccess


#########################################################################
#
#	cost-model
#

@command
def cmdCostModel(args: argparse.Namespace) -> int:
	rows = costGrid(args.T, args.d, args.window)
	table = Table(title='Decode cost per layer')
	for column in [ 'T', 'd', 'no cache', 'with cache', 'ratio', 'kv memory' ] + ([ 'window %d' % args.window ] if args.window else []):
		table.add_column(column, justify='right')
	for r in rows:
		table.add_row(str(r.T), str(r.d), str(r.noCache), str(r.withCache), '%.2f' % r.ratio, str(r.kvMemory), *([ str(r.slidingWindow) ] if args.window else []))
	console.print(table)

	if args.csv:
		out = io.StringIO()
		writer = csv.DictWriter(out, fieldnames=list(rows[0].json.keys()) if rows else [], lineterminator='\n')
		writer.writeheader()
		writer.writerows([ r.json for r in rows ])
		Utils.writeText(args.csv, out.getvalue())
		Logging.log('Cost grid written to: %s' % args.csv)
	return C.exitSuccess


commands = {
	'ingest'		: cmdIngest,
	'ask'			: cmdAsk,
	'eval'			: cmdEval,
	'bench'			: cmdBenchTau,
	'cost-model'	: cmdCostModel,
}
