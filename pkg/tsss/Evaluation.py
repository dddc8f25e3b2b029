#
#	Evaluation.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Evaluation harness: dataset loading, per-item metrics, aggregation into
#	run reports, threshold sweeps and report files (JSON, CSV, JSONL traces).
#

import csv, io, os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional
from tsss.Constants import Constants as C
from tsss.LLMClient import LLMBackend
from tsss.Logging import Logging
from tsss.Metrics import RateLimiter, exactMatch, judge
from tsss.Orchestrator import Clock, RunConfig, Trace, answerBatch
from tsss.Baselines import getRunner
from tsss.Retriever import Retriever
from tsss.Statistics import Statistics
from tsss.Terminator import decideSequence
from tsss.Tokenizer import Tokenizer
from tsss.Types import TerminationKind, TSSSError
from tsss import Utils


@dataclass(frozen=True)
class QAItem:
	id: str
	question: str
	goldenAnswers: List[str]


def loadDataset(path: str) -> List[QAItem]:
	""" Load a JSONL dataset with the fields `id`, `question` and `golden_answers`,
		keeping the file order.
	"""
	items: List[QAItem] = []
	seen = set()
	for lineno, obj in Utils.iterJSONL(path):
		if isinstance(obj.get('id'), int):
			obj['id'] = str(obj['id'])
		qid = Utils.requireString(obj, 'id', path, lineno)
		question = Utils.requireString(obj, 'question', path, lineno)
		golds = obj.get('golden_answers')
		if not isinstance(golds, list) or len(golds) == 0 or not all(isinstance(g, str) for g in golds):
			raise TSSSError(C.rcSchemaViolation, '%s: line %d: field "golden_answers" must be a non-empty list of strings' % (path, lineno))
		if qid in seen:
			raise TSSSError(C.rcSchemaViolation, '%s: line %d: duplicate id "%s"' % (path, lineno, qid))
		seen.add(qid)
		items.append(QAItem(qid, question, golds))
	Logging.log('Loaded %d items from: %s' % (len(items), path))
	return items


@dataclass
class ItemRow:
	id: str
	question: str
	prediction: str
	em: bool
	accL: Optional[bool]
	generatedTokens: int
	prefilledTokens: int
	cachedTokens: int
	hops: int
	retrievals: int
	seconds: float
	terminationKind: Optional[str]
	error: Optional[str]
	judgeError: Optional[str] = None

	@staticmethod
	def fromTrace(item: QAItem, trace: Trace) -> 'ItemRow':
		return ItemRow(	item.id,
						item.question,
						trace.finalAnswer,
						exactMatch(trace.finalAnswer, item.goldenAnswers) if trace.error is None else False,
						None,
						trace.generatedTokens,
						trace.prefilledTokens,
						trace.cachedTokens,
						trace.hopCount,
						trace.retrievals,
						trace.seconds,
						trace.terminationKind.value if trace.terminationKind else None,
						trace.error)


	def toJSON(self, includeTimings: bool = True) -> Dict[str, Any]:
		result = {
			'id'				: self.id,
			'question'			: self.question,
			'prediction'		: self.prediction,
			'em'				: int(self.em),
			'acc_l'				: None if self.accL is None else int(self.accL),
			'generated_tokens'	: self.generatedTokens,
			'prefilled_tokens'	: self.prefilledTokens,
			'cached_tokens'		: self.cachedTokens,
			'hops'				: self.hops,
			'retrievals'		: self.retrievals,
			'seconds'			: self.seconds,
			'termination_kind'	: self.terminationKind,
			'error'				: self.error,
			'judge_error'		: self.judgeError,
		}
		if not includeTimings:
			del result['seconds']
		return result


rowFields = [ 'id', 'question', 'prediction', 'em', 'acc_l', 'generated_tokens', 'prefilled_tokens', 'cached_tokens', 'hops', 'retrievals', 'seconds', 'termination_kind', 'error', 'judge_error' ]


def _mean(values: List[float]) -> float:
	return sum(values) / len(values) if len(values) > 0 else 0.0


def aggregate(rows: List[ItemRow]) -> Dict[str, Any]:
	""" Aggregates of a list of rows. EM and ACC_L as percentages with one
		decimal. ACC_L is averaged over the rows with a verdict only.
		Failed judge calls count as item errors.
	"""
	verdicts = [ r.accL for r in rows if r.accL is not None ]
	histogram: Dict[str, int] = {}
	for r in sorted(rows, key=lambda r: r.hops):
		histogram[str(r.hops)] = histogram.get(str(r.hops), 0) + 1
	return {
		'items'			: len(rows),
		'em'			: round(100.0 * _mean([ float(r.em) for r in rows ]), 1),
		'acc_l'			: round(100.0 * _mean([ float(v) for v in verdicts ]), 1) if len(verdicts) > 0 else None,
		'mean_seconds'	: _mean([ r.seconds for r in rows ]),
		'mean_tokens'	: _mean([ float(r.generatedTokens) for r in rows ]),
		'mean_hops'		: _mean([ float(r.hops) for r in rows ]),
		'hop_histogram'	: histogram,
		'item_errors'	: sum(1 for r in rows if r.error is not None or r.judgeError is not None),
		'judge_errors'	: sum(1 for r in rows if r.judgeError is not None),
	}


@dataclass
class RunReport:
	method: str
	config: RunConfig
	rows: List[ItemRow] = field(default_factory=list)
	traces: List[Trace] = field(default_factory=list)
	statistics: Dict[str, Any] = field(default_factory=dict)

	@property
	def aggregates(self) -> Dict[str, Any]:
		return aggregate(self.rows)


	@property
	def itemErrors(self) -> int:
		return self.aggregates['item_errors']


	def tableRow(self) -> str:
		""" One line in the shape of a results table row: method, EM, ACC_L, T. """
		a = self.aggregates
		accL = '%5.1f' % a['acc_l'] if a['acc_l'] is not None else '    -'
		return '%-14s EM %5.1f  ACC_L %s  T %6.2f s  tokens %7.1f  hops %5.2f' % (self.method, a['em'], accL, a['mean_seconds'], a['mean_tokens'], a['mean_hops'])


	def toJSON(self, includeTimings: bool = True, includeStatistics: bool = True) -> Dict[str, Any]:
		aggregates = self.aggregates
		if not includeTimings:
			del aggregates['mean_seconds']
		result: Dict[str, Any] = {
			'method'		: self.method,
			'config'		: { 'tau' : self.config.tau, 'k' : self.config.k, 'max_hops' : self.config.maxHops, 'max_iterations' : self.config.maxIterations },
			'aggregates'	: aggregates,
			'rows'			: [ r.toJSON(includeTimings) for r in self.rows ],
		}
		if includeStatistics:
			result['statistics'] = self.statistics
		return result


	def toCSV(self) -> str:
		out = io.StringIO()
		writer = csv.DictWriter(out, fieldnames=rowFields, lineterminator='\n')
		writer.writeheader()
		for r in self.rows:
			writer.writerow(r.toJSON())
		return out.getvalue()


def runEval(method: str, items: List[QAItem], retriever: Optional[Retriever], llm: LLMBackend, config: Optional[RunConfig] = None, tokenizer: Optional[Tokenizer] = None, judgeBackend: Optional[LLMBackend] = None, parallelism: int = 1, judgeRateLimit: float = 0.0, shareCache: bool = False, clock: Optional[Clock] = None) -> RunReport:
	""" Run a method over a dataset. Item failures are recorded in their rows,
		the run continues. The judge pass runs when a judge backend is given.
	"""
	config = config or RunConfig()
	runner = getRunner(method)
	Logging.log('Evaluating %d items with %s' % (len(items), method))
	traces = answerBatch([ i.question for i in items ], retriever, llm, config, tokenizer, parallelism, runner, shareCache, clock, method)

	report = RunReport(method, config)
	statistics = Statistics()
	for item, trace in zip(items, traces):
		report.rows.append(ItemRow.fromTrace(item, trace))
		report.traces.append(trace)
		statistics.handleTrace(trace)

	if judgeBackend is not None:
		limiter = RateLimiter(judgeRateLimit)
		for item, row in zip(items, report.rows):
			if row.error is not None:
				continue
			try:
				row.accL = judge(item.question, item.goldenAnswers, row.prediction, judgeBackend, limiter)
			except TSSSError as e:
				Logging.logErr('Judge failed for item %s: %s' % (item.id, str(e)))
				row.judgeError = str(e)

	report.statistics = statistics.getStats()
	if (n := report.itemErrors) > 0:
		Logging.logWarn('%d of %d items failed' % (n, len(items)))
	Logging.log(report.tableRow())
	return report


def tauSweep(taus: List[float], items: List[QAItem], retriever: Retriever, llmFactory: Callable[[], LLMBackend], config: Optional[RunConfig] = None, tokenizer: Optional[Tokenizer] = None, judgeFactory: Optional[Callable[[], LLMBackend]] = None, parallelism: int = 1, judgeRateLimit: float = 0.0, clock: Optional[Clock] = None) -> List[RunReport]:
	""" One TSSS evaluation per threshold. Backends are created per run since
		scripted backends are consumed.
	"""
	config = config or RunConfig()
	reports = []
	for tau in taus:
		Logging.log('Threshold sweep: tau %.2f' % tau)
		reports.append(runEval(C.methodTSSS, items, retriever, llmFactory(), config.withTau(tau), tokenizer, judgeFactory() if judgeFactory else None, parallelism, judgeRateLimit, False, clock))
	return reports


def haltingHops(traces: List[Trace]) -> List[Optional[int]]:
	""" The hop at which each trace halted on similarity, or None. """
	return [ t.hopCount if t.error is None and t.terminationKind == TerminationKind.similarityHalt else None for t in traces ]


def replayHalts(traces: List[Trace], tau: float) -> List[Optional[int]]:
	""" Replay the recorded per-hop scores of each trace against another
		threshold and return the hop it would halt at. Exact for thresholds
		up to the one the traces were recorded with, since a hop's prompt
		only depends on earlier hops.
	"""
	return [ decideSequence([ h.decision.score for h in t.hops if h.decision is not None ], tau) if t.error is None else None for t in traces ]


def sweepRows(reports: List[RunReport]) -> List[Dict[str, Any]]:
	""" One row per threshold. `replay_agreement` is the percentage of items
		whose halting hop matches the replay of the highest threshold's scores.
	"""
	reference = max(reports, key=lambda r: r.config.tau) if reports else None
	result = []
	for r in reports:
		a = r.aggregates
		agreement = None
		if reference is not None:
			pairs = [ (p, h) for p, h, t, rt in zip(replayHalts(reference.traces, r.config.tau), haltingHops(r.traces), r.traces, reference.traces) if t.error is None and rt.error is None ]
			if len(pairs) > 0:
				agreement = round(100.0 * sum(1 for p, h in pairs if p == h) / len(pairs), 1)
		result.append({ 'tau' : r.config.tau, 'em' : a['em'], 'acc_l' : a['acc_l'], 'mean_seconds' : a['mean_seconds'], 'mean_tokens' : a['mean_tokens'], 'mean_hops' : a['mean_hops'], 'item_errors' : a['item_errors'], 'replay_agreement' : agreement })
	return result


#########################################################################
#
#	Report files
#

def writeReport(report: RunReport, directory: str, perItem: bool = False) -> List[str]:
	""" Write <method>.json and <method>.csv (and <method>.traces.jsonl). Returns the paths. """
	base = os.path.join(directory, report.method)
	paths = [ base + '.json', base + '.csv' ]
	Utils.writeText(paths[0], Utils.toJSON(report.toJSON()) + '\n')
	Utils.writeText(paths[1], report.toCSV())
	if perItem:
		paths.append(base + '.traces.jsonl')
		Utils.writeJSONL(paths[2], [ t.toJSON() for t in report.traces ])
	for p in paths:
		Logging.log('Report written to: %s' % p)
	return paths


def writeSweep(reports: List[RunReport], directory: str) -> List[str]:
	rows = sweepRows(reports)
	paths = [ os.path.join(directory, 'bench_tau.json'), os.path.join(directory, 'bench_tau.csv') ]
	Utils.writeText(paths[0], Utils.toJSON(rows) + '\n')
	out = io.StringIO()
	writer = csv.DictWriter(out, fieldnames=[ 'tau', 'em', 'acc_l', 'mean_seconds', 'mean_tokens', 'mean_hops', 'item_errors', 'replay_agreement' ], lineterminator='\n')
	writer.writeheader()
	writer.writerows(rows)
	Utils.writeText(paths[1], out.getvalue())
	for p in paths:
		Logging.log('Sweep written to: %s' % p)
	return paths
