#
#	Orchestrator.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	The multi-hop loop: generate a sub-query, decide whether to stop, retrieve,
#	generate a response, repeat, and finally generate the answer. Every run
#	produces a Trace with its hops, decisions and token accounting.
#

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Set
from tsss.Configuration import Configuration
from tsss.Constants import Constants as C
from tsss.LLMClient import GenerationRequest, GenerationResult, LLMBackend, generate
from tsss.Logging import Logging
from tsss.PrefixCache import PrefixCacheRegistry
from tsss.Retriever import RetrievedPassage, Retriever
from tsss.TemplateEngine import Conversation, SegmentedPrompt
from tsss.Terminator import QueryHistory, TerminationDecision, evaluateSubquery
from tsss.Tokenizer import Tokenizer
from tsss.Types import TerminationKind, TSSSError
from tsss import Utils


Clock = Callable[[], float]


@dataclass(frozen=True)
class RunConfig:
	tau: float = C.defaultTau
	k: int = C.defaultK
	maxHops: int = C.defaultMaxHops
	maxNewTokensSubquery: int = C.defaultMaxNewTokensSubquery
	maxNewTokensResponse: int = C.defaultMaxNewTokensResponse
	maxNewTokensFinal: int = C.defaultMaxNewTokensFinal
	stopSubquery: List[str] = field(default_factory=lambda: list(C.stopSubquery))
	stopResponse: List[str] = field(default_factory=lambda: list(C.stopResponse))
	stopFinal: List[str] = field(default_factory=lambda: list(C.stopFinal))
	temperature: float = 0.0
	dedupPassages: bool = False
	maxIterations: int = C.defaultMaxIterations			# baselines
	iterRetGenRounds: int = C.defaultIterRetGenRounds	# baselines

	def __post_init__(self) -> None:
		if not -1.0 <= self.tau <= 1.0:
			raise TSSSError(C.rcInvalidArgument, 'tau must be in [-1, 1]: %s' % self.tau)
		if min(self.k, self.maxHops, self.maxIterations, self.iterRetGenRounds) < 1:
			raise TSSSError(C.rcInvalidArgument, 'k, maxHops, maxIterations and iterRetGenRounds must be >= 1')


	@staticmethod
	def fromConfiguration() -> 'RunConfig':
		return RunConfig(	tau=Configuration.get('run.tau'),
							k=Configuration.get('run.k'),
							maxHops=Configuration.get('run.maxHops'),
							maxNewTokensSubquery=Configuration.get('run.maxNewTokensSubquery'),
							maxNewTokensResponse=Configuration.get('run.maxNewTokensResponse'),
							maxNewTokensFinal=Configuration.get('run.maxNewTokensFinal'),
							temperature=Configuration.get('llm.temperature'),
							dedupPassages=Configuration.get('run.dedupPassages'),
							maxIterations=Configuration.get('baselines.maxIterations'),
							iterRetGenRounds=Configuration.get('baselines.iterRetGenRounds'))


	def withTau(self, tau: float) -> 'RunConfig':
		return replace(self, tau=tau)


@dataclass
class Cost:
	""" Token accounting of one or more generations. """
	generated: int = 0
	prefilledNew: int = 0
	cached: int = 0
	generations: int = 0

	def add(self, generated: int, prefilledNew: int, cached: int) -> None:
		self.generated += generated
		self.prefilledNew += prefilledNew
		self.cached += cached
		self.generations += 1


@dataclass
class Hop:
	index: int
	subQuery: str = ''
	decision: Optional[TerminationDecision] = None
	hits: List[RetrievedPassage] = field(default_factory=list)
	response: str = ''
	cost: Cost = field(default_factory=Cost)

	@property
	def json(self) -> Dict[str, Any]:
		return {
			'index'					: self.index,
			'sub_query'				: self.subQuery,
			'decision'				: self.decision.json if self.decision else None,
			'hits'					: [ h.json for h in self.hits ],
			'response'				: self.response,
			'tokens_generated'		: self.cost.generated,
			'tokens_prefilled_new'	: self.cost.prefilledNew,
			'tokens_cached'			: self.cost.cached,
		}


@dataclass
class Trace:
	question: str
	method: str = C.methodTSSS
	hops: List[Hop] = field(default_factory=list)
	finalAnswer: str = ''
	finalCost: Cost = field(default_factory=Cost)
	terminationKind: Optional[TerminationKind] = None
	retrievals: int = 0
	seconds: float = 0.0
	error: Optional[str] = None

	@property
	def hopCount(self) -> int:
		return len(self.hops)


	@property
	def generatedTokens(self) -> int:
		return sum(h.cost.generated for h in self.hops) + self.finalCost.generated


	@property
	def prefilledTokens(self) -> int:
		return sum(h.cost.prefilledNew for h in self.hops) + self.finalCost.prefilledNew


	@property
	def cachedTokens(self) -> int:
		return sum(h.cost.cached for h in self.hops) + self.finalCost.cached


	@property
	def generations(self) -> int:
		return sum(h.cost.generations for h in self.hops) + self.finalCost.generations


	def toJSON(self, includeTimings: bool = True) -> Dict[str, Any]:
		totals: Dict[str, Any] = {
			'generated_tokens'	: self.generatedTokens,
			'prefilled_tokens'	: self.prefilledTokens,
			'cached_tokens'		: self.cachedTokens,
			'hop_count'			: self.hopCount,
		}
		if includeTimings:
			totals['seconds'] = self.seconds
		return {
			'question'			: self.question,
			'method'			: self.method,
			'hops'				: [ h.json for h in self.hops ],
			'final_answer'		: self.finalAnswer,
			'final'				: {	'tokens_generated'		: self.finalCost.generated,
									'tokens_prefilled_new'	: self.finalCost.prefilledNew,
									'tokens_cached'			: self.finalCost.cached },
			'termination_kind'	: self.terminationKind.value if self.terminationKind else None,
			'retrievals'		: self.retrievals,
			'totals'			: totals,
			'error'				: self.error,
		}


	def serialize(self, includeTimings: bool = True) -> str:
		return Utils.toJSON(self.toJSON(includeTimings))


def generateSlot(llm: LLMBackend, registry: PrefixCacheRegistry, prompt: SegmentedPrompt, stop: List[str], maxNewTokens: int, temperature: float, cost: Cost, tokenizer: Tokenizer) -> GenerationResult:
	""" Generate the text of one slot. Looks the prompt up in the prefix cache,
		charges the cost and registers the prompt followed by the generated text.
		Shared by the TSSS loop and all baselines.
	"""
	cached, new = registry.lookup(prompt)
	result = generate(llm, GenerationRequest(prompt.flat, stop, maxNewTokens, temperature))
	cost.add(result.newTokenCount, new, cached)
	registry.register(prompt.withSlot(result.text, tokenizer))
	return result


#########################################################################
#
#	The TSSS loop
#

def answer(question: str, retriever: Retriever, llm: LLMBackend, registry: Optional[PrefixCacheRegistry] = None, config: Optional[RunConfig] = None, tokenizer: Optional[Tokenizer] = None, clock: Optional[Clock] = None) -> Trace:
	""" Answer one question with the TSSS loop and return its trace. Errors are
		raised with the partial trace attached to the exception.
	"""
	if question is None or len(question.strip()) == 0:
		raise TSSSError(C.rcEmptyInput, 'empty question')
	config = config or RunConfig()
	registry = registry if registry is not None else PrefixCacheRegistry()
	tokenizer = tokenizer or llm.tokenizer
	clock = clock or time.perf_counter

	trace = Trace(question, C.methodTSSS)
	start = clock()
	try:
		conversation = Conversation(question, tokenizer)
		history = QueryHistory(retriever.embed(question))
		seen: Set[str] = set()

		for i in range(1, config.maxHops + 1):
			hop = Hop(i)
			trace.hops.append(hop)

			# 1) sub-query
			prompt = conversation.subqueryPrompt()
			result = generateSlot(llm, registry, prompt, config.stopSubquery, config.maxNewTokensSubquery, config.temperature, hop.cost, tokenizer)
			hop.subQuery = result.text.strip()
			pending = prompt.withSlot(result.text, tokenizer)
			if len(hop.subQuery) == 0:
				Logging.logWarn('hop %d: empty sub-query, answering now' % i)
				trace.terminationKind = TerminationKind.degenerateQuery
				break

			# 2) terminate?
			q = retriever.embed(hop.subQuery)
			hop.decision = evaluateSubquery(q, history, config.tau)
			Logging.log('hop %d score: %.4f %s (tau %.2f): %s' % (i, hop.decision.score, 'HALT' if hop.decision.halt else 'CONTINUE', config.tau, hop.subQuery))
			if hop.decision.halt:
				trace.terminationKind = TerminationKind.similarityHalt
				break

			# 3) retrieve and respond
			hop.hits = retriever.retrieve(hop.subQuery, config.k, embedding=q, exclude=seen if config.dedupPassages else None)
			if len(hop.hits) == 0 and config.dedupPassages:
				Logging.logWarn('hop %d: every passage was retrieved before, using the plain top-%d' % (i, config.k))
				hop.hits = retriever.retrieve(hop.subQuery, config.k, embedding=q)
			trace.retrievals += 1
			seen.update(h.hit.passageId for h in hop.hits)
			prompt = conversation.contextPrompt(pending, [ (h.passage.title, h.passage.text) for h in hop.hits ])
			result = generateSlot(llm, registry, prompt, config.stopResponse, config.maxNewTokensResponse, config.temperature, hop.cost, tokenizer)
			hop.response = result.text.strip()
			conversation.commitBlock(prompt.withSlot(result.text, tokenizer), result.text)
			history.add(q)
		else:
			Logging.log('No halt within %d hops, answering now' % config.maxHops)
			trace.terminationKind = TerminationKind.maxHopsExhausted

		# 4) final answer
		prompt = conversation.finalPrompt()
		result = generateSlot(llm, registry, prompt, config.stopFinal, config.maxNewTokensFinal, config.temperature, trace.finalCost, tokenizer)
		trace.finalAnswer = result.text.strip()

	except TSSSError as e:
		trace.error = str(e)
		trace.seconds = clock() - start
		e.trace = trace
		raise
	trace.seconds = clock() - start
	Logging.logDebug('Answered in %d hops (%s): %s' % (trace.hopCount, trace.terminationKind.value, trace.finalAnswer))
	return trace


#########################################################################
#
#	Batches
#

Runner = Callable[..., Trace]


def answerBatch(questions: List[str], retriever: Retriever, llm: LLMBackend, config: Optional[RunConfig] = None, tokenizer: Optional[Tokenizer] = None, parallelism: int = 1, runner: Optional[Runner] = None, shareCache: bool = False, clock: Optional[Clock] = None, method: str = C.methodTSSS) -> List[Trace]:
	""" Run independent questions. The output order matches the input order.
		A failing question is recorded as a trace with its `error` set and the
		batch continues. Exclusive backends force sequential runs.
	"""
	runner = runner or answer
	shared = PrefixCacheRegistry() if shareCache else None
	if parallelism > 1 and llm.exclusive:
		Logging.logWarn('Backend %s is single-run exclusive, running sequentially' % llm.identifier)
		parallelism = 1

	def runOne(question: str) -> Trace:
		try:
			return runner(question, retriever, llm, shared if shared is not None else PrefixCacheRegistry(), config, tokenizer, clock)
		except TSSSError as e:
			Logging.logErr('Question failed: %s: %s' % (question, str(e)))
			if (trace := e.trace) is None:
				trace = Trace(question, method, error=str(e))
			return trace

	if parallelism <= 1:
		traces = [ runOne(q) for q in questions ]
	else:
		with ThreadPoolExecutor(max_workers=parallelism, thread_name_prefix='question') as executor:
			traces = list(executor.map(runOne, questions))
	if shared is not None:
		Logging.logDebug('Shared prefix cache: %s' % shared.stats())
	return traces
