#
#	Baselines.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Comparison methods: No-RAG, Standard-RAG and simplified Self-Ask,
#	Iter-RetGen and IRCoT loops. They share the Retriever, the slot
#	generation and the token accounting with the TSSS loop, and produce
#	the same Trace shape.
#

import functools, time
from typing import Callable, Dict, List, Optional
from tsss.Constants import Constants as C
from tsss.LLMClient import LLMBackend
from tsss.Logging import Logging
from tsss.Orchestrator import Clock, Hop, RunConfig, Runner, Trace, answer, generateSlot
from tsss.PrefixCache import PrefixCacheRegistry
from tsss.Retriever import RetrievedPassage, Retriever
from tsss.TemplateEngine import SegmentedPrompt, Templates, renderContexts, scaffold
from tsss.Tokenizer import Tokenizer
from tsss.Types import TerminationKind, TSSSError


def _traced(method: str) -> Callable:
	""" Wrap a baseline body into the common runner signature: argument
		defaults, timing, and the partial trace attached to raised errors.
	"""
	def decorator(body: Callable[[Trace, Retriever, LLMBackend, PrefixCacheRegistry, RunConfig, Tokenizer], None]) -> Runner:
		@functools.wraps(body)
		def runner(question: str, retriever: Optional[Retriever], llm: LLMBackend, registry: Optional[PrefixCacheRegistry] = None, config: Optional[RunConfig] = None, tokenizer: Optional[Tokenizer] = None, clock: Optional[Clock] = None) -> Trace:
			if question is None or len(question.strip()) == 0:
				raise TSSSError(C.rcEmptyInput, 'empty question')
			clock = clock or time.perf_counter
			trace = Trace(question, method)
			start = clock()
			try:
				body(trace, retriever, llm, registry if registry is not None else PrefixCacheRegistry(), config or RunConfig(), tokenizer or llm.tokenizer)
			except TSSSError as e:
				trace.error = str(e)
				trace.seconds = clock() - start
				e.trace = trace
				raise
			trace.seconds = clock() - start
			Logging.logDebug('%s answered in %d rounds (%s): %s' % (method, trace.hopCount, trace.terminationKind.value if trace.terminationKind else None, trace.finalAnswer))
			return trace
		return runner
	return decorator


def _contexts(hits: List[RetrievedPassage]) -> str:
	return renderContexts([ (h.passage.title, h.passage.text) for h in hits ])


def _retrieve(trace: Trace, hop: Hop, retriever: Retriever, query: str, k: int) -> List[RetrievedPassage]:
	hop.hits = retriever.retrieve(query, k)
	trace.retrievals += 1
	return hop.hits


def _afterPhrase(text: str, phrase: str) -> Optional[str]:
	""" The rest of the line after a stop phrase, or None without the phrase. """
	if (pos := text.find(phrase)) == -1:
		return None
	return text[pos + len(phrase):].split('\n', 1)[0].strip()


def _lastFollowUp(text: str) -> Optional[str]:
	for line in reversed(text.splitlines()):
		if line.strip().lower().startswith('follow up:'):
			if len(q := line.strip()[len('follow up:'):].strip()) > 0:
				return q
	return None


#########################################################################
#
#	Single pass
#

@_traced(C.methodNoRAG)
def noRAG(trace: Trace, retriever: Retriever, llm: LLMBackend, registry: PrefixCacheRegistry, config: RunConfig, tokenizer: Tokenizer) -> None:
	prompt = SegmentedPrompt((scaffold(Templates.render('no_rag', question=trace.question), tokenizer),))
	result = generateSlot(llm, registry, prompt, config.stopFinal, config.maxNewTokensFinal, config.temperature, trace.finalCost, tokenizer)
	trace.finalAnswer = result.text.strip()
	trace.terminationKind = TerminationKind.singlePass


@_traced(C.methodStandardRAG)
def standardRAG(trace: Trace, retriever: Retriever, llm: LLMBackend, registry: PrefixCacheRegistry, config: RunConfig, tokenizer: Tokenizer) -> None:
	hop = Hop(1, trace.question)
	trace.hops.append(hop)
	hits = _retrieve(trace, hop, retriever, trace.question, config.k)
	prompt = SegmentedPrompt((scaffold(Templates.render('standard_rag', contexts=_contexts(hits), question=trace.question), tokenizer),))
	result = generateSlot(llm, registry, prompt, config.stopFinal, config.maxNewTokensFinal, config.temperature, trace.finalCost, tokenizer)
	trace.finalAnswer = result.text.strip()
	trace.terminationKind = TerminationKind.singlePass


#########################################################################
#
#	Iterative loops
#

@_traced(C.methodSelfAsk)
def selfAskLoop(trace: Trace, retriever: Retriever, llm: LLMBackend, registry: PrefixCacheRegistry, config: RunConfig, tokenizer: Tokenizer) -> None:
	""" Follow-up question loop. Each round retrieves for the latest follow-up
		question (the main question first) and lets the model continue freely.
		The model decides when to stop by writing the final answer phrase.
	"""
	stopPhrase = Templates.load('self_ask_stop')
	prompt = SegmentedPrompt((scaffold(Templates.render('self_ask', question=trace.question), tokenizer),))
	query = trace.question
	for r in range(1, config.maxIterations + 1):
		hop = Hop(r, query)
		trace.hops.append(hop)
		hits = _retrieve(trace, hop, retriever, query, config.k)
		prompt = prompt + [ scaffold(_contexts([ h ]), tokenizer) for h in hits ]
		result = generateSlot(llm, registry, prompt, config.stopResponse, config.maxNewTokensResponse, config.temperature, hop.cost, tokenizer)
		hop.response = result.text.strip()
		prompt = prompt.withSlot(result.text, tokenizer) + scaffold('\n', tokenizer)
		if (final := _afterPhrase(result.text, stopPhrase)) is not None:
			trace.finalAnswer = final
			trace.terminationKind = TerminationKind.generatorStop
			return
		query = _lastFollowUp(result.text) or hop.response or trace.question

	# cap reached: ask for the answer
	prompt = prompt + scaffold(stopPhrase + ' ', tokenizer)
	result = generateSlot(llm, registry, prompt, config.stopFinal, config.maxNewTokensFinal, config.temperature, trace.finalCost, tokenizer)
	trace.finalAnswer = result.text.strip()
	trace.terminationKind = TerminationKind.maxHopsExhausted


@_traced(C.methodIterRetGen)
def iterRetGenLoop(trace: Trace, retriever: Retriever, llm: LLMBackend, registry: PrefixCacheRegistry, config: RunConfig, tokenizer: Tokenizer) -> None:
	""" A fixed number of retrieve-then-generate rounds. From the second round
		on the query is the question followed by the previous generation.
	"""
	generation = ''
	for r in range(1, min(config.iterRetGenRounds, config.maxIterations) + 1):
		query = trace.question if len(generation) == 0 else '%s %s' % (trace.question, generation)
		hop = Hop(r, query)
		trace.hops.append(hop)
		hits = _retrieve(trace, hop, retriever, query, config.k)
		prompt = SegmentedPrompt((scaffold(Templates.render('iter_retgen', contexts=_contexts(hits), question=trace.question), tokenizer),))
		result = generateSlot(llm, registry, prompt, config.stopFinal, config.maxNewTokensResponse, config.temperature, hop.cost, tokenizer)
		generation = hop.response = result.text.strip()
	trace.finalAnswer = generation
	trace.terminationKind = TerminationKind.fixedRounds


@_traced(C.methodIRCoT)
def ircotLoop(trace: Trace, retriever: Retriever, llm: LLMBackend, registry: PrefixCacheRegistry, config: RunConfig, tokenizer: Tokenizer) -> None:
	""" Interleave retrieval with chain-of-thought: every generated sentence
		becomes the next query, its passages join the contexts, until the
		model writes its answer phrase.
	"""
	stopPhrase = Templates.load('ircot_stop')
	contexts: List[RetrievedPassage] = []
	seen = set()
	reasoning: List[str] = []
	query = trace.question

	def render() -> SegmentedPrompt:
		prompt = SegmentedPrompt((scaffold(Templates.render('ircot', contexts=_contexts(contexts), question=trace.question), tokenizer),))
		for sentence in reasoning:
			prompt = prompt.withSlot(sentence, tokenizer) + scaffold(' ', tokenizer)
		return prompt

	for r in range(1, config.maxIterations + 1):
		hop = Hop(r, query)
		trace.hops.append(hop)
		for h in _retrieve(trace, hop, retriever, query, config.k):
			if h.hit.passageId not in seen:
				seen.add(h.hit.passageId)
				contexts.append(h)
		result = generateSlot(llm, registry, render(), config.stopSubquery, config.maxNewTokensResponse, config.temperature, hop.cost, tokenizer)
		hop.response = result.text.strip()
		if (final := _afterPhrase(result.text, stopPhrase)) is not None:
			trace.finalAnswer = final
			trace.terminationKind = TerminationKind.generatorStop
			return
		reasoning.append(hop.response)
		query = hop.response or trace.question

	prompt = render() + scaffold(stopPhrase + ' ', tokenizer)
	result = generateSlot(llm, registry, prompt, config.stopFinal, config.maxNewTokensFinal, config.temperature, trace.finalCost, tokenizer)
	trace.finalAnswer = result.text.strip()
	trace.terminationKind = TerminationKind.maxHopsExhausted


#########################################################################
#
#	Method registry
#

runners: Dict[str, Runner] = {
	C.methodTSSS		: answer,
	C.methodNoRAG		: noRAG,
	C.methodStandardRAG	: standardRAG,
	C.methodSelfAsk		: selfAskLoop,
	C.methodIterRetGen	: iterRetGenLoop,
	C.methodIRCoT		: ircotLoop,
}


def getRunner(method: str) -> Runner:
	if (runner := runners.get(method)) is None:
		raise TSSSError(C.rcInvalidArgument, 'unknown method: %s (known: %s)' % (method, ', '.join(C.methods)))
	return runner
