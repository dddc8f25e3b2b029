#
#	TemplateEngine.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Rendering the structured reasoning prompts as sequences of segments.
#	Scaffold segments are prefilled template (and retrieved context) text,
#	slot segments hold model-generated text. Prompts of one run only ever
#	grow by appending segments, so every prompt extends the earlier ones.
#

from __future__ import annotations
import os
from dataclasses import dataclass, field
from threading import Lock
from typing import Dict, List, Optional, Sequence, Tuple, Union
from tsss.Constants import Constants as C
from tsss.Logging import Logging
from tsss.Tokenizer import Tokenizer, WhitespaceTokenizer
from tsss.Types import SegmentKind, TSSSError


defaultTemplateDirectory = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'templates')


class Templates(object):
	""" Load prompt templates from text files (one template per file, named
		placeholders in {braces}). A single trailing newline of a file is not
		part of the template. Templates are cached after the first load.
	"""

	directory:str = defaultTemplateDirectory
	_cache:Dict[str, str] = {}
	_lock = Lock()


	@staticmethod
	def setDirectory(directory: Optional[str]) -> None:
		with Templates._lock:
			Templates.directory = directory if directory else defaultTemplateDirectory
			Templates._cache.clear()


	@staticmethod
	def load(name: str) -> str:
		with Templates._lock:
			if (template := Templates._cache.get(name)) is not None:
				return template
			path = os.path.join(Templates.directory, '%s.txt' % name)
			try:
				with open(path, encoding='utf-8', newline='') as f:
					template = f.read()
			except OSError:
				raise TSSSError(C.rcTemplateMissing, 'template not found: %s' % path)
			if template.endswith('\n'):
				template = template[:-1]
			Templates._cache[name] = template
			return template


	@staticmethod
	def render(name: str, **kwargs: str) -> str:
		try:
			return Templates.load(name).format(**kwargs)
		except KeyError as e:
			raise TSSSError(C.rcTemplateMissing, 'template %s needs placeholder %s' % (name, str(e)))


@dataclass(frozen=True)
class Segment:
	text: str
	kind: SegmentKind
	tokenCount: int


def scaffold(text: str, tokenizer: Tokenizer) -> Segment:
	return Segment(text, SegmentKind.scaffold, tokenizer.count(text))


def slot(text: str, tokenizer: Tokenizer) -> Segment:
	return Segment(text, SegmentKind.slot, tokenizer.count(text))


@dataclass(frozen=True)
class SegmentedPrompt:
	segments: Tuple[Segment, ...] = ()

	@property
	def totalTokens(self) -> int:
		return sum(s.tokenCount for s in self.segments)


	@property
	def flat(self) -> str:
		return ''.join(s.text for s in self.segments)


	def __len__(self) -> int:
		return len(self.segments)


	def __add__(self, other: Union[SegmentedPrompt, Segment, Sequence[Segment]]) -> SegmentedPrompt:
		if isinstance(other, SegmentedPrompt):
			return SegmentedPrompt(self.segments + other.segments)
		if isinstance(other, Segment):
			return SegmentedPrompt(self.segments + (other,))
		return SegmentedPrompt(self.segments + tuple(other))


	def withSlot(self, text: str, tokenizer: Tokenizer) -> SegmentedPrompt:
		""" This prompt followed by a generated text. """
		return self + slot(text, tokenizer)


History = Union[SegmentedPrompt, str, None]


def _asPrompt(history: History, tokenizer: Tokenizer) -> SegmentedPrompt:
	if history is None or isinstance(history, SegmentedPrompt):
		return history or SegmentedPrompt()
	return SegmentedPrompt((scaffold(history, tokenizer),)) if len(history) > 0 else SegmentedPrompt()


#########################################################################
#
#	Rendering
#

def renderSubqueryPrompt(mainQuestion: str, facts: List[str], history: History = None, tokenizer: Optional[Tokenizer] = None) -> SegmentedPrompt:
	""" History followed by the block that asks for the next sub-query. Without
		facts (first hop) the facts clause is omitted.
	"""
	tokenizer = tokenizer or WhitespaceTokenizer()
	if len(facts) == 0:
		block = Templates.render('subquery_first', main_question=mainQuestion)
	else:
		lines = ''.join(Templates.render('fact', fact=f) + '\n' for f in facts)
		block = Templates.render('subquery_facts', main_question=mainQuestion, facts=lines)
	return _asPrompt(history, tokenizer) + scaffold(block, tokenizer)


def renderContextAndResponseScaffold(hits: List[Tuple[str, str]], tokenizer: Optional[Tokenizer] = None) -> SegmentedPrompt:
	""" The line break after a generated sub-query, one line per retrieved
		context in rank order, then the response scaffold.
	"""
	if hits is None or len(hits) == 0:
		raise TSSSError(C.rcEmptyHits, 'cannot render contexts without hits')
	tokenizer = tokenizer or WhitespaceTokenizer()
	segments = [ scaffold('\n', tokenizer) ]
	segments.extend(scaffold(Templates.render('context', title=title, text=text) + '\n', tokenizer) for title, text in hits)
	segments.append(scaffold(Templates.render('response'), tokenizer))
	return SegmentedPrompt(tuple(segments))


def renderFinalPrompt(mainQuestion: str, lastFact: Optional[str], history: History = None, tokenizer: Optional[Tokenizer] = None) -> SegmentedPrompt:
	""" History followed by the final answer block. Without any fact the
		block takes the form without the "based on the fact that" clause.
	"""
	tokenizer = tokenizer or WhitespaceTokenizer()
	if lastFact is None:
		block = Templates.render('final_nofacts', main_question=mainQuestion)
	else:
		block = Templates.render('final', main_question=mainQuestion, fact=lastFact)
	return _asPrompt(history, tokenizer) + scaffold(block, tokenizer)


def renderContexts(hits: List[Tuple[str, str]]) -> str:
	""" Context lines as a single string, for the single-prompt baselines. """
	return ''.join(Templates.render('context', title=title, text=text) + '\n' for title, text in hits)


#########################################################################
#
#	Conversation state of one run
#

@dataclass
class Conversation:
	""" The append-only history of one question run: the committed hop blocks
		(scaffolds, generated sub-queries and responses, block separators) and
		the facts gathered so far.
	"""
	mainQuestion: str
	tokenizer: Tokenizer = field(default_factory=WhitespaceTokenizer)
	history: SegmentedPrompt = field(default_factory=SegmentedPrompt)
	facts: List[str] = field(default_factory=list)


	def subqueryPrompt(self) -> SegmentedPrompt:
		return renderSubqueryPrompt(self.mainQuestion, self.facts, self.history, self.tokenizer)


	def contextPrompt(self, pending: SegmentedPrompt, hits: List[Tuple[str, str]]) -> SegmentedPrompt:
		""" The pending sub-query prompt (with its generated sub-query) followed by contexts. """
		return pending + renderContextAndResponseScaffold(hits, self.tokenizer)


	def finalPrompt(self) -> SegmentedPrompt:
		return renderFinalPrompt(self.mainQuestion, self.facts[-1] if self.facts else None, self.history, self.tokenizer)


	def commitBlock(self, blockPrompt: SegmentedPrompt, response: str) -> None:
		""" Make a finished hop block (ending in its generated response) part of the
			history and record its response as a fact. Empty responses add no fact.
		"""
		self.history = blockPrompt + scaffold(C.blockSeparator, self.tokenizer)
		if len(fact := response.strip()) > 0:
			self.facts.append(fact)
		Logging.logDebug('Committed block: %d segments, %d tokens' % (len(self.history), self.history.totalTokens))
