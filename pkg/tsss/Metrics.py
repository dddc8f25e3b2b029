#
#	Metrics.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Answer metrics: exact match over normalized answers, and an LLM judge
#	that verifies a prediction against the golden answers.
#

import re, string, time
from threading import Lock
from typing import List, Optional, Union
from tsss.Constants import Constants as C
from tsss.LLMClient import GenerationRequest, LLMBackend, generate
from tsss.Logging import Logging
from tsss.TemplateEngine import Templates
from tsss.Types import TSSSError


_punctuation = str.maketrans('', '', string.punctuation)
_articles = re.compile(r'\b(a|an|the)\b')


def normalizeAnswer(s: str) -> str:
	""" Lowercase, remove punctuation, remove articles, collapse whitespace. """
	s = s.lower().translate(_punctuation)
	s = _articles.sub(' ', s)
	return ' '.join(s.split())


def exactMatch(prediction: str, golds: List[str]) -> bool:
	if golds is None or len(golds) == 0:
		raise TSSSError(C.rcInvalidArgument, 'no golden answers')
	normalized = normalizeAnswer(prediction or '')
	return any(normalized == normalizeAnswer(g) for g in golds)


#########################################################################
#
#	LLM-as-Judge
#

class RateLimiter(object):
	""" Space calls at least 1/rate seconds apart. A rate of 0 disables limiting. """

	def __init__(self, rate: float) -> None:
		self.interval = 1.0 / rate if rate > 0 else 0.0
		self.last = 0.0
		self.lock = Lock()


	def wait(self) -> None:
		if self.interval == 0.0:
			return
		with self.lock:
			if (delay := self.last + self.interval - time.monotonic()) > 0:
				time.sleep(delay)
			self.last = time.monotonic()


def renderJudgePrompt(question: str, gold: Union[str, List[str]], prediction: str) -> str:
	""" Multiple golden answers are joined with " / ". """
	if not isinstance(gold, str):
		gold = ' / '.join(gold)
	return Templates.render('judge', question=question, gold=gold, prediction=prediction)


def parseVerdict(text: str) -> Optional[bool]:
	""" True/False from the first word of a verdict, case and punctuation
		tolerant. None when the verdict cannot be parsed.
	"""
	if len(words := text.split()) == 0:
		return None
	word = words[0].strip(string.punctuation).lower()
	if word == 'true':
		return True
	if word == 'false':
		return False
	return None


def judge(question: str, gold: Union[str, List[str]], prediction: str, backend: LLMBackend, rateLimiter: Optional[RateLimiter] = None) -> Optional[bool]:
	""" Ask the judge backend. An unparseable verdict is returned as None (absent),
		backend failures are raised.
	"""
	if rateLimiter is not None:
		rateLimiter.wait()
	prompt = renderJudgePrompt(question, gold, prediction)
	result = generate(backend, GenerationRequest(prompt, list(C.stopJudge), C.defaultMaxNewTokensJudge, 0.0))
	if (verdict := parseVerdict(result.text)) is None:
		Logging.logWarn('Unparseable judge verdict (rc: %d): %s' % (C.rcUnparseableVerdict, result.text))
	return verdict
