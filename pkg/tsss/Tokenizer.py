#
#	Tokenizer.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Token counting. Counts are a pure function of the text.
#

from threading import Lock
from typing import Dict, Optional
from tsss.HttpClient import sendRequest
from tsss.Logging import Logging
from tsss.Types import TSSSError


class Tokenizer(object):

	identifier = 'abstract'

	def count(self, text: str) -> int:
		raise NotImplementedError()


class WhitespaceTokenizer(Tokenizer):
	""" One token per whitespace-separated word. Offline and deterministic. """

	identifier = 'whitespace'

	def count(self, text: str) -> int:
		return len(text.split()) if text else 0


class BackendTokenizer(Tokenizer):
	""" Ask an OpenAI-compatible server's /tokenize endpoint (vLLM style).
		Counts are memoised per text. When the endpoint is not available the
		tokenizer falls back to whitespace counts for the rest of its life.
	"""

	def __init__(self, url: str, model: str, apiKeyEnv: Optional[str] = None, timeout: float = 30.0, retries: int = 1) -> None:
		self.url = url
		self.model = model
		self.apiKeyEnv = apiKeyEnv
		self.timeout = timeout
		self.retries = retries
		self.identifier = 'backend:%s' % model
		self.fallback: Optional[WhitespaceTokenizer] = None
		self._memo: Dict[str, int] = {}
		self._memoLock = Lock()


	def count(self, text: str) -> int:
		if not text:
			return 0
		with self._memoLock:
			if (n := self._memo.get(text)) is not None:
				return n
		if self.fallback is not None:
			return self.fallback.count(text)
		try:
			response = sendRequest(self.url, { 'model' : self.model, 'prompt' : text, 'add_special_tokens' : False }, self.apiKeyEnv, self.timeout, self.retries)
			n = int(response['count']) if 'count' in response else len(response['tokens'])
		except (TSSSError, KeyError, TypeError, ValueError) as e:
			Logging.logWarn('Tokenize endpoint unavailable (%s), falling back to whitespace counts' % str(e))
			self.fallback = WhitespaceTokenizer()
			self.identifier = self.fallback.identifier
			return self.fallback.count(text)
		with self._memoLock:
			self._memo[text] = n
		return n


def countTokens(tokenizer: Tokenizer, text: str) -> int:
	return tokenizer.count(text) if text else 0
