#
#	LLMClient.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Text generation backends. The HTTP backend talks to OpenAI-compatible
#	/completions or /chat/completions endpoints, the scripted backend replays
#	canned responses in order (tests and offline smoke runs).
#

import json, time
from dataclasses import dataclass, field
from threading import Lock
from typing import List, Optional, Tuple
from tsss.Constants import Constants as C
from tsss.HttpClient import sendRequest, joinURL
from tsss.Logging import Logging
from tsss.Tokenizer import Tokenizer, WhitespaceTokenizer
from tsss.Types import TSSSError


@dataclass(frozen=True)
class GenerationRequest:
	prompt: str
	stop: List[str] = field(default_factory=list)
	maxNewTokens: int = 64
	temperature: float = 0.0

	def __post_init__(self) -> None:
		if self.maxNewTokens < 1:
			raise TSSSError(C.rcInvalidArgument, 'maxNewTokens must be >= 1: %d' % self.maxNewTokens)
		if self.temperature < 0:
			raise TSSSError(C.rcInvalidArgument, 'temperature must be >= 0: %s' % self.temperature)


@dataclass(frozen=True)
class GenerationResult:
	text: str
	newTokenCount: int
	promptTokenCount: int
	latency: float		# seconds


def cutAtStop(text: str, stop: List[str]) -> str:
	""" Truncate at the earliest occurrence of any stop sequence (stop text excluded). """
	cut = len(text)
	for s in stop:
		if s and (pos := text.find(s)) != -1 and pos < cut:
			cut = pos
	return text[:cut]


class LLMBackend(object):
	""" Base class of generation backends.

		`exclusive` backends keep per-run state and must not be used by
		concurrent question runs.
	"""

	exclusive = False

	def __init__(self, identifier: str, tokenizer: Optional[Tokenizer] = None) -> None:
		self.identifier = identifier
		self.tokenizer = tokenizer or WhitespaceTokenizer()


	def complete(self, request: GenerationRequest) -> Tuple[str, Optional[int], Optional[int]]:
		""" Return (text, generated token count, prompt token count). Counts are
			None when the backend does not report them.
		"""
		raise NotImplementedError()


class ScriptedBackend(LLMBackend):
	""" Replays canned responses strictly in order. Every received prompt is
		recorded in `prompts`. Running out of responses is an error.
	"""

	exclusive = True

	def __init__(self, responses: List[str], tokenizer: Optional[Tokenizer] = None) -> None:
		super().__init__('scripted', tokenizer)
		self.responses = list(responses)
		self.position = 0
		self.prompts: List[str] = []
		self.lock = Lock()


	@staticmethod
	def fromFile(path: str, tokenizer: Optional[Tokenizer] = None) -> 'ScriptedBackend':
		""" Load a script from a JSON file holding a list of strings. """
		try:
			with open(path, encoding='utf-8') as f:
				responses = json.load(f)
		except OSError as e:
			raise TSSSError(C.rcIOFailure, 'cannot read script %s: %s' % (path, e.strerror or str(e)))
		except json.JSONDecodeError as e:
			raise TSSSError(C.rcSchemaViolation, 'malformed script %s: %s' % (path, e.msg))
		if not isinstance(responses, list) or not all(isinstance(r, str) for r in responses):
			raise TSSSError(C.rcSchemaViolation, 'script %s must be a JSON list of strings' % path)
		return ScriptedBackend(responses, tokenizer)


	@property
	def remaining(self) -> int:
		return len(self.responses) - self.position


	def complete(self, request: GenerationRequest) -> Tuple[str, Optional[int], Optional[int]]:
		with self.lock:
			self.prompts.append(request.prompt)
			if self.position >= len(self.responses):
				raise TSSSError(C.rcScriptExhausted, 'script exhausted after %d responses' % len(self.responses))
			text = self.responses[self.position]
			self.position += 1
		return text, None, None


class HttpBackend(LLMBackend):
	""" OpenAI-compatible generation over HTTP. The completions mode sends the
		flat prompt so the server sees a stable prefix, the chat mode wraps it
		into a single user message.
	"""

	def __init__(self, url: str, model: str, mode: str = 'completions', apiKeyEnv: Optional[str] = None, timeout: float = 60.0, retries: int = 3, tokenizer: Optional[Tokenizer] = None) -> None:
		super().__init__('http:%s' % model, tokenizer)
		if mode not in [ 'completions', 'chat' ]:
			raise TSSSError(C.rcConfigurationError, 'unknown generation mode: %s' % mode)
		self.url = joinURL(url, 'completions' if mode == 'completions' else 'chat/completions')
		self.model = model
		self.mode = mode
		self.apiKeyEnv = apiKeyEnv
		self.timeout = timeout
		self.retries = retries


	def complete(self, request: GenerationRequest) -> Tuple[str, Optional[int], Optional[int]]:
		body = {
			'model'			: self.model,
			'max_tokens'	: request.maxNewTokens,
			'temperature'	: request.temperature,
		}
		if len(request.stop) > 0:
			body['stop'] = request.stop
		if self.mode == 'completions':
			body['prompt'] = request.prompt
		else:
			body['messages'] = [ { 'role' : 'user', 'content' : request.prompt } ]

		response = sendRequest(self.url, body, self.apiKeyEnv, self.timeout, self.retries)
		try:
			choice = response['choices'][0]
			text = choice['text'] if self.mode == 'completions' else choice['message']['content']
		except (KeyError, IndexError, TypeError) as e:
			raise TSSSError(C.rcBackendError, 'malformed generation response: %s' % str(e))
		usage = response.get('usage') or {}
		return text or '', usage.get('completion_tokens'), usage.get('prompt_tokens')


def generate(backend: LLMBackend, request: GenerationRequest) -> GenerationResult:
	""" Run one generation. The text is cut at the first stop sequence, token
		counts come from the backend's usage report or from its tokenizer.
		Empty generations are returned as they are.
	"""
	if request.prompt is None or len(request.prompt) == 0:
		raise TSSSError(C.rcEmptyInput, 'empty prompt')
	start = time.perf_counter()
	text, newTokens, promptTokens = backend.complete(request)
	latency = time.perf_counter() - start
	cut = cutAtStop(text, request.stop)
	if newTokens is None or cut != text:
		newTokens = backend.tokenizer.count(cut)
	if promptTokens is None:
		promptTokens = backend.tokenizer.count(request.prompt)
	Logging.logDebug('Generated %d tokens in %.3f s: %s' % (newTokens, latency, cut))
	return GenerationResult(cut, newTokens, promptTokens, latency)
