#
#	PrefixCache.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Accounting model of KV-cache reuse. Prefixes are whole segments, keyed by
#	a rolling hash over the segment texts. The registry only counts tokens,
#	it never holds model state.
#

import hashlib, struct
from threading import Lock
from typing import Any, Dict, Iterator, Tuple
from tsss.TemplateEngine import SegmentedPrompt


def _prefixKeys(prompt: SegmentedPrompt) -> Iterator[Tuple[str, int]]:
	""" Yield (key, cumulative token count) for every whole-segment prefix. """
	h = hashlib.sha256()
	tokens = 0
	for segment in prompt.segments:
		data = segment.text.encode('utf-8')
		h.update(struct.pack('<Q', len(data)))
		h.update(data)
		tokens += segment.tokenCount
		yield h.copy().hexdigest(), tokens


class PrefixCacheRegistry(object):
	""" Registered prefixes and hit/miss counters. Lookups and registrations
		are serialized, so a registry may be shared between runs.
	"""

	def __init__(self) -> None:
		self.prefixes: Dict[str, int] = {}
		self.hits = 0
		self.misses = 0
		self.cachedTokens = 0
		self.lookedUpTokens = 0
		self.lock = Lock()


	def lookup(self, prompt: SegmentedPrompt) -> Tuple[int, int]:
		""" Return (cached tokens, new tokens) for the longest registered prefix. """
		cached = 0
		with self.lock:
			for key, tokens in _prefixKeys(prompt):
				if (n := self.prefixes.get(key)) is None:
					break
				cached = n
			if cached > 0:
				self.hits += 1
			else:
				self.misses += 1
			self.cachedTokens += cached
			self.lookedUpTokens += prompt.totalTokens
		return cached, prompt.totalTokens - cached


	def register(self, prompt: SegmentedPrompt) -> None:
		with self.lock:
			for key, tokens in _prefixKeys(prompt):
				self.prefixes[key] = tokens


	def __len__(self) -> int:
		with self.lock:
			return len(self.prefixes)


	@property
	def hitRate(self) -> float:
		lookups = self.hits + self.misses
		return self.hits / lookups if lookups > 0 else 0.0


	def stats(self) -> Dict[str, Any]:
		with self.lock:
			return {
				'hits'			: self.hits,
				'misses'		: self.misses,
				'hit_rate'		: self.hitRate,
				'cached_tokens'	: self.cachedTokens,
				'prefixes'		: len(self.prefixes),
			}


def cacheLookup(registry: PrefixCacheRegistry, prompt: SegmentedPrompt) -> Tuple[int, int]:
	return registry.lookup(prompt)


def cacheRegister(registry: PrefixCacheRegistry, prompt: SegmentedPrompt) -> None:
	registry.register(prompt)
