#
#	test_prefix_cache.py
#
#	Prefix cache accounting over segmented prompts.
#

from tsss.PrefixCache import PrefixCacheRegistry, cacheLookup, cacheRegister
from tsss.TemplateEngine import Conversation, SegmentedPrompt, renderSubqueryPrompt, scaffold
from tsss.Tokenizer import WhitespaceTokenizer


tok = WhitespaceTokenizer()


class TestLookup:

	def test_cold_registry(self) -> None:
		registry = PrefixCacheRegistry()
		prompt = renderSubqueryPrompt('Who directed Jaws?', [])
		assert cacheLookup(registry, prompt) == (0, prompt.totalTokens)
		assert registry.misses == 1 and registry.hits == 0


	def test_warm_after_register(self) -> None:
		registry = PrefixCacheRegistry()
		prompt = renderSubqueryPrompt('Who directed Jaws?', [])
		cacheRegister(registry, prompt)
		assert cacheLookup(registry, prompt) == (prompt.totalTokens, 0)
		assert registry.hits == 1


	def test_longest_registered_prefix(self) -> None:
		registry = PrefixCacheRegistry()
		base = SegmentedPrompt((scaffold('one two ', tok), scaffold('three ', tok)))
		cacheRegister(registry, base)
		longer = base + scaffold('four five', tok)
		assert cacheLookup(registry, longer) == (3, 2)


	def test_diverging_segment_stops_match(self) -> None:
		registry = PrefixCacheRegistry()
		cacheRegister(registry, SegmentedPrompt((scaffold('a ', tok), scaffold('b ', tok), scaffold('c', tok))))
		other = SegmentedPrompt((scaffold('a ', tok), scaffold('x ', tok), scaffold('c', tok)))
		assert cacheLookup(registry, other) == (1, 2)


	def test_segment_boundaries_matter(self) -> None:
		# same flat text, different segmentation
		registry = PrefixCacheRegistry()
		cacheRegister(registry, SegmentedPrompt((scaffold('ab', tok),)))
		split = SegmentedPrompt((scaffold('a', tok), scaffold('b', tok)))
		assert cacheLookup(registry, split)[0] == 0


class TestHops:

	def test_second_hop_reuses_first(self) -> None:
		registry = PrefixCacheRegistry()
		conv = Conversation('Which city was the director of Jaws born in?', tok)

		first = conv.subqueryPrompt()
		cached1, new1 = cacheLookup(registry, first)
		withQuery = first.withSlot('Who directed Jaws?', tok)
		cacheRegister(registry, withQuery)

		block = conv.contextPrompt(withQuery, [ ('Jaws', 'Jaws is a 1975 film directed by Steven Spielberg.') ])
		cached2, new2 = cacheLookup(registry, block)
		assert cached2 == withQuery.totalTokens
		assert cached2 + new2 == block.totalTokens

		conv.commitBlock(block.withSlot('Steven Spielberg directed Jaws.', tok), 'Steven Spielberg directed Jaws.')
		cacheRegister(registry, conv.history)
		second = conv.subqueryPrompt()
		cached3, new3 = cacheLookup(registry, second)
		assert cached3 == conv.history.totalTokens
		assert new3 == second.totalTokens - conv.history.totalTokens
		assert second.totalTokens >= first.totalTokens
		assert cached1 == 0 and new1 == first.totalTokens


class TestRegistry:

	def test_register_is_idempotent(self) -> None:
		registry = PrefixCacheRegistry()
		prompt = renderSubqueryPrompt('Q', [ 'fact one', 'fact two' ])
		cacheRegister(registry, prompt)
		size = len(registry)
		cacheRegister(registry, prompt)
		assert len(registry) == size == len(prompt)


	def test_counters(self) -> None:
		registry = PrefixCacheRegistry()
		prompt = SegmentedPrompt((scaffold('a b c ', tok), scaffold('d', tok)))
		cacheLookup(registry, prompt)
		cacheRegister(registry, prompt)
		cacheLookup(registry, prompt)
		cacheLookup(registry, prompt + scaffold(' e', tok))
		stats = registry.stats()
		assert stats['hits'] == 2
		assert stats['misses'] == 1
		assert stats['cached_tokens'] == 8
		assert abs(stats['hit_rate'] - 2 / 3) < 1e-12
		assert registry.lookedUpTokens == 4 + 4 + 5


	def test_empty_registry_hit_rate(self) -> None:
		assert PrefixCacheRegistry().hitRate == 0.0
