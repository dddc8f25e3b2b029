#
#	test_template_engine.py
#
#	Rendering of the reasoning prompts, segment accounting and templates.
#

import os
import pytest
from conftest import golden
from tsss.Constants import Constants as C
from tsss.TemplateEngine import Conversation, SegmentedPrompt, Templates, renderContextAndResponseScaffold, renderContexts, renderFinalPrompt, renderSubqueryPrompt, scaffold, slot
from tsss.Tokenizer import Tokenizer, WhitespaceTokenizer, countTokens
from tsss.Types import SegmentKind, TSSSError


def twoHopConversation() -> Conversation:
	""" Q: q1 -> T1/X1 -> r1, q2 -> T2/X2 + T3/X3 -> r2 """
	conv = Conversation('Q')
	tok = conv.tokenizer
	first = conv.subqueryPrompt().withSlot('q1', tok)
	conv.commitBlock(conv.contextPrompt(first, [ ('T1', 'X1') ]).withSlot('r1', tok), 'r1')
	second = conv.subqueryPrompt().withSlot('q2', tok)
	conv.commitBlock(conv.contextPrompt(second, [ ('T2', 'X2'), ('T3', 'X3') ]).withSlot('r2', tok), 'r2')
	return conv


class TestGoldens:

	def test_first_hop(self) -> None:
		assert renderSubqueryPrompt('Q', []).flat == golden('hop1.txt')


	def test_second_hop(self) -> None:
		conv = Conversation('Q')
		first = conv.subqueryPrompt().withSlot('q1', conv.tokenizer)
		conv.commitBlock(conv.contextPrompt(first, [ ('T1', 'X1') ]).withSlot('r1', conv.tokenizer), 'r1')
		assert conv.subqueryPrompt().flat == golden('hop2.txt')


	def test_second_hop_from_string_history(self) -> None:
		history = golden('hop1.txt') + 'q1\nTitle: T1 Text: X1\nBased on the contexts, r1\n\n'
		assert renderSubqueryPrompt('Q', [ 'r1' ], history).flat == golden('hop2.txt')


	def test_final(self) -> None:
		assert twoHopConversation().finalPrompt().flat == golden('final.txt')


	def test_final_without_facts(self) -> None:
		assert renderFinalPrompt('Q', None).flat == golden('final_nofacts.txt')


class TestFixedText:

	def test_fixed_substrings(self) -> None:
		flat = twoHopConversation().finalPrompt().flat
		assert 'To answer the Main Question (Q), I propose the following additional question:\nQuestion: ' in flat
		assert 'using the following facts:\n- r1\nI propose' in flat
		assert 'Based on the contexts, ' in flat
		assert flat.endswith('the complete answer to the main question (Q) is: ')


	def test_contexts_in_rank_order(self) -> None:
		flat = renderContextAndResponseScaffold([ ('B', 'second'), ('A', 'first') ]).flat
		assert flat == '\nTitle: B Text: second\nTitle: A Text: first\nBased on the contexts, '


	def test_contexts_for_baselines(self) -> None:
		assert renderContexts([ ('A', 'x'), ('B', 'y') ]) == 'Title: A Text: x\nTitle: B Text: y\n'


	def test_empty_hits(self) -> None:
		with pytest.raises(TSSSError) as e:
			renderContextAndResponseScaffold([])
		assert e.value.rc == C.rcEmptyHits


	def test_empty_response_adds_no_fact(self) -> None:
		conv = Conversation('Q')
		pending = conv.subqueryPrompt().withSlot('q1', conv.tokenizer)
		conv.commitBlock(conv.contextPrompt(pending, [ ('T1', 'X1') ]).withSlot('  ', conv.tokenizer), '  ')
		assert conv.facts == []
		assert 'using the following facts' not in conv.subqueryPrompt().flat


class TestPrefixProperty:

	def test_each_prompt_extends_the_previous(self) -> None:
		conv = Conversation('Which city was the director of Jaws born in?')
		tok = conv.tokenizer
		prompts = []
		for i in range(4):
			pending = conv.subqueryPrompt()
			prompts.append(pending)
			withQuery = pending.withSlot('sub-query %d' % i, tok)
			block = conv.contextPrompt(withQuery, [ ('T%d' % i, 'text %d' % i) ]).withSlot('response %d' % i, tok)
			prompts.append(block)
			conv.commitBlock(block, 'response %d' % i)
		prompts.append(conv.finalPrompt())

		for earlier, later in zip(prompts, prompts[1:]):
			assert later.flat.startswith(earlier.flat)
			assert later.segments[:len(earlier.segments)] == earlier.segments


	def test_segment_kinds(self) -> None:
		conv = twoHopConversation()
		kinds = [ s.kind for s in conv.history.segments ]
		assert kinds.count(SegmentKind.slot) == 4
		slots = [ s.text for s in conv.history.segments if s.kind == SegmentKind.slot ]
		assert slots == [ 'q1', 'r1', 'q2', 'r2' ]


class TestTokenCounts:

	def test_total_is_sum_of_segments(self) -> None:
		prompt = twoHopConversation().finalPrompt()
		assert prompt.totalTokens == sum(s.tokenCount for s in prompt.segments)


	def test_total_matches_whole_text_for_whitespace(self) -> None:
		# all segment boundaries fall on whitespace
		tok = WhitespaceTokenizer()
		prompt = twoHopConversation().finalPrompt()
		assert prompt.totalTokens == tok.count(prompt.flat)


	def test_counts_use_given_tokenizer(self) -> None:
		class CharTokenizer(Tokenizer):
			identifier = 'chars'
			def count(self, text: str) -> int:
				return len(text)

		prompt = renderSubqueryPrompt('Q', [], tokenizer=CharTokenizer())
		assert prompt.totalTokens == len(golden('hop1.txt'))


	def test_count_tokens(self) -> None:
		tok = WhitespaceTokenizer()
		assert countTokens(tok, '') == 0
		assert countTokens(tok, '   \n ') == 0
		assert countTokens(tok, 'one') == 1
		assert countTokens(tok, 'two words\nand three') == 4


	def test_segment_helpers(self) -> None:
		tok = WhitespaceTokenizer()
		assert scaffold('a b', tok).kind == SegmentKind.scaffold
		assert slot('a b', tok).tokenCount == 2
		prompt = SegmentedPrompt() + scaffold('x', tok) + [ slot('y', tok), slot('z', tok) ]
		assert len(prompt) == 3
		assert prompt.flat == 'xyz'


class TestTemplates:

	def test_custom_directory(self, tmp_path: str) -> None:
		for name in [ 'subquery_first', 'subquery_facts', 'fact' ]:
			with open(os.path.join(str(tmp_path), '%s.txt' % name), 'w', encoding='utf-8') as f:
				f.write('[%s] {main_question}\n' % name if name != 'fact' else '* {fact}\n')
		Templates.setDirectory(str(tmp_path))
		assert renderSubqueryPrompt('Q', []).flat == '[subquery_first] Q'


	def test_missing_template(self, tmp_path: str) -> None:
		Templates.setDirectory(str(tmp_path))
		with pytest.raises(TSSSError) as e:
			renderFinalPrompt('Q', None)
		assert e.value.rc == C.rcTemplateMissing


	def test_missing_placeholder(self) -> None:
		with pytest.raises(TSSSError) as e:
			Templates.render('final')
		assert e.value.rc == C.rcTemplateMissing
