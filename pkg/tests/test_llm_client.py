#
#	test_llm_client.py
#
#	Generation backends, stop sequences and the HTTP request helper.
#

import json, os
from typing import Callable
from unittest.mock import MagicMock, patch
import pytest
import requests
from tsss.Constants import Constants as C
from tsss.HttpClient import joinURL, sendRequest
from tsss.LLMClient import GenerationRequest, HttpBackend, ScriptedBackend, cutAtStop, generate
from tsss.Tokenizer import BackendTokenizer, WhitespaceTokenizer
from tsss.Types import TSSSError


def httpResponse(status: int, body: dict) -> MagicMock:
	r = MagicMock()
	r.status_code = status
	r.json.return_value = body
	r.text = json.dumps(body)
	return r


class TestCutAtStop:

	def test_earliest_stop_wins(self) -> None:
		assert cutAtStop('abc\ndef\n\nghi', [ '\n\n', '\n' ]) == 'abc'


	def test_no_stop(self) -> None:
		assert cutAtStop('abc', []) == 'abc'
		assert cutAtStop('abc', [ 'x' ]) == 'abc'


	def test_stop_at_start(self) -> None:
		assert cutAtStop('\nabc', [ '\n' ]) == ''


class TestScriptedBackend:

	def test_passthrough_in_order(self, scripted: Callable) -> None:
		llm = scripted([ 'one two', 'three' ])
		a = generate(llm, GenerationRequest('prompt a'))
		b = generate(llm, GenerationRequest('prompt b'))
		assert (a.text, b.text) == ('one two', 'three')
		assert a.newTokenCount == 2
		assert a.promptTokenCount == 2
		assert llm.prompts == [ 'prompt a', 'prompt b' ]
		assert llm.remaining == 0


	def test_cut_at_stop(self, scripted: Callable) -> None:
		llm = scripted([ 'Who directed Jaws?\nextra words here' ])
		result = generate(llm, GenerationRequest('p', stop=[ '\n' ]))
		assert result.text == 'Who directed Jaws?'
		assert result.newTokenCount == 3


	def test_empty_generation_is_returned(self, scripted: Callable) -> None:
		result = generate(scripted([ '' ]), GenerationRequest('p'))
		assert result.text == ''
		assert result.newTokenCount == 0


	def test_exhausted(self, scripted: Callable) -> None:
		llm = scripted([ 'only' ])
		generate(llm, GenerationRequest('p'))
		with pytest.raises(TSSSError) as e:
			generate(llm, GenerationRequest('p'))
		assert e.value.rc == C.rcScriptExhausted


	def test_from_file(self, tmp_path: str) -> None:
		path = os.path.join(str(tmp_path), 'script.json')
		with open(path, 'w', encoding='utf-8') as f:
			json.dump([ 'a', 'b' ], f)
		llm = ScriptedBackend.fromFile(path)
		assert llm.remaining == 2
		assert llm.exclusive


	def test_from_file_rejects_non_strings(self, tmp_path: str) -> None:
		path = os.path.join(str(tmp_path), 'script.json')
		with open(path, 'w', encoding='utf-8') as f:
			json.dump([ 'a', 1 ], f)
		with pytest.raises(TSSSError) as e:
			ScriptedBackend.fromFile(path)
		assert e.value.rc == C.rcSchemaViolation


class TestGenerationRequest:

	def test_empty_prompt(self, scripted: Callable) -> None:
		with pytest.raises(TSSSError) as e:
			generate(scripted([ 'x' ]), GenerationRequest(''))
		assert e.value.rc == C.rcEmptyInput


	def test_invalid_values(self) -> None:
		with pytest.raises(TSSSError):
			GenerationRequest('p', maxNewTokens=0)
		with pytest.raises(TSSSError):
			GenerationRequest('p', temperature=-0.1)


class TestHttpBackend:

	def test_completions_mode(self) -> None:
		llm = HttpBackend('http://localhost:9/v1', 'llama', mode='completions', retries=0)
		response = { 'choices' : [ { 'text' : 'Steven Spielberg' } ], 'usage' : { 'completion_tokens' : 5, 'prompt_tokens' : 17 } }
		with patch('tsss.LLMClient.sendRequest', return_value=response) as send:
			result = generate(llm, GenerationRequest('Who directed Jaws?', stop=[ '\n' ], maxNewTokens=32))
		url, body = send.call_args[0][0], send.call_args[0][1]
		assert url == 'http://localhost:9/v1/completions'
		assert body == { 'model' : 'llama', 'max_tokens' : 32, 'temperature' : 0.0, 'stop' : [ '\n' ], 'prompt' : 'Who directed Jaws?' }
		assert result.text == 'Steven Spielberg'
		assert (result.newTokenCount, result.promptTokenCount) == (5, 17)


	def test_chat_mode(self) -> None:
		llm = HttpBackend('http://localhost:9/v1/', 'llama', mode='chat')
		response = { 'choices' : [ { 'message' : { 'role' : 'assistant', 'content' : 'London' } } ] }
		with patch('tsss.LLMClient.sendRequest', return_value=response) as send:
			result = generate(llm, GenerationRequest('Where?'))
		url, body = send.call_args[0][0], send.call_args[0][1]
		assert url == 'http://localhost:9/v1/chat/completions'
		assert body['messages'] == [ { 'role' : 'user', 'content' : 'Where?' } ]
		assert 'stop' not in body
		# no usage: counted with the tokenizer
		assert (result.newTokenCount, result.promptTokenCount) == (1, 1)


	def test_recount_after_local_cut(self) -> None:
		llm = HttpBackend('http://localhost:9/v1', 'llama')
		response = { 'choices' : [ { 'text' : 'a b\nc d e' } ], 'usage' : { 'completion_tokens' : 9, 'prompt_tokens' : 1 } }
		with patch('tsss.LLMClient.sendRequest', return_value=response):
			result = generate(llm, GenerationRequest('p', stop=[ '\n' ]))
		assert result.text == 'a b'
		assert result.newTokenCount == 2


	def test_malformed_response(self) -> None:
		llm = HttpBackend('http://localhost:9/v1', 'llama')
		with patch('tsss.LLMClient.sendRequest', return_value={ 'choices' : [] }):
			with pytest.raises(TSSSError) as e:
				generate(llm, GenerationRequest('p'))
		assert e.value.rc == C.rcBackendError


	def test_unknown_mode(self) -> None:
		with pytest.raises(TSSSError) as e:
			HttpBackend('http://localhost:9/v1', 'llama', mode='stream')
		assert e.value.rc == C.rcConfigurationError


class TestSendRequest:

	def test_api_key_header(self, monkeypatch: pytest.MonkeyPatch) -> None:
		monkeypatch.setenv('TSSS_TEST_KEY', 'secret')
		with patch('tsss.HttpClient.requests.post', return_value=httpResponse(200, { 'ok' : True })) as post:
			assert sendRequest('http://x/v1/completions', { 'a' : 1 }, 'TSSS_TEST_KEY') == { 'ok' : True }
		assert post.call_args[1]['headers']['Authorization'] == 'Bearer secret'
		assert post.call_args[1]['json'] == { 'a' : 1 }


	def test_retries_server_errors(self) -> None:
		responses = [ httpResponse(503, {}), httpResponse(200, { 'ok' : True }) ]
		with patch('tsss.HttpClient.requests.post', side_effect=responses) as post, patch('tsss.HttpClient.time.sleep') as sleep:
			assert sendRequest('http://x', {}, retries=2) == { 'ok' : True }
		assert post.call_count == 2
		sleep.assert_called_once_with(0.5)


	def test_client_error_not_retried(self) -> None:
		with patch('tsss.HttpClient.requests.post', return_value=httpResponse(400, { 'error' : 'bad' })) as post:
			with pytest.raises(TSSSError) as e:
				sendRequest('http://x', {}, retries=3)
		assert e.value.rc == C.rcBackendError
		assert post.call_count == 1


	def test_unreachable_after_retries(self) -> None:
		with patch('tsss.HttpClient.requests.post', side_effect=requests.exceptions.ConnectionError()) as post, patch('tsss.HttpClient.time.sleep'):
			with pytest.raises(TSSSError) as e:
				sendRequest('http://x', {}, retries=2)
		assert e.value.rc == C.rcBackendUnreachable
		assert post.call_count == 3


	def test_timeout(self) -> None:
		with patch('tsss.HttpClient.requests.post', side_effect=requests.exceptions.Timeout()), patch('tsss.HttpClient.time.sleep'):
			with pytest.raises(TSSSError) as e:
				sendRequest('http://x', {}, retries=1)
		assert e.value.rc == C.rcTimeout


	def test_join_url(self) -> None:
		assert joinURL('http://x/v1/', '/completions') == 'http://x/v1/completions'


class TestBackendTokenizer:

	def test_counts_from_endpoint(self) -> None:
		tokenizer = BackendTokenizer('http://x/tokenize', 'llama')
		with patch('tsss.Tokenizer.sendRequest', return_value={ 'count' : 7 }) as send:
			assert tokenizer.count('a b') == 7
			assert tokenizer.count('a b') == 7
		assert send.call_count == 1


	def test_token_list_response(self) -> None:
		tokenizer = BackendTokenizer('http://x/tokenize', 'llama')
		with patch('tsss.Tokenizer.sendRequest', return_value={ 'tokens' : [ 1, 2, 3 ] }):
			assert tokenizer.count('abc') == 3


	def test_falls_back_to_whitespace(self) -> None:
		tokenizer = BackendTokenizer('http://x/tokenize', 'llama')
		with patch('tsss.Tokenizer.sendRequest', side_effect=TSSSError(C.rcBackendUnreachable, 'down')) as send:
			assert tokenizer.count('one two three') == 3
			assert tokenizer.count('four five') == 2
		assert send.call_count == 1
		assert tokenizer.identifier == WhitespaceTokenizer.identifier
