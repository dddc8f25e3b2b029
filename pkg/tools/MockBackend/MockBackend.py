#
#	MockBackend.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	A small OpenAI-compatible server for offline runs of the HTTP clients.
#	Completions are answered from a script (JSON list of strings, in order),
#	embeddings with the deterministic hash embedding, token counts by
#	whitespace.
#
#	python tools/MockBackend/MockBackend.py --script script.json --port 8000
#

import argparse, json, logging, sys
from threading import Lock
from typing import Any, Dict, List, Optional, Tuple
from flask import Flask, Response, jsonify, request
from werkzeug.serving import WSGIRequestHandler
from tsss.Embedding import HashEmbeddingClient
from tsss.LLMClient import cutAtStop
from tsss.Tokenizer import WhitespaceTokenizer


class MockBackend(object):

	def __init__(self, script: Optional[List[str]] = None, dim: int = 256, seed: int = 0) -> None:
		self.script = list(script or [])
		self.position = 0
		self.lock = Lock()
		self.embedder = HashEmbeddingClient(dim, seed)
		self.tokenizer = WhitespaceTokenizer()
		self.requests: List[Dict[str, Any]] = []

		self.flaskApp = Flask('MockBackend')
		self.addEndpoint('/v1/completions', handler=self.handleCompletions, methods=['POST'])
		self.addEndpoint('/v1/chat/completions', handler=self.handleChatCompletions, methods=['POST'])
		self.addEndpoint('/v1/embeddings', handler=self.handleEmbeddings, methods=['POST'])
		self.addEndpoint('/tokenize', handler=self.handleTokenize, methods=['POST'])


	def addEndpoint(self, endpoint: str, handler: Any, methods: List[str]) -> None:
		self.flaskApp.add_url_rule(endpoint, endpoint.replace('/', '_'), handler, methods=methods)


	def run(self, port: int) -> None:
		WSGIRequestHandler.protocol_version = 'HTTP/1.1'
		logging.getLogger('werkzeug').setLevel(logging.WARNING)
		self.flaskApp.run(host='127.0.0.1', port=port, threaded=True)


	#########################################################################
	#
	#	Handlers
	#

	def _body(self) -> Dict[str, Any]:
		body = request.get_json(force=True, silent=True) or {}
		with self.lock:
			self.requests.append(body)
		return body


	def _nextCompletion(self, body: Dict[str, Any]) -> Tuple[Optional[str], int]:
		with self.lock:
			if self.position >= len(self.script):
				return None, 0
			text = self.script[self.position]
			self.position += 1
		stop = body.get('stop') or []
		return cutAtStop(text, [ stop ] if isinstance(stop, str) else stop), self.position


	def _usage(self, prompt: str, text: str) -> Dict[str, int]:
		p, c = self.tokenizer.count(prompt), self.tokenizer.count(text)
		return { 'prompt_tokens' : p, 'completion_tokens' : c, 'total_tokens' : p + c }


	def _exhausted(self) -> Tuple[Response, int]:
		return jsonify({ 'error' : { 'message' : 'script exhausted', 'type' : 'invalid_request_error' } }), 400


	def handleCompletions(self) -> Any:
		body = self._body()
		text, n = self._nextCompletion(body)
		if text is None:
			return self._exhausted()
		return jsonify({
			'id'		: 'cmpl-%d' % n,
			'object'	: 'text_completion',
			'model'		: body.get('model', 'mock'),
			'choices'	: [ { 'index' : 0, 'text' : text, 'finish_reason' : 'stop' } ],
			'usage'		: self._usage(body.get('prompt', ''), text),
		})


	def handleChatCompletions(self) -> Any:
		body = self._body()
		text, n = self._nextCompletion(body)
		if text is None:
			return self._exhausted()
		prompt = ''.join(m.get('content', '') for m in body.get('messages', []))
		return jsonify({
			'id'		: 'chatcmpl-%d' % n,
			'object'	: 'chat.completion',
			'model'		: body.get('model', 'mock'),
			'choices'	: [ { 'index' : 0, 'message' : { 'role' : 'assistant', 'content' : text }, 'finish_reason' : 'stop' } ],
			'usage'		: self._usage(prompt, text),
		})


	def handleEmbeddings(self) -> Any:
		body = self._body()
		texts = body.get('input', [])
		if isinstance(texts, str):
			texts = [ texts ]
		vectors = self.embedder.embed(texts)
		return jsonify({
			'object'	: 'list',
			'model'		: body.get('model', 'mock'),
			'data'		: [ { 'object' : 'embedding', 'index' : i, 'embedding' : v.tolist() } for i, v in enumerate(vectors) ],
			'usage'		: { 'prompt_tokens' : sum(self.tokenizer.count(t) for t in texts) },
		})


	def handleTokenize(self) -> Any:
		body = self._body()
		return jsonify({ 'count' : self.tokenizer.count(body.get('prompt', '')) })


def parseArgs() -> argparse.Namespace:
	parser = argparse.ArgumentParser(description='OpenAI-compatible mock backend for offline TSSS runs')
	parser.add_argument('--script', action='store', dest='script', default=None, help='JSON file with a list of completions')
	parser.add_argument('--port', action='store', dest='port', default=8000, type=int, help='port to listen on')
	parser.add_argument('--dim', action='store', dest='dim', default=256, type=int, help='embedding dimension')
	parser.add_argument('--seed', action='store', dest='seed', default=0, type=int, help='seed of the hash embedding')
	return parser.parse_args()


if __name__ == '__main__':
	args = parseArgs()
	script = []
	if args.script:
		with open(args.script, encoding='utf-8') as f:
			script = json.load(f)
	print('MockBackend listening on http://127.0.0.1:%d/v1 (%d scripted completions)' % (args.port, len(script)), file=sys.stderr)
	MockBackend(script, args.dim, args.seed).run(args.port)
