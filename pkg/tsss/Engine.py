#
#	Engine.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Create and wire the engine components from the configuration.
#

import os
from typing import Optional
from tsss.Configuration import Configuration
from tsss.Constants import Constants as C
from tsss.Embedding import EmbeddingClient, HashEmbeddingClient, HttpEmbeddingClient
from tsss.HttpClient import joinURL
from tsss.LLMClient import HttpBackend, LLMBackend, ScriptedBackend
from tsss.Logging import Logging
from tsss.Retriever import Retriever
from tsss.Storage import PassageStore
from tsss.TemplateEngine import Templates
from tsss.Tokenizer import BackendTokenizer, Tokenizer, WhitespaceTokenizer
from tsss.Types import TSSSError
from tsss.VectorIndex import loadIndex


def startup() -> None:
	Templates.setDirectory(Configuration.get('paths.templates'))
	Logging.logDebug('Templates from: %s' % Templates.directory)
	Logging.logDebug(Configuration.print())


def createEmbedder() -> EmbeddingClient:
	if Configuration.get('embedding.backend') == 'hash':
		return HashEmbeddingClient(Configuration.get('embedding.dim'), Configuration.get('embedding.seed'))
	return HttpEmbeddingClient(	Configuration.get('embedding.url'),
								Configuration.get('embedding.model'),
								Configuration.get('embedding.dim'),
								Configuration.get('embedding.apiKeyEnv'),
								Configuration.get('embedding.timeout'),
								Configuration.get('embedding.retries'))


def createTokenizer() -> Tokenizer:
	if Configuration.get('llm.tokenizer') == 'backend':
		# vLLM serves /tokenize next to /v1
		base = Configuration.get('llm.url').rstrip('/')
		if base.endswith('/v1'):
			base = base[:-3]
		return BackendTokenizer(joinURL(base, 'tokenize'), Configuration.get('llm.model'), Configuration.get('llm.apiKeyEnv'), Configuration.get('llm.timeout'))
	return WhitespaceTokenizer()


def createBackend(section: str, tokenizer: Optional[Tokenizer] = None) -> LLMBackend:
	""" Generation backend of a configuration section ('llm' or 'judge'). """
	if Configuration.get('%s.backend' % section) == 'scripted':
		if len(script := Configuration.get('%s.script' % section)) == 0:
			raise TSSSError(C.rcConfigurationError, '[%s]:script must name a JSON script file for the scripted backend' % section)
		return ScriptedBackend.fromFile(script, tokenizer)
	return HttpBackend(	Configuration.get('%s.url' % section),
						Configuration.get('%s.model' % section),
						Configuration.get('%s.mode' % section),
						Configuration.get('%s.apiKeyEnv' % section),
						Configuration.get('%s.timeout' % section),
						Configuration.get('%s.retries' % section),
						tokenizer)


def createJudge() -> Optional[LLMBackend]:
	if not Configuration.get('judge.enable'):
		return None
	return createBackend('judge')


def openRetriever(embedder: EmbeddingClient) -> Retriever:
	""" Load the index and its passage store. The index must have been built
		with the configured embedding client.
	"""
	indexPath = Configuration.get('paths.index')
	storePath = Configuration.get('paths.store')
	if not os.path.isfile(storePath):
		raise TSSSError(C.rcIOFailure, 'passage store not found: %s (run ingest first)' % storePath)
	index = loadIndex(indexPath, embedder.identifier)
	return Retriever(index, PassageStore(storePath), embedder)
