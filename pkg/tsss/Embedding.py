#
#	Embedding.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Embedding clients. Passages and queries (main question and sub-queries)
#	are embedded through the same client. Embeddings are 1-D float64 numpy
#	arrays, L2-normalized.
#

import hashlib, threading
from typing import Dict, List, Optional
import numpy as np
from tsss.Constants import Constants as C
from tsss.HttpClient import sendRequest, joinURL
from tsss.Logging import Logging
from tsss.Types import TSSSError


Embedding = np.ndarray


def normalize(v: Embedding) -> Embedding:
	""" Scale a vector to unit L2 norm. Direction is preserved. """
	v = np.asarray(v, dtype=np.float64)
	if v.ndim != 1 or v.shape[0] == 0:
		raise TSSSError(C.rcInvalidArgument, 'embedding must be a non-empty 1-D vector')
	if not np.all(np.isfinite(v)):
		raise TSSSError(C.rcInvalidArgument, 'embedding contains non-finite values')
	if (norm := float(np.linalg.norm(v))) == 0.0:
		raise TSSSError(C.rcZeroVector, 'cannot normalize a zero vector')
	return v / norm


class EmbeddingClient(object):
	""" Base class of all embedding clients. Subclasses implement `embed()`,
		`embedBatch()` validates and normalizes the results.
	"""

	def __init__(self, dim: int, identifier: str) -> None:
		self.dim = dim
		self.identifier = identifier


	def embed(self, texts: List[str]) -> List[Embedding]:
		raise NotImplementedError()


	def __repr__(self) -> str:
		return '%s(%s)' % (type(self).__name__, self.identifier)


class HashEmbeddingClient(EmbeddingClient):
	""" Deterministic offline client. A seeded hash of the text selects a
		pseudo-random unit vector, so equal texts map to equal vectors and
		distinct texts to nearly orthogonal ones (for large enough dims).
	"""

	def __init__(self, dim: int = 256, seed: int = 0) -> None:
		if dim < 1:
			raise TSSSError(C.rcInvalidArgument, 'dim must be positive')
		super().__init__(dim, 'hash-%d-%d' % (dim, seed))
		self.seed = seed


	def embed(self, texts: List[str]) -> List[Embedding]:
		return [ self._vector(t) for t in texts ]


	def _vector(self, text: str) -> Embedding:
		digest = hashlib.sha256(('%d:%s' % (self.seed, text)).encode('utf-8')).digest()
		rng = np.random.default_rng(int.from_bytes(digest[:16], 'little'))
		return rng.standard_normal(self.dim)


class HttpEmbeddingClient(EmbeddingClient):
	""" Client for an OpenAI-compatible /embeddings endpoint. Vectors are
		memoised per text, so repeated texts yield identical vectors within
		one instance even when the server is not bit-reproducible.
	"""

	def __init__(self, url: str, model: str, dim: int, apiKeyEnv: Optional[str] = None, timeout: float = 30.0, retries: int = 3) -> None:
		super().__init__(dim, 'http:%s:%d' % (model, dim))
		self.url = joinURL(url, 'embeddings')
		self.model = model
		self.apiKeyEnv = apiKeyEnv
		self.timeout = timeout
		self.retries = retries
		self._memo: Dict[str, Embedding] = {}
		self._memoLock = threading.Lock()


	def embed(self, texts: List[str]) -> List[Embedding]:
		with self._memoLock:
			missing = list(dict.fromkeys(t for t in texts if t not in self._memo))
		if len(missing) > 0:
			response = sendRequest(self.url, { 'model' : self.model, 'input' : missing }, self.apiKeyEnv, self.timeout, self.retries)
			try:
				data = sorted(response['data'], key=lambda d: d.get('index', 0))
				vectors = [ np.asarray(d['embedding'], dtype=np.float64) for d in data ]
			except (KeyError, TypeError, ValueError) as e:
				raise TSSSError(C.rcBackendError, 'malformed embeddings response: %s' % str(e))
			if len(vectors) != len(missing):
				raise TSSSError(C.rcBackendError, 'embeddings response has %d vectors for %d inputs' % (len(vectors), len(missing)))
			with self._memoLock:
				for t, v in zip(missing, vectors):
					self._memo.setdefault(t, v)
		with self._memoLock:
			return [ self._memo[t] for t in texts ]


def embedBatch(client: EmbeddingClient, texts: List[str]) -> List[Embedding]:
	""" Embed texts and return one L2-normalized embedding per text. """
	if texts is None or len(texts) == 0:
		raise TSSSError(C.rcEmptyInput, 'nothing to embed')
	for i, t in enumerate(texts):
		if t is None or len(t) == 0:
			raise TSSSError(C.rcEmptyInput, 'text %d is empty' % i)
	vectors = client.embed(texts)
	if len(vectors) != len(texts):
		raise TSSSError(C.rcBackendError, 'client returned %d vectors for %d texts' % (len(vectors), len(texts)))
	result = []
	for v in vectors:
		v = np.asarray(v, dtype=np.float64)
		if v.ndim != 1 or v.shape[0] != client.dim:
			raise TSSSError(C.rcDimensionMismatch, 'backend returned a vector of dim %s, expected %d' % (v.shape, client.dim))
		result.append(normalize(v))
	Logging.logDebug('Embedded %d texts with %s' % (len(texts), client.identifier))
	return result


def embedOne(client: EmbeddingClient, text: str) -> Embedding:
	return embedBatch(client, [ text ])[0]
