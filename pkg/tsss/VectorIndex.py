#
#	VectorIndex.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Exact dense vector index. Embeddings are normalized at ingestion so a
#	cosine similarity is a dot product. The index is immutable after build
#	and can be shared by concurrent readers.
#
#	File format (little-endian):
#		magic (8 bytes) | version u16 | dim u32 | count u32 |
#		client-id length u16 | client-id utf-8 | sha256 of body (32 bytes) |
#		body = id table (u16 length + utf-8 per id) + count*dim float64
#

import hashlib, struct
from dataclasses import dataclass
from typing import List, Optional
import numpy as np
from tsss.Constants import Constants as C
from tsss.Embedding import Embedding, EmbeddingClient, embedBatch, normalize
from tsss.Logging import Logging
from tsss.Storage import Passage
from tsss.Types import TSSSError


_headerFormat = '<8sHII'


@dataclass(frozen=True)
class RetrievalHit:
	passageId: str
	score: float
	rank: int


class VectorIndex(object):

	def __init__(self, ids: List[str], vectors: np.ndarray, clientId: str) -> None:
		if len(ids) != vectors.shape[0]:
			raise TSSSError(C.rcInternalError, 'id table and vectors disagree')
		if len(set(ids)) != len(ids):
			raise TSSSError(C.rcDuplicateId, 'duplicate passage ids in index')
		self.ids = list(ids)
		self.vectors = np.ascontiguousarray(vectors, dtype=np.float64)
		self.vectors.setflags(write=False)
		self.clientId = clientId
		# rank of every id in ascending id order, the tie-breaker for equal scores
		order = sorted(range(len(self.ids)), key=lambda i: self.ids[i])
		self._idRank = np.empty(len(self.ids), dtype=np.int64)
		self._idRank[order] = np.arange(len(self.ids))


	@property
	def dim(self) -> int:
		return int(self.vectors.shape[1])


	@property
	def count(self) -> int:
		return len(self.ids)


	def __repr__(self) -> str:
		return 'VectorIndex(count=%d, dim=%d, client=%s)' % (self.count, self.dim, self.clientId)


def buildIndex(passages: List[Passage], client: EmbeddingClient, embedTitle: bool = True, batchSize: int = 64) -> VectorIndex:
	""" Embed every passage and build the index. """
	if passages is None or len(passages) == 0:
		raise TSSSError(C.rcEmptyInput, 'no passages to index')
	seen = set()
	for p in passages:
		if p.id in seen:
			raise TSSSError(C.rcDuplicateId, 'duplicate passage id: %s' % p.id)
		seen.add(p.id)

	vectors: List[Embedding] = []
	for start in range(0, len(passages), batchSize):
		batch = passages[start:start + batchSize]
		vectors.extend(embedBatch(client, [ p.embeddingText(embedTitle) for p in batch ]))
		Logging.logDebug('Embedded passages %d..%d of %d' % (start + 1, start + len(batch), len(passages)))
	index = VectorIndex([ p.id for p in passages ], np.vstack(vectors), client.identifier)
	Logging.log('Built index: %d passages, dim %d' % (index.count, index.dim))
	return index


def search(index: VectorIndex, query: Embedding, k: int = C.defaultK) -> List[RetrievalHit]:
	""" Exact top-k cosine search. Scores descending, ties by ascending passage id. """
	if k < 1:
		raise TSSSError(C.rcInvalidArgument, 'k must be positive: %d' % k)
	query = np.asarray(query, dtype=np.float64)
	if query.ndim != 1 or query.shape[0] != index.dim:
		raise TSSSError(C.rcDimensionMismatch, 'query dim %s does not match index dim %d' % (query.shape, index.dim))
	# row-wise reduction, so equal vectors always get bit-identical scores
	scores = (index.vectors * normalize(query)).sum(axis=1)
	order = np.lexsort((index._idRank, -scores))[:min(k, index.count)]
	return [ RetrievalHit(index.ids[i], float(scores[i]), rank) for rank, i in enumerate(order, start=1) ]


#########################################################################
#
#	Persistence
#

def saveIndex(index: VectorIndex, path: str) -> None:
	body = bytearray()
	for pid in index.ids:
		b = pid.encode('utf-8')
		body += struct.pack('<H', len(b))
		body += b
	body += index.vectors.astype('<f8').tobytes()
	clientId = index.clientId.encode('utf-8')

	try:
		with open(path, 'wb') as f:
			f.write(struct.pack(_headerFormat, C.indexMagic, C.indexVersion, index.dim, index.count))
			f.write(struct.pack('<H', len(clientId)))
			f.write(clientId)
			f.write(hashlib.sha256(body).digest())
			f.write(body)
	except OSError as e:
		raise TSSSError(C.rcIOFailure, 'cannot write index %s: %s' % (path, e.strerror or str(e)))
	Logging.log('Saved index to: %s' % path)


def loadIndex(path: str, expectedClientId: Optional[str] = None) -> VectorIndex:
	try:
		with open(path, 'rb') as f:
			data = f.read()
	except OSError as e:
		raise TSSSError(C.rcIOFailure, 'cannot read index %s: %s' % (path, e.strerror or str(e)))

	try:
		magic, version, dim, count = struct.unpack_from(_headerFormat, data, 0)
		if magic != C.indexMagic:
			raise TSSSError(C.rcBadFormat, 'not an index file: %s' % path)
		if version != C.indexVersion:
			raise TSSSError(C.rcFormatVersionMismatch, 'index format version %d, expected %d' % (version, C.indexVersion))
		offset = struct.calcsize(_headerFormat)
		(idLen,) = struct.unpack_from('<H', data, offset)
		offset += 2
		clientId = data[offset:offset + idLen].decode('utf-8')
		offset += idLen
		checksum = data[offset:offset + 32]
		offset += 32
		body = data[offset:]
		if hashlib.sha256(body).digest() != checksum:
			raise TSSSError(C.rcChecksumMismatch, 'index checksum mismatch: %s' % path)

		ids = []
		pos = 0
		for _ in range(count):
			(l,) = struct.unpack_from('<H', body, pos)
			pos += 2
			ids.append(body[pos:pos + l].decode('utf-8'))
			pos += l
		if len(body) - pos != count * dim * 8:
			raise TSSSError(C.rcBadFormat, 'index vector block has the wrong size: %s' % path)
		vectors = np.frombuffer(body, dtype='<f8', offset=pos).reshape(count, dim).astype(np.float64)
	except (struct.error, UnicodeDecodeError, ValueError) as e:
		raise TSSSError(C.rcBadFormat, 'corrupt index file %s: %s' % (path, str(e)))

	if expectedClientId is not None and clientId != expectedClientId:
		raise TSSSError(C.rcEmbeddingClientMismatch, 'index was built with %s, configured client is %s' % (clientId, expectedClientId))
	index = VectorIndex(ids, vectors, clientId)
	Logging.log('Loaded index from: %s (%d passages, dim %d)' % (path, index.count, index.dim))
	return index
