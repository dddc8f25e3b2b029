#
#	Retriever.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	The single retrieval path shared by the TSSS loop and all baselines:
#	embed a query, search the index, attach the stored passages.
#

from dataclasses import dataclass
from threading import Lock
from typing import Any, Dict, List, Optional, Set
from tsss.Constants import Constants as C
from tsss.Embedding import Embedding, EmbeddingClient, embedOne
from tsss.Logging import Logging
from tsss.Storage import Passage, PassageStore
from tsss.VectorIndex import RetrievalHit, VectorIndex, search


@dataclass(frozen=True)
class RetrievedPassage:
	hit: RetrievalHit
	passage: Passage


	@property
	def json(self) -> Dict[str, Any]:
		return { 'id' : self.hit.passageId, 'score' : self.hit.score, 'rank' : self.hit.rank, 'title' : self.passage.title }


class Retriever(object):

	def __init__(self, index: VectorIndex, store: PassageStore, embedder: EmbeddingClient) -> None:
		self.index = index
		self.store = store
		self.embedder = embedder
		self.statLock = Lock()
		self.calls = 0


	def embed(self, text: str) -> Embedding:
		return embedOne(self.embedder, text)


	def retrieve(self, text: str, k: int = C.defaultK, embedding: Optional[Embedding] = None, exclude: Optional[Set[str]] = None) -> List[RetrievedPassage]:
		""" Retrieve the top-k passages for a query text. An already computed
			query embedding may be passed to avoid embedding twice. Passages
			whose ids are in `exclude` are skipped and the list is refilled
			from lower ranks (dedup across hops).
		"""
		if embedding is None:
			embedding = self.embed(text)
		want = k + (len(exclude) if exclude else 0)
		hits = search(self.index, embedding, want)
		if exclude:
			hits = [ h for h in hits if h.passageId not in exclude ][:k]
			hits = [ RetrievalHit(h.passageId, h.score, rank) for rank, h in enumerate(hits, start=1) ]
		with self.statLock:
			self.calls += 1
		passages = self.store.getPassages([ h.passageId for h in hits ])
		Logging.logDebug('Retrieved %d passages for: %s' % (len(hits), text))
		return [ RetrievedPassage(h, p) for h, p in zip(hits, passages) ]
