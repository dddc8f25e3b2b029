#
#	Terminator.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Retriever-based termination. A new sub-query is scored by its maximum
#	cosine similarity to the main question and all earlier sub-queries. The
#	run halts once that score reaches the threshold tau.
#

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
import numpy as np
from tsss.Constants import Constants as C
from tsss.Embedding import Embedding
from tsss.Types import ArgmaxKind, TSSSError


@dataclass
class QueryHistory:
	mainQuestion: Embedding
	subqueries: List[Embedding] = field(default_factory=list)

	@property
	def dim(self) -> int:
		return int(np.asarray(self.mainQuestion).shape[0])


	def add(self, subquery: Embedding) -> None:
		self.subqueries.append(subquery)


	def __len__(self) -> int:
		return 1 + len(self.subqueries)


@dataclass(frozen=True)
class TerminationDecision:
	score: float
	threshold: float
	argmaxSource: ArgmaxKind
	argmaxIndex: Optional[int]		# 1-based sub-query index, None for the main question
	halt: bool

	@property
	def json(self) -> Dict[str, Any]:
		return {
			'score'			: self.score,
			'threshold'		: self.threshold,
			'argmax_source'	: self.argmaxSource.value,
			'argmax_index'	: self.argmaxIndex,
			'halt'			: self.halt,
		}


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
	if (na := float(np.linalg.norm(a))) == 0.0 or (nb := float(np.linalg.norm(b))) == 0.0:
		raise TSSSError(C.rcZeroVector, 'cannot score a zero vector')
	return float(np.dot(a, b) / (na * nb))


def scoreSubquery(q: Embedding, history: QueryHistory) -> Tuple[float, ArgmaxKind, Optional[int]]:
	""" Maximum cosine similarity of q to the history. Ties prefer the main
		question, then the lowest sub-query index.
	"""
	q = np.asarray(q, dtype=np.float64)
	main = np.asarray(history.mainQuestion, dtype=np.float64)
	if q.ndim != 1 or q.shape != main.shape:
		raise TSSSError(C.rcDimensionMismatch, 'sub-query dim %s does not match history dim %s' % (q.shape, main.shape))

	best = _cosine(q, main)
	source, index = ArgmaxKind.mainQuestion, None
	for i, s in enumerate(history.subqueries, start=1):
		s = np.asarray(s, dtype=np.float64)
		if s.shape != q.shape:
			raise TSSSError(C.rcDimensionMismatch, 'history entry %d has dim %s, expected %s' % (i, s.shape, q.shape))
		if (score := _cosine(q, s)) > best:
			best, source, index = score, ArgmaxKind.subquery, i
	return best, source, index


def decide(score: float, tau: float, argmaxSource: ArgmaxKind = ArgmaxKind.mainQuestion, argmaxIndex: Optional[int] = None) -> TerminationDecision:
	""" Halt iff score >= tau. The comparison is exact. """
	if not -1.0 <= tau <= 1.0:
		raise TSSSError(C.rcInvalidArgument, 'tau must be in [-1, 1]: %s' % tau)
	return TerminationDecision(float(score), float(tau), argmaxSource, argmaxIndex, bool(score >= tau))


def evaluateSubquery(q: Embedding, history: QueryHistory, tau: float) -> TerminationDecision:
	score, source, index = scoreSubquery(q, history)
	return decide(score, tau, source, index)


def decideSequence(scores: List[float], tau: float) -> Optional[int]:
	""" Replay a recorded score sequence. Return the 1-based index of the first
		halting score, or None when no score reaches tau.
	"""
	for i, score in enumerate(scores, start=1):
		if decide(score, tau).halt:
			return i
	return None
