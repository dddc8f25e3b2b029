#
#	CostModel.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Closed-form per-layer decode cost, with and without KV-cache. Decoding
#	step t costs t*d^2 (projections) + t^2*d (attention) when the prefix is
#	recomputed, and d^2 + t*d when its keys and values are cached. Constant
#	factors (heads, layers) are omitted. Integer arithmetic throughout.
#

from dataclasses import dataclass
from typing import Any, Dict, List, Optional
from tsss.Constants import Constants as C
from tsss.Types import TSSSError


modeNoCache			= 'no_cache'
modeWithCache		= 'with_cache'
modeSlidingWindow	= 'sliding_window'


@dataclass(frozen=True)
class CostBreakdown:
	T: int
	d: int
	projectionCost: int
	attentionCost: int
	mode: str

	@property
	def total(self) -> int:
		return self.projectionCost + self.attentionCost


def _check(T: int, d: int) -> None:
	if not isinstance(T, int) or not isinstance(d, int) or T < 1 or d < 1:
		raise TSSSError(C.rcInvalidArgument, 'T and d must be positive integers: T=%s, d=%s' % (T, d))


def costNoCache(T: int, d: int) -> CostBreakdown:
	_check(T, d)
	return CostBreakdown(T, d, d * d * T * (T + 1) // 2, d * T * (T + 1) * (2 * T + 1) // 6, modeNoCache)


def costWithCache(T: int, d: int) -> CostBreakdown:
	_check(T, d)
	return CostBreakdown(T, d, T * d * d, d * T * (T + 1) // 2, modeWithCache)


def costSlidingWindow(T: int, d: int, W: int) -> CostBreakdown:
	""" KV-cache with attention restricted to the last W positions. """
	_check(T, d)
	if not isinstance(W, int) or W < 1:
		raise TSSSError(C.rcInvalidArgument, 'window must be a positive integer: %s' % W)
	if T <= W:
		attended = T * (T + 1) // 2
	else:
		attended = W * (W + 1) // 2 + (T - W) * W
	return CostBreakdown(T, d, T * d * d, d * attended, modeSlidingWindow)


def kvMemory(T: int, d: int) -> int:
	""" Per-layer KV-cache footprint in units. """
	_check(T, d)
	return T * d


@dataclass(frozen=True)
class CostRow:
	T: int
	d: int
	noCache: int
	withCache: int
	window: Optional[int]
	slidingWindow: Optional[int]
	kvMemory: int

	@property
	def ratio(self) -> float:
		return self.noCache / self.withCache


	@property
	def json(self) -> Dict[str, Any]:
		return {
			'T'					: self.T,
			'd'					: self.d,
			'no_cache'			: self.noCache,
			'with_cache'		: self.withCache,
			'ratio'				: self.ratio,
			'window'			: self.window,
			'sliding_window'	: self.slidingWindow,
			'kv_memory'			: self.kvMemory,
		}


def costGrid(Ts: List[int], ds: List[int], window: Optional[int] = None) -> List[CostRow]:
	rows = []
	for T in Ts:
		for d in ds:
			rows.append(CostRow(T, d,
								costNoCache(T, d).total,
								costWithCache(T, d).total,
								window,
								costSlidingWindow(T, d, window).total if window is not None else None,
								kvMemory(T, d)))
	return rows
