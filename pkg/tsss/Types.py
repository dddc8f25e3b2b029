#
#	Types.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Enumerations and the engine's error type
#

from enum import Enum
from typing import Any


class SegmentKind(str, Enum):
	""" Prefilled template/context text versus model-generated text """
	scaffold		= 'scaffold'
	slot			= 'slot'


class TerminationKind(str, Enum):
	""" How a question run ended """
	similarityHalt		= 'similarity_halt'
	maxHopsExhausted	= 'max_hops_exhausted'
	degenerateQuery		= 'degenerate_query'
	generatorStop		= 'generator_stop'
	fixedRounds			= 'fixed_rounds'
	singlePass			= 'single_pass'


class ArgmaxKind(str, Enum):
	""" Which member of the query history achieved the maximum similarity """
	mainQuestion	= 'main_question'
	subquery		= 'subquery'


class TSSSError(Exception):
	""" Error carrying one of the result codes from Constants. The orchestrator
		attaches the partial trace of a failed run to `trace`.
	"""

	def __init__(self, rc: int, msg: str) -> None:
		super().__init__(msg)
		self.rc = rc
		self.msg = msg
		self.trace: Any = None


	def __str__(self) -> str:
		return '%s (rc: %d)' % (self.msg, self.rc)
