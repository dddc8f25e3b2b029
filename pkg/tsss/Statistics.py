#
#	Statistics.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Statistics Module. Counters over the traces of a run, and a snapshot of
#	the process resources.
#

import os
from threading import Lock
from typing import Any, Dict
import psutil 	# type: ignore
from tsss.Logging import Logging


tracesCompleted		= 'trCmp'
tracesFailed		= 'trFld'
retrievalCalls		= 'rtCls'
generations			= 'gnCls'
generatedTokens		= 'gnTkn'
prefilledTokens		= 'pfTkn'
cachedTokens		= 'chTkn'


class Statistics(object):

	def __init__(self) -> None:
		self.statLock = Lock()
		self.stats: Dict[str, int] = {
			tracesCompleted		: 0,
			tracesFailed		: 0,
			retrievalCalls		: 0,
			generations			: 0,
			generatedTokens		: 0,
			prefilledTokens		: 0,
			cachedTokens		: 0,
		}


	def handleTrace(self, trace: Any) -> None:
		""" Count a finished (or failed) trace. """
		with self.statLock:
			if trace.error is None:
				self.stats[tracesCompleted] += 1
			else:
				self.stats[tracesFailed] += 1
			self.stats[retrievalCalls] += trace.retrievals
			self.stats[generations] += trace.generations
			self.stats[generatedTokens] += trace.generatedTokens
			self.stats[prefilledTokens] += trace.prefilledTokens
			self.stats[cachedTokens] += trace.cachedTokens


	def getStats(self) -> Dict[str, Any]:
		with self.statLock:
			s = self.stats.copy()

		# Calculate some stats
		prompt = s[prefilledTokens] + s[cachedTokens]
		return {
			'traces_completed'	: s[tracesCompleted],
			'traces_failed'		: s[tracesFailed],
			'retrieval_calls'	: s[retrievalCalls],
			'generations'		: s[generations],
			'generated_tokens'	: s[generatedTokens],
			'prefilled_tokens'	: s[prefilledTokens],
			'cached_tokens'		: s[cachedTokens],
			'cache_hit_rate'	: s[cachedTokens] / prompt if prompt > 0 else 0.0,
			'process'			: processSnapshot(),
		}


def processSnapshot() -> Dict[str, Any]:
	try:
		process = psutil.Process(os.getpid())
		times = process.cpu_times()
		return {
			'rss_bytes'		: process.memory_info().rss,
			'cpu_seconds'	: times.user + times.system,
			'cpu_count'		: psutil.cpu_count(),
			'threads'		: process.num_threads(),
		}
	except psutil.Error as e:
		Logging.logWarn('Cannot read process statistics: %s' % str(e))
		return {}
