#
#	Logging.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Log messages of the engine. Messages are queued by the caller and written
#	by a background thread to standard error (rich) and an optional
#	rotating log file.
#

"""	Queued logging for the engine. """

import logging, logging.handlers, os, sys, threading, queue
from typing import Optional, Tuple
from rich.console import Console
from rich.highlighter import RegexHighlighter
from rich.logging import RichHandler
from rich.theme import Theme
from tsss.Configuration import Configuration

# (level, message, filename, line number, thread name)
LogEntry = Tuple[int, str, str, int, str]


class Logging:
	""" Static access to the engine's log. Until `init()` is called (and after
		`finit()`) all messages are dropped, so library code and tests can log
		without any set-up.
	"""

	logger:Optional[logging.Logger]			= None
	logLevel 								= logging.INFO
	loggingEnabled							= True
	enableFileLogging						= False
	worker:Optional[threading.Thread]		= None
	stopEvent								= threading.Event()
	queue:Optional['queue.Queue[LogEntry]']	= None

	checkInterval:float	= 0.2		# seconds between two drains of the queue
	queueMaxsize:int	= 1000		# messages beyond this are dropped

	@staticmethod
	def init() -> None:
		if Logging.logger is not None:
			return
		Logging.logLevel 			= Configuration.get('logging.level')
		Logging.loggingEnabled		= Configuration.get('logging.enable')
		Logging.enableFileLogging 	= Configuration.get('logging.enableFileLogging')

		logger = logging.getLogger('tsss')
		logger.setLevel(Logging.logLevel)
		logger.propagate = False
		logger.addHandler(TSSSRichLogHandler())
		if Logging.enableFileLogging:
			logger.addHandler(Logging._fileHandler())
		Logging.logger = logger

		# requests and urllib3 only get to say something when it matters
		for name in ('requests', 'urllib3'):
			logging.getLogger(name).setLevel(logging.WARNING)

		Logging.queue = queue.Queue(maxsize=Logging.queueMaxsize)
		Logging.stopEvent.clear()
		Logging.worker = threading.Thread(target=Logging._drainLoop, name='loggingWorker', daemon=True)
		Logging.worker.start()


	@staticmethod
	def _fileHandler() -> logging.Handler:
		path = Configuration.get('logging.file')
		os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
		handler = logging.handlers.RotatingFileHandler(path, maxBytes=Configuration.get('logging.size'), backupCount=Configuration.get('logging.count'))
		handler.setLevel(Logging.logLevel)
		handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)-7s %(message)s'))
		return handler


	@staticmethod
	def finit() -> None:
		""" Stop the background thread, write what is still queued and close
			all handlers.
		"""
		if Logging.worker is not None:
			Logging.stopEvent.set()
			Logging.worker.join(Logging.checkInterval + 5.0)
			Logging.worker = None
		Logging.loggingWorker()
		if Logging.logger is not None:
			for h in list(Logging.logger.handlers):
				h.close()
				Logging.logger.removeHandler(h)
		Logging.logger = None
		Logging.queue = None


	@staticmethod
	def loggingWorker() -> None:
		q, logger = Logging.queue, Logging.logger
		if q is None or logger is None:
			return
		while not q.empty():
			level, msg, filename, lineno, threadName = q.get()
			logger.handle(logger.makeRecord('tsss', level, filename, lineno, '%s - %s', (threadName, msg), None))


	@staticmethod
	def _drainLoop() -> None:
		while not Logging.stopEvent.wait(Logging.checkInterval):
			Logging.loggingWorker()


	@staticmethod
	def log(msg: str) -> None:
		Logging._log(logging.INFO, msg)


	@staticmethod
	def logDebug(msg: str) -> None:
		Logging._log(logging.DEBUG, msg)


	@staticmethod
	def logWarn(msg: str) -> None:
		Logging._log(logging.WARNING, msg)


	@staticmethod
	def logErr(msg: str) -> None:
		Logging._log(logging.ERROR, msg)


	@staticmethod
	def _log(level: int, msg: str) -> None:
		if not Logging.loggingEnabled or level < Logging.logLevel or Logging.queue is None:
			return
		caller = sys._getframe(2)	# the code that called log(), logDebug() etc.
		try:
			Logging.queue.put((level, msg, caller.f_code.co_filename, caller.f_lineno, threading.current_thread().name), timeout=1.0)
		except queue.Full:
			pass


#
#	Rich console output
#

class TSSSHighlighter(RegexHighlighter):
	base_style = 'repr.'
	highlights = [
		r'(?P<brace>[\{\[\(\)\]\}])',
		r'(?P<bool_true>True)|(?P<bool_false>False)|(?P<none>None)',
		r'(?P<number>(?<!\w)\-?[0-9]+\.?[0-9]*\b)',
		r'(?P<hop>hop [0-9]+)',
		r'(?P<score>score[:=] ?\-?[0-9]+\.[0-9]+)',
		r'(?P<halt>HALT|CONTINUE)',
		r'(?P<url>https?:\/\/[0-9a-zA-Z\$\-\_\~\+\!`\(\)\,\.\?\/\;\:\&\=\%]*)',
		r'(?P<path>(?<![\w/])(?:\.{0,2}/)[\w\./\-]+)',
	]


class TSSSRichLogHandler(RichHandler):

	def __init__(self, level: int = logging.NOTSET) -> None:
		theme = Theme({	'repr.hop'					: 'spring_green2',
						'repr.score'				: 'light_sky_blue1',
						'repr.halt'					: 'magenta2',
						'repr.url'					: 'underline sandy_brown',
						'repr.path'					: 'grey70',
						'logging.level.debug'		: 'grey50',
						'logging.level.warning'		: 'orange3',
						'logging.level.error'		: 'reverse red' })
		super().__init__(level=level, console=Console(stderr=True, theme=theme), highlighter=TSSSHighlighter(), log_time_format='[%X]')
