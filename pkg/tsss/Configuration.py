#
#	Configuration.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Managing engine configurations
#

import logging, configparser, argparse, os
from typing import Any, Dict, Optional
from rich.console import Console
from tsss.Constants import Constants as C


defaultConfigFile			= 'tsss.ini'
version						= '0.3.0'

_errConsole = Console(stderr=True)

_logLevels = {
	'debug'		: logging.DEBUG,
	'info'		: logging.INFO,
	'warn'		: logging.WARNING,
	'warning'	: logging.WARNING,
	'error'		: logging.ERROR,
}


class Configuration(object):
	_configuration: Dict[str, Any] = {}

	@staticmethod
	def init(args: Optional[argparse.Namespace] = None) -> bool:

		# resolve the args, of any
		argsConfigfile			= args.configfile if args is not None and 'configfile' in args and args.configfile is not None else None
		argsLoglevel			= args.loglevel if args is not None and 'loglevel' in args else None
		argsTau					= args.tau if args is not None and 'tau' in args else None
		argsK					= args.k if args is not None and 'k' in args else None
		argsMaxHops				= args.maxhops if args is not None and 'maxhops' in args else None
		argsParallelism			= args.parallelism if args is not None and 'parallelism' in args else None
		argsJudge				= args.judge if args is not None and 'judge' in args else None
		argsMethod				= args.method if args is not None and 'method' in args else None
		argsPaths				= { key : getattr(args, key) for key in [ 'corpus', 'index', 'dataset', 'output' ] if args is not None and key in args }

		# An explicitly given file must exist. The default file is optional.
		if argsConfigfile is not None and not os.path.isfile(argsConfigfile):
			_errConsole.print('Configuration Error: file not found: %s' % argsConfigfile)
			return False
		configfile = argsConfigfile or defaultConfigFile

		config = configparser.ConfigParser(	interpolation=configparser.ExtendedInterpolation(),
											converters={'list': lambda x: [i.strip() for i in x.split(',') if len(i.strip()) > 0]}	# Convert csv to list
										  )
		try:
			config.read(configfile)
		except configparser.Error as e:
			_errConsole.print('Error in configuration file: %s - %s' % (configfile, str(e)))
			return False

		try:
			Configuration._configuration = {
				'configfile'					: configfile,

				#
				#	Paths
				#

				'paths.corpus'					: config.get('paths', 'corpus',						fallback='./data/corpus.jsonl'),
				'paths.index'					: config.get('paths', 'index',						fallback='./data/index.bin'),
				'paths.store'					: config.get('paths', 'store',						fallback=''),		# Default: <index>.passages.json
				'paths.dataset'					: config.get('paths', 'dataset',					fallback='./data/dataset.jsonl'),
				'paths.templates'				: config.get('paths', 'templates',					fallback=''),		# Default: the package's templates
				'paths.output'					: config.get('paths', 'output',						fallback='./results'),

				#
				#	Embedding client
				#

				'embedding.backend'				: config.get('embedding', 'backend',				fallback='hash'),	# hash, http
				'embedding.url'					: config.get('embedding', 'url',					fallback='http://127.0.0.1:8000/v1'),
				'embedding.model'				: config.get('embedding', 'model',					fallback='e5-base-v2'),
				'embedding.apiKeyEnv'			: config.get('embedding', 'apiKeyEnv',				fallback='TSSS_EMBEDDING_API_KEY'),
				'embedding.timeout'				: config.getfloat('embedding', 'timeout',			fallback=30.0),		# seconds
				'embedding.retries'				: config.getint('embedding', 'retries',				fallback=3),
				'embedding.dim'					: config.getint('embedding', 'dim',					fallback=256),		# hash backend only
				'embedding.seed'				: config.getint('embedding', 'seed',				fallback=0),		# hash backend only
				'embedding.batchSize'			: config.getint('embedding', 'batchSize',			fallback=64),
				'embedding.embedTitle'			: config.getboolean('embedding', 'embedTitle',		fallback=True),		# "title\ntext" or text only

				#
				#	Generator
				#

				'llm.backend'					: config.get('llm', 'backend',						fallback='http'),	# http, scripted
				'llm.url'						: config.get('llm', 'url',							fallback='http://127.0.0.1:8000/v1'),
				'llm.model'						: config.get('llm', 'model',						fallback='llama3.1-8b-instruct'),
				'llm.apiKeyEnv'					: config.get('llm', 'apiKeyEnv',					fallback='TSSS_LLM_API_KEY'),
				'llm.timeout'					: config.getfloat('llm', 'timeout',					fallback=60.0),		# seconds
				'llm.retries'					: config.getint('llm', 'retries',					fallback=3),
				'llm.mode'						: config.get('llm', 'mode',							fallback='completions'),	# completions, chat
				'llm.script'					: config.get('llm', 'script',						fallback=''),
				'llm.tokenizer'					: config.get('llm', 'tokenizer',					fallback='whitespace'),	# whitespace, backend
				'llm.temperature'				: config.getfloat('llm', 'temperature',				fallback=0.0),

				#
				#	LLM-as-Judge
				#

				'judge.enable'					: config.getboolean('judge', 'enable',				fallback=False),
				'judge.backend'					: config.get('judge', 'backend',					fallback='http'),	# http, scripted
				'judge.url'						: config.get('judge', 'url',						fallback='https://api.openai.com/v1'),
				'judge.model'					: config.get('judge', 'model',						fallback='gpt-4o'),
				'judge.apiKeyEnv'				: config.get('judge', 'apiKeyEnv',					fallback='TSSS_JUDGE_API_KEY'),
				'judge.timeout'					: config.getfloat('judge', 'timeout',				fallback=60.0),
				'judge.retries'					: config.getint('judge', 'retries',					fallback=3),
				'judge.mode'					: config.get('judge', 'mode',						fallback='chat'),
				'judge.script'					: config.get('judge', 'script',						fallback=''),
				'judge.rateLimit'				: config.getfloat('judge', 'rateLimit',				fallback=0.0),		# calls per second, 0 = unlimited

				#
				#	Question runs
				#

				'run.tau'						: config.getfloat('run', 'tau',						fallback=C.defaultTau),
				'run.k'							: config.getint('run', 'k',							fallback=C.defaultK),
				'run.maxHops'					: config.getint('run', 'maxHops',					fallback=C.defaultMaxHops),
				'run.maxNewTokensSubquery'		: config.getint('run', 'maxNewTokensSubquery',		fallback=C.defaultMaxNewTokensSubquery),
				'run.maxNewTokensResponse'		: config.getint('run', 'maxNewTokensResponse',		fallback=C.defaultMaxNewTokensResponse),
				'run.maxNewTokensFinal'			: config.getint('run', 'maxNewTokensFinal',			fallback=C.defaultMaxNewTokensFinal),
				'run.dedupPassages'				: config.getboolean('run', 'dedupPassages',			fallback=False),
				'run.shareCache'				: config.getboolean('run', 'shareCache',			fallback=False),

				#
				#	Baselines
				#

				'baselines.maxIterations'		: config.getint('baselines', 'maxIterations',		fallback=C.defaultMaxIterations),
				'baselines.iterRetGenRounds'	: config.getint('baselines', 'iterRetGenRounds',	fallback=C.defaultIterRetGenRounds),

				#
				#	Evaluation
				#

				'eval.method'					: config.get('eval', 'method',						fallback=C.methodTSSS),
				'eval.parallelism'				: config.getint('eval', 'parallelism',				fallback=1),
				'eval.taus'						: [ float(t) for t in config.getlist('eval', 'taus', fallback=[ str(t) for t in C.defaultSweepTaus ]) ],	# type: ignore
				'eval.bestEffort'				: config.getboolean('eval', 'bestEffort',			fallback=False),

				#
				#	Logging
				#

				'logging.enable'				: config.getboolean('logging', 'enable',			fallback=True),
				'logging.enableFileLogging'		: config.getboolean('logging', 'enableFileLogging',	fallback=False),
				'logging.file'					: config.get('logging', 'file',						fallback='./logs/tsss.log'),
				'logging.level'					: config.get('logging', 'level',					fallback='info'),
				'logging.size'					: config.getint('logging', 'size',					fallback=100000),
				'logging.count'					: config.getint('logging', 'count',					fallback=10),		# Number of log files
			}

		except Exception as e:	# about when findings errors in configuration
			_errConsole.print('Error in configuration file: %s - %s' % (configfile, str(e)))
			return False

		# Reject unknown sections and keys before doing any work
		known = { k.lower() for k in Configuration._configuration.keys() }
		for key in config.defaults().keys():
			_errConsole.print('Configuration Error: Unknown key [DEFAULT]:%s' % key)
			return False
		for section in config.sections():
			for option in config.options(section):
				if ('%s.%s' % (section, option)).lower() not in known:
					_errConsole.print('Configuration Error: Unknown key [%s]:%s' % (section, option))
					return False


		# Overrides from the command line
		if argsTau is not None:
			Configuration._configuration['run.tau'] = argsTau
		if argsK is not None:
			Configuration._configuration['run.k'] = argsK
		if argsMaxHops is not None:
			Configuration._configuration['run.maxHops'] = argsMaxHops
		if argsParallelism is not None:
			Configuration._configuration['eval.parallelism'] = argsParallelism
		if argsJudge is not None:
			Configuration._configuration['judge.enable'] = argsJudge
		if argsMethod is not None:
			Configuration._configuration['eval.method'] = argsMethod
		for key, value in argsPaths.items():
			if value is not None:
				Configuration._configuration['paths.%s' % key] = value

		# Log level, the command line overrides the file. "off" disables logging
		logLevel = (argsLoglevel or Configuration._configuration['logging.level']).lower()
		if logLevel == 'off':
			Configuration._configuration['logging.enable'] = False
		Configuration._configuration['logging.level'] = _logLevels.get(logLevel, logging.DEBUG)

		# Derived paths
		if len(Configuration._configuration['paths.store']) == 0:
			Configuration._configuration['paths.store'] = Configuration._configuration['paths.index'] + '.passages.json'


		#
		#	Some sanity and validity checks
		#

		if (err := Configuration.validate()) is not None:
			_errConsole.print('Configuration Error: %s' % err)
			return False

		# Everything is fine
		return True


	@staticmethod
	def validate() -> Optional[str]:
		""" Check value ranges. Return an error message or None. """
		cfg = Configuration._configuration
		if not -1.0 <= cfg['run.tau'] <= 1.0:
			return '[run]:tau must be in [-1, 1]: %s' % cfg['run.tau']
		for key in [ 'run.k', 'run.maxHops', 'eval.parallelism', 'baselines.maxIterations', 'baselines.iterRetGenRounds',
					 'run.maxNewTokensSubquery', 'run.maxNewTokensResponse', 'run.maxNewTokensFinal', 'embedding.batchSize', 'embedding.dim' ]:
			if cfg[key] < 1:
				return '%s must be >= 1: %s' % (key, cfg[key])
		for key in [ 'embedding.retries', 'llm.retries', 'judge.retries' ]:
			if cfg[key] < 0:
				return '%s must be >= 0: %s' % (key, cfg[key])
		if cfg['embedding.backend'] not in [ 'hash', 'http' ]:
			return 'unknown [embedding]:backend: %s' % cfg['embedding.backend']
		for section in [ 'llm', 'judge' ]:
			if cfg['%s.backend' % section] not in [ 'http', 'scripted' ]:
				return 'unknown [%s]:backend: %s' % (section, cfg['%s.backend' % section])
			if cfg['%s.mode' % section] not in [ 'completions', 'chat' ]:
				return 'unknown [%s]:mode: %s' % (section, cfg['%s.mode' % section])
		if cfg['llm.tokenizer'] not in [ 'whitespace', 'backend' ]:
			return 'unknown [llm]:tokenizer: %s' % cfg['llm.tokenizer']
		if cfg['eval.method'] not in C.methods:
			return 'unknown [eval]:method: %s' % cfg['eval.method']
		if any(not -1.0 <= t <= 1.0 for t in cfg['eval.taus']):
			return '[eval]:taus must be in [-1, 1]: %s' % cfg['eval.taus']
		return None


	@staticmethod
	def print() -> str:
		result = 'Configuration:\n'
		for kv in Configuration._configuration.items():
			result += '  %s = %s\n' % kv
		return result


	@staticmethod
	def all() -> Dict[str, Any]:
		return Configuration._configuration


	@staticmethod
	def get(key: str) -> Any:
		if not Configuration.has(key):
			return None
		return Configuration._configuration[key]


	@staticmethod
	def has(key: str) -> bool:
		return key in Configuration._configuration
