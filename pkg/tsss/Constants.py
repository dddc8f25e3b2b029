#
#	Constants.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Various engine constants: result codes, defaults and fixed names
#

class Constants(object):

	# Result codes

	rcOK							= 0
	rcEmptyInput					= 1001
	rcZeroVector					= 1002
	rcDimensionMismatch				= 1003
	rcDuplicateId					= 1004
	rcInvalidArgument				= 1005
	rcSchemaViolation				= 1006
	rcEmptyHits						= 1007

	rcIOFailure						= 2001
	rcFormatVersionMismatch			= 2002
	rcChecksumMismatch				= 2003
	rcBadFormat						= 2004
	rcEmbeddingClientMismatch		= 2005
	rcAlreadyExists					= 2006
	rcTemplateMissing				= 2007

	rcBackendUnreachable			= 3001
	rcTimeout						= 3002
	rcBackendError					= 3003
	rcScriptExhausted				= 3004
	rcUnparseableVerdict			= 3005

	rcConfigurationError			= 4001
	rcInternalError					= 5000


	# Exit codes of the command line interface

	exitSuccess						= 0
	exitRunError					= 1
	exitUsageError					= 2


	# Run defaults. tau from the terminator, k and hop cap from the iterative setup

	defaultTau						= 0.85
	defaultK						= 3
	defaultMaxHops					= 10
	defaultMaxIterations			= 10
	defaultIterRetGenRounds			= 3
	defaultSweepTaus				= [ 0.8, 0.85, 0.9 ]

	defaultMaxNewTokensSubquery		= 64
	defaultMaxNewTokensResponse		= 128
	defaultMaxNewTokensFinal		= 64
	defaultMaxNewTokensJudge		= 8


	# Stop sequences per slot type

	stopSubquery					= [ '\n' ]
	stopResponse					= [ '\n\n' ]
	stopFinal						= [ '\n' ]
	stopJudge						= [ '\n' ]


	# Index file

	indexMagic						= b'TSSSIDX\x00'
	indexVersion					= 1


	# Methods

	methodTSSS						= 'tsss'
	methodNoRAG						= 'no_rag'
	methodStandardRAG				= 'standard_rag'
	methodSelfAsk					= 'self_ask'
	methodIterRetGen				= 'iter_retgen'
	methodIRCoT						= 'ircot'
	methods							= [ methodTSSS, methodNoRAG, methodStandardRAG, methodSelfAsk, methodIterRetGen, methodIRCoT ]


	# Block separator between hop blocks: exactly one blank line

	blockSeparator					= '\n\n'
