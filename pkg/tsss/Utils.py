#
#	Utils.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	This module contains various utilty functions that are used from various
#	modules of the engine.
#

import json, os
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple, Union
from tsss.Constants import Constants as C
from tsss.Types import TSSSError


def iterJSONL(path: Union[str, Path]) -> Iterator[Tuple[int, Dict[str, Any]]]:
	""" Iterate over a JSONL file. Yields (1-based line number, object).
		Blank lines are skipped, but still counted.
	"""
	try:
		with open(path, encoding='utf-8') as f:
			for lineno, line in enumerate(f, start=1):
				if not line.strip():
					continue
				try:
					obj = json.loads(line)
				except json.JSONDecodeError as e:
					raise TSSSError(C.rcSchemaViolation, '%s: line %d: malformed JSON (%s)' % (path, lineno, e.msg))
				if not isinstance(obj, dict):
					raise TSSSError(C.rcSchemaViolation, '%s: line %d: expected a JSON object' % (path, lineno))
				yield lineno, obj
	except OSError as e:
		raise TSSSError(C.rcIOFailure, 'cannot read %s: %s' % (path, e.strerror or str(e)))


def writeJSONL(path: Union[str, Path], records: List[Dict[str, Any]]) -> int:
	""" Write records to a JSONL file. Returns the number of records written. """
	makeParentDirs(path)
	try:
		with open(path, 'w', encoding='utf-8') as f:
			for record in records:
				f.write(toJSON(record, indent=None) + '\n')
	except OSError as e:
		raise TSSSError(C.rcIOFailure, 'cannot write %s: %s' % (path, e.strerror or str(e)))
	return len(records)


def writeText(path: Union[str, Path], text: str) -> None:
	makeParentDirs(path)
	try:
		with open(path, 'w', encoding='utf-8') as f:
			f.write(text)
	except OSError as e:
		raise TSSSError(C.rcIOFailure, 'cannot write %s: %s' % (path, e.strerror or str(e)))


def toJSON(obj: Any, indent: Union[int, None] = 2) -> str:
	""" Serialize with stable field order (insertion order, never sorted). """
	return json.dumps(obj, indent=indent, ensure_ascii=False)


def makeParentDirs(path: Union[str, Path]) -> None:
	if (parent := os.path.dirname(str(path))):
		os.makedirs(parent, exist_ok=True)


def requireString(obj: Dict[str, Any], field: str, path: Union[str, Path], lineno: int, allowEmpty: bool = False) -> str:
	""" Return a string field of a JSONL record or raise a schema violation naming the line. """
	if not isinstance(value := obj.get(field), str) or (not allowEmpty and len(value.strip()) == 0):
		raise TSSSError(C.rcSchemaViolation, '%s: line %d: field "%s" missing or not a non-empty string' % (path, lineno, field))
	return value
