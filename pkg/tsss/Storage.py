#
#	Storage.py
#
#	License: BSD 3-Clause License. See the LICENSE file for further details.
#
#	Store and retrieve corpus passages. Titles and texts are kept in the
#	document database TinyDB next to the binary vector index. It is possible
#	to store passages either on disc or just in memory.
#

from tinydb import TinyDB, Query 				# type: ignore
from tinydb.storages import MemoryStorage		# type: ignore
from dataclasses import dataclass
from threading import Lock
from typing import Dict, List, Optional
from tsss.Constants import Constants as C
from tsss.Logging import Logging
from tsss.Types import TSSSError
from tsss import Utils


@dataclass(frozen=True)
class Passage:
	id: str
	title: str
	text: str


	def embeddingText(self, withTitle: bool = True) -> str:
		""" The text that is embedded for this passage: "title\\ntext" or text only. """
		if withTitle and len(self.title) > 0:
			return '%s\n%s' % (self.title, self.text)
		return self.text


	@property
	def json(self) -> Dict[str, str]:
		return { 'id' : self.id, 'title' : self.title, 'text' : self.text }


def readCorpus(path: str) -> List[Passage]:
	""" Read a JSONL corpus with the fields `id`, `title` and `contents`.
		Malformed lines and duplicate ids are rejected with their line number.
	"""
	passages: List[Passage] = []
	seen: Dict[str, int] = {}
	for lineno, obj in Utils.iterJSONL(path):
		pid = Utils.requireString(obj, 'id', path, lineno)
		title = Utils.requireString(obj, 'title', path, lineno, allowEmpty=True)
		text = Utils.requireString(obj, 'contents', path, lineno)
		if pid in seen:
			raise TSSSError(C.rcDuplicateId, '%s: line %d: duplicate id "%s" (first seen in line %d)' % (path, lineno, pid, seen[pid]))
		seen[pid] = lineno
		passages.append(Passage(pid, title, text))
	if len(passages) == 0:
		raise TSSSError(C.rcEmptyInput, 'corpus is empty: %s' % path)
	Logging.log('Read %d passages from: %s' % (len(passages), path))
	return passages


class PassageStore(object):
	""" TinyDB binding for passages. `path=None` keeps the store in memory. """

	def __init__(self, path: Optional[str] = None) -> None:
		self.path = path
		self.lockPassages = Lock()
		self._cache: Dict[str, Passage] = {}
		try:
			if path is None:
				self.db = TinyDB(storage=MemoryStorage)
			else:
				Utils.makeParentDirs(path)
				self.db = TinyDB(path)
		except (OSError, ValueError) as e:
			raise TSSSError(C.rcIOFailure, 'cannot open passage store %s: %s' % (path, str(e)))
		self.tabPassages = self.db.table('passages')
		Logging.logDebug('Passage store opened: %s' % (path or 'memory'))


	def close(self) -> None:
		with self.lockPassages:
			self.db.close()


	def purge(self) -> None:
		with self.lockPassages:
			self.tabPassages.truncate()
			self._cache.clear()


	def insertPassages(self, passages: List[Passage]) -> None:
		with self.lockPassages:
			self.tabPassages.insert_multiple([ p.json for p in passages ])
			for p in passages:
				self._cache[p.id] = p


	def getPassage(self, pid: str) -> Optional[Passage]:
		with self.lockPassages:
			if (p := self._cache.get(pid)) is not None:
				return p
			if len(docs := self.tabPassages.search(Query().id == pid)) == 0:
				return None
			p = Passage(docs[0]['id'], docs[0]['title'], docs[0]['text'])
			self._cache[pid] = p
			return p


	def getPassages(self, pids: List[str]) -> List[Passage]:
		""" Return the passages in the given order. Unknown ids are an internal error. """
		result = []
		for pid in pids:
			if (p := self.getPassage(pid)) is None:
				raise TSSSError(C.rcInternalError, 'passage missing from store: %s' % pid)
			result.append(p)
		return result


	def count(self) -> int:
		with self.lockPassages:
			return len(self.tabPassages)
