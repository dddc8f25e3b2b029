#
#	conftest.py
#
#	Shared fixtures: deterministic embedder and tokenizer, a small corpus in
#	an in-memory passage store, scripted backends and a fake clock.
#

import os
from typing import Callable, Iterator, List
import pytest
from tsss.Embedding import HashEmbeddingClient
from tsss.LLMClient import ScriptedBackend
from tsss.Retriever import Retriever
from tsss.Storage import Passage, PassageStore
from tsss.TemplateEngine import Templates
from tsss.Tokenizer import WhitespaceTokenizer
from tsss.VectorIndex import VectorIndex, buildIndex


goldenDirectory = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'golden')

corpus = [
	Passage('p01', 'Inception', 'Inception is a 2010 science fiction film written and directed by Christopher Nolan.'),
	Passage('p02', 'Christopher Nolan', 'Christopher Nolan is a British and American filmmaker born in London in 1970.'),
	Passage('p03', 'London', 'London is the capital and largest city of England and the United Kingdom.'),
	Passage('p04', 'Jaws', 'Jaws is a 1975 thriller film directed by Steven Spielberg.'),
	Passage('p05', 'Steven Spielberg', 'Steven Spielberg is an American filmmaker born in Cincinnati, Ohio in 1946.'),
	Passage('p06', 'Cincinnati', 'Cincinnati is a city in the state of Ohio on the northern side of the Ohio River.'),
	Passage('p07', 'The Hobbit', 'The Hobbit is a children\'s fantasy novel by J. R. R. Tolkien, published in 1937.'),
	Passage('p08', 'J. R. R. Tolkien', 'John Ronald Reuel Tolkien was an English writer born in Bloemfontein.'),
	Passage('p09', 'Bloemfontein', 'Bloemfontein is the capital city of the province of Free State of South Africa.'),
	Passage('p10', 'Ohio River', 'The Ohio River is a 981-mile long river in the United States.'),
	Passage('p11', 'Free State', 'The Free State is a province of South Africa.'),
	Passage('p12', 'England', 'England is a country that is part of the United Kingdom.'),
]


@pytest.fixture(autouse=True)
def defaultTemplates() -> Iterator[None]:
	Templates.setDirectory(None)
	yield
	Templates.setDirectory(None)


@pytest.fixture
def embedder() -> HashEmbeddingClient:
	return HashEmbeddingClient(128, 7)


@pytest.fixture
def tokenizer() -> WhitespaceTokenizer:
	return WhitespaceTokenizer()


@pytest.fixture
def passages() -> List[Passage]:
	return list(corpus)


@pytest.fixture
def store(passages: List[Passage]) -> Iterator[PassageStore]:
	store = PassageStore()
	store.insertPassages(passages)
	yield store
	store.close()


@pytest.fixture
def index(passages: List[Passage], embedder: HashEmbeddingClient) -> VectorIndex:
	return buildIndex(passages, embedder)


@pytest.fixture
def retriever(index: VectorIndex, store: PassageStore, embedder: HashEmbeddingClient) -> Retriever:
	return Retriever(index, store, embedder)


@pytest.fixture
def scripted(tokenizer: WhitespaceTokenizer) -> Callable[[List[str]], ScriptedBackend]:
	def make(responses: List[str]) -> ScriptedBackend:
		return ScriptedBackend(responses, tokenizer)
	return make


@pytest.fixture
def clock() -> Callable[[], float]:
	""" A clock that advances by 0.5 s on every reading. """
	state = { 'now' : 0.0 }
	def tick() -> float:
		state['now'] += 0.5
		return state['now']
	return tick


def golden(name: str) -> str:
	with open(os.path.join(goldenDirectory, name), encoding='utf-8', newline='') as f:
		return f.read()
