#
#	test_vectorindex.py
#
#	Exact top-k search against a brute-force scan, ordering, persistence.
#

import os
import numpy as np
import pytest
from tsss.Constants import Constants as C
from tsss.Embedding import HashEmbeddingClient, embedOne
from tsss.Storage import Passage
from tsss.Types import TSSSError
from tsss.VectorIndex import VectorIndex, buildIndex, loadIndex, saveIndex, search


def bruteForce(vectors: np.ndarray, ids: list, query: np.ndarray, k: int) -> list:
	q = query / np.linalg.norm(query)
	scored = [ (float(np.sum(vectors[i] * q)), ids[i]) for i in range(len(ids)) ]
	scored.sort(key=lambda s: (-s[0], s[1]))
	return scored[:k]


def randomIndex(rng: np.random.Generator, n: int, dim: int, duplicates: int = 0) -> VectorIndex:
	vectors = rng.standard_normal((n, dim))
	for _ in range(duplicates):				# exact ties
		vectors[rng.integers(n)] = vectors[rng.integers(n)]
	vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
	ids = [ 'id%04d' % i for i in rng.permutation(n) ]
	return VectorIndex(ids, vectors, 'test')


class TestSearch:

	def test_matches_brute_force_on_random_corpora(self) -> None:
		rng = np.random.default_rng(42)
		for _ in range(100):
			n, dim = int(rng.integers(1, 257)), int(rng.integers(1, 65))
			index = randomIndex(rng, n, dim, duplicates=int(rng.integers(0, 4)))
			for k in [ 1, 3, int(rng.integers(1, 300)) ]:
				query = rng.standard_normal(dim) * float(rng.uniform(0.1, 10.0))
				hits = search(index, query, k)
				expected = bruteForce(index.vectors, index.ids, query, k)
				assert [ h.passageId for h in hits ] == [ e[1] for e in expected ]
				assert all(abs(h.score - e[0]) < 1e-12 for h, e in zip(hits, expected))
				assert [ h.rank for h in hits ] == list(range(1, len(hits) + 1))


	def test_ties_broken_by_ascending_id(self) -> None:
		v = np.array([ [ 1.0, 0.0 ], [ 1.0, 0.0 ], [ 0.0, 1.0 ], [ 1.0, 0.0 ] ])
		index = VectorIndex([ 'c', 'a', 'z', 'b' ], v, 'test')
		hits = search(index, np.array([ 1.0, 0.0 ]), 4)
		assert [ h.passageId for h in hits ] == [ 'a', 'b', 'c', 'z' ]
		assert hits[0].score == hits[1].score == hits[2].score


	def test_self_similarity(self, passages: list, embedder: HashEmbeddingClient) -> None:
		index = buildIndex(passages, embedder)
		query = embedOne(embedder, passages[4].embeddingText())
		hits = search(index, query, 3)
		assert hits[0].passageId == passages[4].id
		assert abs(hits[0].score - 1.0) < 1e-6


	def test_k_larger_than_corpus(self, passages: list, embedder: HashEmbeddingClient) -> None:
		index = buildIndex(passages[:10], embedder)
		assert len(search(index, embedOne(embedder, 'anything'), 100)) == 10


	def test_scale_invariance(self) -> None:
		rng = np.random.default_rng(1)
		index = randomIndex(rng, 50, 8)
		query = rng.standard_normal(8)
		a = search(index, query, 5)
		b = search(index, query * 123.0, 5)
		assert [ h.passageId for h in a ] == [ h.passageId for h in b ]
		assert all(abs(x.score - y.score) < 1e-12 for x, y in zip(a, b))


	def test_repeated_calls_identical(self) -> None:
		index = randomIndex(np.random.default_rng(2), 30, 16)
		query = np.random.default_rng(3).standard_normal(16)
		assert search(index, query, 7) == search(index, query, 7)


	def test_dimension_mismatch(self) -> None:
		index = randomIndex(np.random.default_rng(4), 5, 8)
		with pytest.raises(TSSSError) as e:
			search(index, np.ones(4), 3)
		assert e.value.rc == C.rcDimensionMismatch


	def test_invalid_k(self) -> None:
		index = randomIndex(np.random.default_rng(4), 5, 8)
		with pytest.raises(TSSSError):
			search(index, np.ones(8), 0)


class TestBuildIndex:

	def test_records_count_and_dim(self, passages: list, embedder: HashEmbeddingClient) -> None:
		index = buildIndex(passages, embedder, batchSize=5)
		assert index.count == len(passages)
		assert index.dim == embedder.dim
		assert index.clientId == embedder.identifier
		assert np.allclose(np.linalg.norm(index.vectors, axis=1), 1.0)


	def test_duplicate_ids(self, embedder: HashEmbeddingClient) -> None:
		with pytest.raises(TSSSError) as e:
			buildIndex([ Passage('x', 't', 'one'), Passage('x', 't', 'two') ], embedder)
		assert e.value.rc == C.rcDuplicateId


	def test_empty(self, embedder: HashEmbeddingClient) -> None:
		with pytest.raises(TSSSError) as e:
			buildIndex([], embedder)
		assert e.value.rc == C.rcEmptyInput


	def test_title_in_embedding_text(self, embedder: HashEmbeddingClient) -> None:
		p = Passage('x', 'Title', 'Body text')
		withTitle = buildIndex([ p ], embedder, embedTitle=True)
		withoutTitle = buildIndex([ p ], embedder, embedTitle=False)
		assert np.allclose(withTitle.vectors[0], embedOne(embedder, 'Title\nBody text'))
		assert np.allclose(withoutTitle.vectors[0], embedOne(embedder, 'Body text'))


class TestPersistence:

	def test_round_trip_bit_identical(self, tmp_path: str) -> None:
		rng = np.random.default_rng(9)
		index = randomIndex(rng, 200, 32, duplicates=3)
		path = os.path.join(str(tmp_path), 'index.bin')
		saveIndex(index, path)
		loaded = loadIndex(path)
		assert loaded.ids == index.ids
		assert loaded.clientId == 'test'
		assert np.array_equal(loaded.vectors, index.vectors)
		for _ in range(20):
			query = rng.standard_normal(32)
			assert search(loaded, query, 10) == search(index, query, 10)


	def test_unicode_ids(self, tmp_path: str) -> None:
		index = VectorIndex([ 'Zürich', '東京' ], np.eye(2), 'hash-2-0')
		path = os.path.join(str(tmp_path), 'index.bin')
		saveIndex(index, path)
		assert loadIndex(path, 'hash-2-0').ids == [ 'Zürich', '東京' ]


	def test_checksum_mismatch(self, tmp_path: str) -> None:
		path = os.path.join(str(tmp_path), 'index.bin')
		saveIndex(randomIndex(np.random.default_rng(5), 10, 4), path)
		with open(path, 'r+b') as f:
			f.seek(-3, os.SEEK_END)
			f.write(b'\xff')
		with pytest.raises(TSSSError) as e:
			loadIndex(path)
		assert e.value.rc == C.rcChecksumMismatch


	def test_version_mismatch(self, tmp_path: str) -> None:
		path = os.path.join(str(tmp_path), 'index.bin')
		saveIndex(randomIndex(np.random.default_rng(5), 10, 4), path)
		with open(path, 'r+b') as f:
			f.seek(len(C.indexMagic))
			f.write((C.indexVersion + 1).to_bytes(2, 'little'))
		with pytest.raises(TSSSError) as e:
			loadIndex(path)
		assert e.value.rc == C.rcFormatVersionMismatch


	def test_not_an_index(self, tmp_path: str) -> None:
		path = os.path.join(str(tmp_path), 'index.bin')
		with open(path, 'wb') as f:
			f.write(b'definitely not an index file')
		with pytest.raises(TSSSError) as e:
			loadIndex(path)
		assert e.value.rc == C.rcBadFormat


	def test_client_mismatch(self, tmp_path: str) -> None:
		path = os.path.join(str(tmp_path), 'index.bin')
		saveIndex(randomIndex(np.random.default_rng(5), 10, 4), path)
		with pytest.raises(TSSSError) as e:
			loadIndex(path, 'hash-4-1')
		assert e.value.rc == C.rcEmbeddingClientMismatch


	def test_missing_file(self, tmp_path: str) -> None:
		with pytest.raises(TSSSError) as e:
			loadIndex(os.path.join(str(tmp_path), 'missing.bin'))
		assert e.value.rc == C.rcIOFailure
