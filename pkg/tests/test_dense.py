from __future__ import annotations

import random

import numpy as np
import pytest

from acr.corpus import Chunk
from acr.dense import (
    VectorIndexError,
    build_vector_index,
    load_vector_index,
    save_vector_index,
    search_dense,
)
from acr.providers import ProviderError, StubEmbedder, stub_embed
from oracles import full_scan, make_vocab, random_chunks


def chunk(cid, text):
    return Chunk(cid, cid, 0, 0, len(text), text)


@pytest.fixture()
def small_index():
    chunks = [chunk("a", "handover interruption"), chunk("b", "paging cycle"), chunk("c", "handover interruption")]
    return chunks, build_vector_index(chunks, StubEmbedder(64))


def test_rows_are_stub_vectors(small_index):
    chunks, idx = small_index
    assert idx.matrix.shape == (3, 64)
    assert idx.matrix.dtype == np.float32
    for row, c in zip(idx.matrix, chunks):
        np.testing.assert_array_equal(row, stub_embed(c.text).astype(np.float32))
    np.testing.assert_array_equal(idx.matrix[0], idx.matrix[2])


def test_empty_index_keeps_dim():
    idx = build_vector_index([], StubEmbedder(48))
    assert idx.matrix.shape == (0, 48)
    assert search_dense(idx, "x", StubEmbedder(48)) == []


def test_self_match_first(small_index):
    _, idx = small_index
    top = search_dense(idx, "paging cycle", StubEmbedder(64), k=1)
    assert top[0][0] == "b"
    assert top[0][1] == pytest.approx(1.0, abs=1e-6)


def test_zero_query_returns_first_ids(small_index):
    _, idx = small_index
    assert search_dense(idx, "", StubEmbedder(64), k=2) == [("a", 0.0), ("b", 0.0)]


def test_provider_mismatch_rejected(small_index):
    _, idx = small_index
    with pytest.raises(ValueError, match="does not match"):
        search_dense(idx, "x", StubEmbedder(32))


def test_matches_full_scan_oracle():
    rng = random.Random(5)
    chunks = random_chunks(rng, 300, make_vocab(rng, 60))
    idx = build_vector_index(chunks, StubEmbedder(64))
    for _ in range(10):
        query = " ".join(rng.choice(make_vocab(rng, 60)) for _ in range(3)) + " " + rng.choice(chunks).text
        assert search_dense(idx, query, StubEmbedder(64), 10) == full_scan(chunks, query, 64, 10)


def test_round_trip_bit_exact(tmp_path, small_index):
    _, idx = small_index
    save_vector_index(idx, tmp_path / "vectors")
    loaded = load_vector_index(tmp_path / "vectors", provider_id=idx.provider_id)
    assert loaded.chunk_ids == idx.chunk_ids
    assert loaded.matrix.tobytes() == idx.matrix.tobytes()


def test_bad_magic(tmp_path, small_index):
    _, idx = small_index
    path = tmp_path / "vectors"
    save_vector_index(idx, path)
    path.write_bytes(b"NOPE" + path.read_bytes()[4:])
    with pytest.raises(VectorIndexError, match="bad magic"):
        load_vector_index(path)


def test_truncated_matrix_names_byte_counts(tmp_path, small_index):
    _, idx = small_index
    path = tmp_path / "vectors"
    save_vector_index(idx, path)
    header = 16
    path.write_bytes(path.read_bytes()[: header + 100])
    with pytest.raises(VectorIndexError, match=f"expected {3 * 64 * 4} bytes, got 100"):
        load_vector_index(path)


def test_corrupted_payload_fails_checksum(tmp_path, small_index):
    _, idx = small_index
    path = tmp_path / "vectors"
    save_vector_index(idx, path)
    data = bytearray(path.read_bytes())
    data[20] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(VectorIndexError, match="checksum"):
        load_vector_index(path)


class FailingEmbedder:
    provider_id = "broken"
    dim = 4

    def embed(self, texts):
        raise ProviderError("boom")


def test_provider_failure_names_chunks():
    with pytest.raises(ProviderError, match="a..a"):
        build_vector_index([chunk("a", "x")], FailingEmbedder())


class WobblyEmbedder:
    provider_id = "wobbly"
    dim = None

    def __init__(self):
        self.calls = 0

    def embed(self, texts):
        self.calls += 1
        return np.ones((len(texts), 4 if self.calls == 1 else 5))


def test_dimension_change_rejected():
    chunks = [chunk(f"c{i}", "x") for i in range(3)]
    with pytest.raises(ValueError, match="dimension"):
        build_vector_index(chunks, WobblyEmbedder(), batch_size=2)
