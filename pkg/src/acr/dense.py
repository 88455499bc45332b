"""Flat (exhaustive) cosine search over unit-norm chunk embeddings, with a binary file format."""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Chunk
from .providers import Embedder, ProviderError

MAGIC = b"ACRV"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


class VectorIndexError(ValueError):
    pass


@dataclass
class VectorIndex:
    dim: int
    chunk_ids: list[str]
    matrix: np.ndarray  # float32, shape (n, dim)
    provider_id: str
    _columns: np.ndarray | None = field(default=None, repr=False, compare=False)
    _positions: dict[str, int] | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.chunk_ids)

    def columns(self) -> np.ndarray:
        """float64 copy of the matrix laid out one dimension per row, for the scoring loop."""
        if self._columns is None:
            self._columns = np.ascontiguousarray(self.matrix.T, dtype=np.float64)
        return self._columns

    def row_of(self, chunk_id: str) -> int:
        if self._positions is None:
            self._positions = {cid: i for i, cid in enumerate(self.chunk_ids)}
        return self._positions[chunk_id]


def build_vector_index(chunks: Sequence[Chunk], embedder: Embedder, batch_size: int = 32) -> VectorIndex:
    ids = [c.chunk_id for c in chunks]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate chunk_id in chunk list")
    rows = []
    dim = embedder.dim
    for start in range(0, len(chunks), batch_size):
        batch = chunks[start:start + batch_size]
        try:
            vecs = np.asarray(embedder.embed([c.text for c in batch]))
        except ProviderError as exc:
            raise ProviderError(
                f"embedding failed for chunks {batch[0].chunk_id}..{batch[-1].chunk_id}: {exc}", exc.status
            ) from exc
        if vecs.shape[0] != len(batch):
            raise ProviderError(f"embedder returned {vecs.shape[0]} rows for {len(batch)} texts")
        if dim is None:
            dim = vecs.shape[1]
        if vecs.shape[1] != dim:
            raise ValueError(
                f"dimension {vecs.shape[1]} at chunk {batch[0].chunk_id} differs from index dimension {dim}"
            )
        rows.append(vecs)
    dim = dim or 0
    matrix = np.vstack(rows).astype(np.float32) if rows else np.zeros((0, dim), dtype=np.float32)
    return VectorIndex(dim=dim, chunk_ids=ids, matrix=matrix, provider_id=embedder.provider_id)


def score_rows(index: VectorIndex, query_vec: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
    """Dot products of ``query_vec`` with index rows, summed over dimensions in ascending order."""
    cols = index.columns()
    if rows is not None:
        cols = cols[:, rows]
    q = np.asarray(query_vec, dtype=np.float64)
    if cols.shape[1] == 0 or index.dim == 0:
        return np.zeros(cols.shape[1])
    scores = cols[0] * q[0]
    for j in range(1, index.dim):
        scores += cols[j] * q[j]
    return scores


def rank(chunk_ids: Sequence[str], scores: np.ndarray, k: int) -> list[tuple[str, float]]:
    n = len(chunk_ids)
    if n > k:
        kth = np.partition(scores, n - k)[n - k]
        candidates = np.flatnonzero(scores >= kth).tolist()
    else:
        candidates = range(n)
    order = sorted(candidates, key=lambda i: (-scores[i], chunk_ids[i]))
    return [(chunk_ids[i], float(scores[i])) for i in order[:k]]


def embed_query(index: VectorIndex, query: str, embedder: Embedder) -> np.ndarray:
    if embedder.provider_id != index.provider_id:
        raise ValueError(
            f"query embedder {embedder.provider_id!r} does not match index provider {index.provider_id!r}"
        )
    return np.asarray(embedder.embed([query]))[0]


def search_dense(index: VectorIndex, query: str, embedder: Embedder, k: int = 10) -> list[tuple[str, float]]:
    """Exhaustive cosine top-k; ties are broken by ascending chunk_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = embed_query(index, query, embedder)
    return rank(index.chunk_ids, score_rows(index, q), k)


def save_vector_index(index: VectorIndex, path: str | Path) -> None:
    matrix = np.ascontiguousarray(index.matrix, dtype="<f4")
    payload = bytearray(_HEADER.pack(MAGIC, VERSION, len(index.chunk_ids), index.dim))
    payload += matrix.tobytes()
    payload += "".join(cid + "\n" for cid in index.chunk_ids).encode("utf-8")
    payload += struct.pack("<I", zlib.crc32(payload))
    Path(path).write_bytes(bytes(payload))


def load_vector_index(path: str | Path, provider_id: str = "") -> VectorIndex:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size or data[:4] != MAGIC:
        raise VectorIndexError("bad magic")
    _, version, n, dim = _HEADER.unpack_from(data)
    if version != VERSION:
        raise VectorIndexError(f"unsupported version {version} (expected {VERSION})")
    expected = n * dim * 4
    available = len(data) - _HEADER.size
    if available < expected:
        raise VectorIndexError(f"truncated matrix section: expected {expected} bytes, got {available}")
    if len(data) < _HEADER.size + expected + 4:
        raise VectorIndexError("truncated file: missing checksum")
    body, crc = data[:-4], struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(body) != crc:
        raise VectorIndexError("checksum mismatch")
    start = _HEADER.size
    matrix = np.frombuffer(body, dtype="<f4", count=n * dim, offset=start).reshape(n, dim).astype(np.float32)
    ids_blob = body[start + expected:].decode("utf-8")
    chunk_ids = ids_blob.split("\n")[:-1] if ids_blob else []
    if len(chunk_ids) != n:
        raise VectorIndexError(f"expected {n} chunk ids, found {len(chunk_ids)}")
    return VectorIndex(dim=dim, chunk_ids=chunk_ids, matrix=matrix, provider_id=provider_id)
