"""Dense search with the offline hashing embedder, and the two-stage hybrid search."""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from acr.corpus import ChunkingConfig, chunk_corpus, load_corpus
from acr.dense import build_vector_index, load_vector_index, save_vector_index, search_dense
from acr.hybrid import HybridConfig, search_hybrid
from acr.lexical import build_lexical_index
from acr.providers import StubEmbedder
from acr.stubs import data_path

chunks = chunk_corpus(load_corpus(data_path("corpus.jsonl")), ChunkingConfig())

# hashes each token into one of 64 signed slots; swap in HttpEmbedder for a real model
embedder = StubEmbedder(64)
vectors = build_vector_index(chunks, embedder)
print(f"vector index: {len(vectors)} rows of dim {vectors.dim}, {vectors.matrix.dtype}")
print("row norms:", np.round(np.linalg.norm(vectors.matrix, axis=1)[:5], 6))

query = "power saving mode for IoT devices"
print(f"\ndense hits for {query!r}")
for cid, score in search_dense(vectors, query, embedder, 5):
    print(f"  {score:.4f} {cid}")

# save and reload: the binary file carries a checksum
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "vectors.bin"
    save_vector_index(vectors, path)
    again = load_vector_index(path)
    print(f"\nround trip bit-exact: {np.array_equal(again.matrix, vectors.matrix)} ({path.stat().st_size} bytes)")

# lexical shortlist first, then dense re-rank of that shortlist only
lexical = build_lexical_index(chunks)
for cfg in (HybridConfig(coarse_k=5, final_k=3), HybridConfig(coarse_k=5, final_k=3, lexical_weight=0.5)):
    print(f"\nhybrid coarse_k={cfg.coarse_k} lexical_weight={cfg.lexical_weight}")
    for cid, score in search_hybrid(lexical, vectors, embedder, query, cfg):
        print(f"  {score:.4f} {cid}")
