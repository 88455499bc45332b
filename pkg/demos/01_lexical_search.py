"""Chunk the bundled telecom corpus, then search it with TF-IDF and Boolean queries."""

from __future__ import annotations

from acr.corpus import ChunkingConfig, chunk_corpus, expected_chunk_count, load_corpus
from acr.lexical import build_lexical_index, eval_boolean, parse_boolean, search_lexical
from acr.stubs import data_path

docs = load_corpus(data_path("corpus.jsonl"))
print(f"{len(docs)} documents")

# small windows so every document splits into several overlapping chunks
cfg = ChunkingConfig(chunk_size=120, overlap=30)
chunks = chunk_corpus(docs, cfg)
first = docs[0]
print(f"{first.doc_id}: {len(first.text)} chars -> {expected_chunk_count(len(first.text), cfg)} chunks")
for c in chunks[:3]:
    print(f"  {c.chunk_id} [{c.char_start}:{c.char_end}] {c.text[:60]!r}")

index = build_lexical_index(chunks)
print(f"\nindexed {index.n_chunks} chunks")

query = "URLLC user plane latency"
print(f"\ntop hits for {query!r}")
for rank, (cid, score) in enumerate(search_lexical(index, query, 5), 1):
    print(f"  {rank}. {score:.4f} {cid}")

# NOT binds tighter than AND, which binds tighter than OR
expr = parse_boolean("latency AND (uplink OR downlink) AND NOT reliability")
print(f"\nBoolean {expr}")
print("  matches:", sorted(eval_boolean(index, expr)))
