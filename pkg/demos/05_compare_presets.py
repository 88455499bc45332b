"""Score the four retrieval presets on the bundled QA set and print the comparison table."""

from __future__ import annotations

from acr.agent import KnowledgeBase
from acr.corpus import ChunkingConfig, chunk_corpus, load_corpus
from acr.dense import build_vector_index
from acr.evalx import PRESETS, format_table, load_qa, run_comparison, token_f1
from acr.kgraph import load_graph
from acr.lexical import build_lexical_index
from acr.providers import StubEmbedder
from acr.stubs import data_path, stub_stack

print("token F1 example:", token_f1("the serving network collects data", "serving network collects charging data"))

chunks = chunk_corpus(load_corpus(data_path("corpus.jsonl")), ChunkingConfig())
embedder = StubEmbedder(64)
kb = KnowledgeBase.from_chunks(
    chunks,
    lexical=build_lexical_index(chunks),
    vectors=build_vector_index(chunks, embedder),
    embedder=embedder,
    graph=load_graph(data_path("graph.tsv")),
)
qa = load_qa(data_path("qa.jsonl"))
print(f"{len(qa)} questions, presets {list(PRESETS)}\n")

reports = run_comparison(qa, PRESETS, kb, stub_stack(), embedder)
print(format_table(reports))

# per-item rows say which questions each preset got wrong
for report in reports:
    missed = [row["qa_id"] for row in report.rows if not row["correct"]]
    print(f"\n{report.system_id}: missed {len(missed)}", missed[:8])
