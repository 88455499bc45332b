"""Answer one multiple-choice question with the full agentic pipeline and inspect its trace."""

from __future__ import annotations

import json

from acr.agent import KnowledgeBase, PipelineConfig, run_pipeline
from acr.corpus import ChunkingConfig, chunk_corpus, load_corpus
from acr.dense import build_vector_index
from acr.evalx import load_qa
from acr.kgraph import load_graph
from acr.lexical import build_lexical_index
from acr.providers import StubEmbedder
from acr.stubs import data_path, stub_stack

chunks = chunk_corpus(load_corpus(data_path("corpus.jsonl")), ChunkingConfig())
embedder = StubEmbedder(64)
kb = KnowledgeBase.from_chunks(
    chunks,
    lexical=build_lexical_index(chunks),
    vectors=build_vector_index(chunks, embedder),
    embedder=embedder,
    graph=load_graph(data_path("graph.tsv")),
)

# deterministic offline chat model; HttpChat talks to any compatible endpoint instead
llm = stub_stack()
# a paraphrased question: lexical search alone misses it, the lexicon rewrite recovers it
item = next(q for q in load_qa(data_path("qa.jsonl")) if q.qa_id == "P01")
print("question:", item.question)
for label, text in item.options.items():
    print(f"  {label}: {text}")

decision, trace = run_pipeline(item.question, item.options, kb, llm, PipelineConfig())
print(f"\nanswer: {decision.answer_label} ({decision.answer_text}), gold {item.answer_label}")
print(f"confidence {decision.confidence:.2f}")
print("explanation:", decision.explanation)

print("\nreformulated:", trace.reformulated.rewritten)
print("concepts:", trace.reformulated.key_concepts)
for result in trace.per_source:
    print(f"{result.source_id:8} top {[cid for cid, _ in result.ranked[:3]]}")
print("fused top 3:", [(cid, round(s, 4)) for cid, s in trace.fused[:3]])
print(f"evidence: {len(trace.evidence.items)} items, {trace.evidence.total_chars} chars")
print("validation:", [r.verdict for r in trace.rounds], f"refinements={trace.refinements}")
print("\ntrace record keys:", sorted(json.loads(json.dumps(trace.to_record(), default=str))))
