"""Link query concepts to graph entities and turn their neighbourhood into evidence."""

from __future__ import annotations

from acr.agent import extract_concepts
from acr.kgraph import entity_distances, expand_neighborhood, link_entities, load_graph, triples_to_evidence
from acr.stubs import data_path

graph = load_graph(data_path("graph.tsv"))
print(f"{len(graph.entities)} entities, {len(graph.triples)} triples")

query = "How long is the interruption during a DAPS handover?"
concepts = extract_concepts(query)
print("concepts:", concepts)

seeds = link_entities(graph, concepts)
print("linked entities:", seeds)

for hops in (0, 1, 2):
    triples = expand_neighborhood(graph, seeds, hops)
    print(f"\nhops={hops}: {len(triples)} triples, distances {entity_distances(graph, seeds, hops)}")
    for chunk in triples_to_evidence(graph, triples)[:4]:
        print(f"  {chunk.chunk_id}: {chunk.text}")
