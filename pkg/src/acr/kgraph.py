"""Triple store with entity aliases, neighborhood expansion and triple-to-text evidence."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Chunk
from .lexical import tokenize

KG_DOC_ID = "kg"


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Entity:
    entity_id: str
    name: str
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str


@dataclass
class KnowledgeGraph:
    entities: dict[str, Entity] = field(default_factory=dict)
    triples: list[Triple] = field(default_factory=list)
    adjacency: dict[str, list[int]] = field(default_factory=dict)
    _positions: dict[Triple, int] = field(default_factory=dict, repr=False)
    _names: dict[tuple[str, ...], set[str]] = field(default_factory=dict, repr=False)

    def add_entity(self, entity: Entity) -> None:
        if not entity.name:
            raise GraphError(f"entity {entity.entity_id!r} has an empty name")
        if entity.entity_id in self.entities:
            raise GraphError(f"duplicate entity_id {entity.entity_id!r}")
        self.entities[entity.entity_id] = entity
        self.adjacency.setdefault(entity.entity_id, [])
        for surface in (entity.name, *entity.aliases):
            key = tuple(tokenize(surface))
            if key:
                self._names.setdefault(key, set()).add(entity.entity_id)

    def add_triple(self, triple: Triple) -> int:
        for end in (triple.subject, triple.object):
            if end not in self.entities:
                raise GraphError(f"triple refers to unknown entity {end!r}")
        if not triple.predicate:
            raise GraphError("triple has an empty predicate")
        if triple in self._positions:
            return self._positions[triple]
        idx = len(self.triples)
        self.triples.append(triple)
        self._positions[triple] = idx
        self.adjacency[triple.subject].append(idx)
        if triple.object != triple.subject:
            self.adjacency[triple.object].append(idx)
        return idx

    def position(self, triple: Triple) -> int:
        return self._positions[triple]

    def entities_named(self, surface: str) -> set[str]:
        return self._names.get(tuple(tokenize(surface)), set())


def load_graph(path: str | Path) -> KnowledgeGraph:
    """Read ``E``/``T`` tab-separated records. Entities are registered before any triple is checked."""
    graph = KnowledgeGraph()
    pending: list[tuple[int, Triple]] = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            kind = parts[0]
            if kind == "E" and len(parts) in (3, 4):
                aliases = tuple(a for a in parts[3].split("|") if a) if len(parts) == 4 else ()
                try:
                    graph.add_entity(Entity(parts[1], parts[2], aliases))
                except GraphError as exc:
                    raise GraphError(f"line {lineno}: {exc}") from None
            elif kind == "T" and len(parts) == 4:
                pending.append((lineno, Triple(parts[1], parts[2], parts[3])))
            else:
                raise GraphError(f"line {lineno}: malformed record")
    for lineno, triple in pending:
        try:
            graph.add_triple(triple)
        except GraphError as exc:
            raise GraphError(f"line {lineno}: {exc}") from None
    return graph


def link_entities(graph: KnowledgeGraph, concepts: Iterable[str]) -> list[str]:
    """Entities whose tokenized name or alias equals a tokenized concept, sorted by id."""
    linked: set[str] = set()
    for concept in concepts:
        linked |= graph.entities_named(concept)
    return sorted(linked)


def entity_distances(graph: KnowledgeGraph, seeds: Iterable[str], hops: int) -> dict[str, int]:
    dist: dict[str, int] = {}
    queue: deque[str] = deque()
    for s in seeds:
        if s not in graph.entities:
            raise GraphError(f"unknown seed entity {s!r}")
        if s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        ent = queue.popleft()
        if dist[ent] == hops:
            continue
        for ti in graph.adjacency[ent]:
            t = graph.triples[ti]
            other = t.object if t.subject == ent else t.subject
            if other not in dist:
                dist[other] = dist[ent] + 1
                queue.append(other)
    return dist


def expand_neighborhood(graph: KnowledgeGraph, seeds: Iterable[str], hops: int = 1) -> list[Triple]:
    """Triples whose endpoints both lie within ``hops`` undirected steps of a seed, in file order."""
    if hops < 0:
        raise ValueError("hops must be >= 0")
    dist = entity_distances(graph, seeds, hops)
    return [t for t in graph.triples if t.subject in dist and t.object in dist]


def triple_text(graph: KnowledgeGraph, triple: Triple) -> str:
    subj = graph.entities[triple.subject].name
    obj = graph.entities[triple.object].name
    return f"{subj} {triple.predicate} {obj}."


def triples_to_evidence(graph: KnowledgeGraph, triples: Iterable[Triple]) -> list[Chunk]:
    chunks = []
    for t in triples:
        idx = graph.position(t)
        text = triple_text(graph, t)
        chunks.append(Chunk(f"{KG_DOC_ID}#{idx}", KG_DOC_ID, idx, 0, len(text), text))
    return chunks
