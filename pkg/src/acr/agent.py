"""Agentic contextual retrieval: reformulate, retrieve from several sources, aggregate, decide and self-validate."""

from __future__ import annotations

import logging
import math
import re
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Mapping, Protocol, Sequence

from .corpus import Chunk
from .dense import VectorIndex, search_dense
from .hybrid import HybridConfig, search_hybrid
from .kgraph import KnowledgeGraph, entity_distances, link_entities, triples_to_evidence
from .lexical import LexicalIndex, search_lexical, tokenize
from .providers import ChatMessage, ChatProvider, ChatRequest, Embedder, ProviderError

logger = logging.getLogger(__name__)

DEFAULT_STOPLIST = frozenset(
    """a an the and or of to in on for with by at from is are was be it this that as
    what which how i need do does can""".split()
)

Ranked = list[tuple[str, float]]


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class DecisionError(ValueError):
    """The decision provider's reply could not be turned into a Decision."""


@dataclass
class ReformulatedQuery:
    original: str
    rewritten: str
    key_concepts: list[str] = field(default_factory=list)


@dataclass
class RetrievalSourceResult:
    source_id: str
    ranked: Ranked = field(default_factory=list)
    error: str | None = None


@dataclass
class EvidenceItem:
    chunk_id: str
    text: str
    fused_score: float
    sources: list[str] = field(default_factory=list)


@dataclass
class EvidenceBundle:
    items: list[EvidenceItem] = field(default_factory=list)
    total_chars: int = 0
    condensed: bool = False

    def render(self) -> str:
        return "\n".join(item.text for item in self.items)


@dataclass
class Decision:
    answer_label: str | None
    answer_text: str
    explanation: str
    confidence: float


@dataclass
class ValidationRound:
    decision: Decision
    verdict: str  # ACCEPT, REVISE, SKIPPED or ERROR
    critique: str = ""
    error: str = ""


@dataclass
class PipelineConfig:
    sources: tuple[str, ...] = ("lexical", "dense", "kgraph")
    k_per_source: int = 10
    rrf_k: float = 60.0
    evidence_budget_chars: int = 6000
    confidence_threshold: float = 0.7
    max_refinements: int = 2
    hops: int = 1
    reformulate: bool = True
    self_validate: bool = True
    condense: bool = True
    # False runs the no-retrieval baseline: decide straight from the question
    retrieval: bool = True
    allow_fallback: bool = True
    hybrid: HybridConfig = field(default_factory=HybridConfig)

    def __post_init__(self) -> None:
        self.sources = tuple(self.sources)
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must lie in [0, 1]")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")
        if self.k_per_source < 1:
            raise ValueError("k_per_source must be >= 1")


@dataclass
class PipelineTrace:
    query: str
    options: dict[str, str] | None
    reformulated: ReformulatedQuery | None = None
    per_source: list[RetrievalSourceResult] = field(default_factory=list)
    fused: Ranked = field(default_factory=list)
    evidence: EvidenceBundle | None = None
    rounds: list[ValidationRound] = field(default_factory=list)
    refinements: int = 0
    flags: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def to_record(self, include_timings: bool = True) -> dict[str, Any]:
        record = asdict(self)
        if not include_timings:
            record.pop("timings")
        return record


# Retrieval sources


class RetrievalSource(Protocol):
    source_id: str

    def retrieve(self, rq: ReformulatedQuery, k: int) -> Ranked: ...


class LexicalSource:
    source_id = "lexical"

    def __init__(self, index: LexicalIndex):
        self.index = index

    def retrieve(self, rq: ReformulatedQuery, k: int) -> Ranked:
        return search_lexical(self.index, rq.rewritten, k)


class DenseSource:
    source_id = "dense"

    def __init__(self, index: VectorIndex, embedder: Embedder):
        self.index = index
        self.embedder = embedder

    def retrieve(self, rq: ReformulatedQuery, k: int) -> Ranked:
        return search_dense(self.index, rq.rewritten, self.embedder, k)


class HybridSource:
    source_id = "hybrid"

    def __init__(self, lex: LexicalIndex, vec: VectorIndex, embedder: Embedder, cfg: HybridConfig):
        self.lex, self.vec, self.embedder, self.cfg = lex, vec, embedder, cfg

    def retrieve(self, rq: ReformulatedQuery, k: int) -> Ranked:
        cfg = HybridConfig(self.cfg.coarse_k, k, self.cfg.lexical_weight)
        return search_hybrid(self.lex, self.vec, self.embedder, rq.rewritten, cfg)


class GraphSource:
    """Links key concepts to entities and returns the surrounding triples as evidence.

    Triples touching a seed directly score 1.0, those found one step further 0.5,
    and so on; equal scores keep file order.
    """

    source_id = "kgraph"

    def __init__(self, graph: KnowledgeGraph, hops: int = 1):
        self.graph = graph
        self.hops = hops
        self.chunks = {c.chunk_id: c for c in triples_to_evidence(graph, graph.triples)}

    def retrieve(self, rq: ReformulatedQuery, k: int) -> Ranked:
        seeds = link_entities(self.graph, rq.key_concepts)
        if not seeds:
            return []
        dist = entity_distances(self.graph, seeds, self.hops)
        scored = []
        for i, t in enumerate(self.graph.triples):
            if t.subject in dist and t.object in dist:
                near = min(dist[t.subject], dist[t.object])
                scored.append((f"kg#{i}", 1.0 / (1 + near)))
        scored.sort(key=lambda item: -item[1])
        return scored[:k]


@dataclass
class KnowledgeBase:
    """Everything a pipeline run may retrieve from."""

    chunks: dict[str, Chunk] = field(default_factory=dict)
    lexical: LexicalIndex | None = None
    vectors: VectorIndex | None = None
    embedder: Embedder | None = None
    graph: KnowledgeGraph | None = None
    custom_sources: list[RetrievalSource] = field(default_factory=list)

    @classmethod
    def from_chunks(cls, chunks: Iterable[Chunk], **kwargs) -> "KnowledgeBase":
        return cls(chunks={c.chunk_id: c for c in chunks}, **kwargs)

    def build_sources(self, cfg: PipelineConfig) -> tuple[list[RetrievalSource], dict[str, str]]:
        sources: list[RetrievalSource] = []
        lookup = {c.chunk_id: c.text for c in self.chunks.values()}
        custom = {s.source_id: s for s in self.custom_sources}
        for sid in cfg.sources:
            if sid == "lexical":
                _require(self.lexical, sid, "a lexical index")
                sources.append(LexicalSource(self.lexical))
            elif sid == "dense":
                _require(self.vectors, sid, "a vector index")
                _require(self.embedder, sid, "an embedder")
                sources.append(DenseSource(self.vectors, self.embedder))
            elif sid == "hybrid":
                _require(self.lexical, sid, "a lexical index")
                _require(self.vectors, sid, "a vector index")
                _require(self.embedder, sid, "an embedder")
                sources.append(HybridSource(self.lexical, self.vectors, self.embedder, cfg.hybrid))
            elif sid == "kgraph":
                _require(self.graph, sid, "a knowledge graph")
                src = GraphSource(self.graph, cfg.hops)
                lookup.update({cid: c.text for cid, c in src.chunks.items()})
                sources.append(src)
            elif sid in custom:
                src = custom[sid]
                lookup.update(getattr(src, "texts", {}))
                sources.append(src)
            else:
                raise ValueError(f"unknown source {sid!r}")
        return sources, lookup


def _require(value: object, source_id: str, what: str) -> None:
    if value is None:
        raise ValueError(f"source {source_id!r} requested but no {what} was supplied")


# Step A: query understanding


def extract_concepts(query: str, index: LexicalIndex | None = None, limit: int = 5) -> list[str]:
    """Keyword fallback: bigrams of adjacent non-stopwords, then unigrams; top ``limit``
    by mean idf when ``index`` is given, else in that order."""
    toks = tokenize(query)
    keep = [t not in DEFAULT_STOPLIST for t in toks]
    bigrams = [f"{toks[i]} {toks[i + 1]}" for i in range(len(toks) - 1) if keep[i] and keep[i + 1]]
    unigrams = [t for t, k in zip(toks, keep) if k]
    candidates = list(dict.fromkeys(bigrams + unigrams))
    if index is not None:
        def weight(concept: str) -> float:
            parts = concept.split()
            return sum(index.idf(p) for p in parts) / len(parts)
        candidates.sort(key=lambda c: -weight(c))
    return candidates[:limit]


REFORMULATE_PROMPT = """You rewrite questions about telecommunications networks so they use 3GPP terminology.
Rewrite the query below, then list its key concepts, one per line. Reply exactly in this form:
REWRITTEN: <rewritten query>
CONCEPTS:
<concept>
<concept>

Query: {query}"""


def parse_reformulation(text: str) -> tuple[str, list[str]] | None:
    rewritten = ""
    concepts: list[str] = []
    in_concepts = False
    for line in text.splitlines():
        head, sep, rest = line.partition(":")
        key = head.strip().strip("*#").strip().upper()
        if sep and key == "REWRITTEN":
            rewritten, in_concepts = rest.strip(), False
        elif sep and key == "CONCEPTS":
            in_concepts = True
            concepts.extend(p.strip() for p in re.split(r"[;,]", rest) if p.strip())
        elif in_concepts:
            item = re.sub(r"^\s*(?:[-*\u2022]|\d+[.)])\s*", "", line).strip().strip('"')
            if item:
                concepts.append(item)
    if not rewritten:
        return None
    return rewritten, list(dict.fromkeys(concepts))


def reformulate_query(
    query: str,
    llm: ChatProvider | None,
    index: LexicalIndex | None = None,
    allow_fallback: bool = True,
) -> ReformulatedQuery:
    if not query.strip():
        raise ValueError("query must be nonempty")
    if llm is not None:
        req = ChatRequest(
            [ChatMessage("user", REFORMULATE_PROMPT.format(query=query))],
            tag="reformulate",
            meta={"query": query},
        )
        try:
            parsed = parse_reformulation(llm.complete(req).text)
        except ProviderError:
            if not allow_fallback:
                raise
            logger.warning("reformulation provider failed; using identity rewrite")
            parsed = None
        if parsed is not None:
            rewritten, concepts = parsed
            return ReformulatedQuery(query, rewritten, concepts or extract_concepts(query, index))
    return ReformulatedQuery(query, query, extract_concepts(query, index))


# Step B: multi-source retrieval


def rrf_fuse(rankings: Iterable[Ranked], k: float = 60.0) -> Ranked:
    """Reciprocal-rank fusion. Contributions are summed with fsum so the result
    does not depend on the order of ``rankings``."""
    parts: dict[str, list[float]] = {}
    for ranked in rankings:
        for rank, (cid, _) in enumerate(ranked, start=1):
            parts.setdefault(cid, []).append(1.0 / (k + rank))
    fused = [(cid, math.fsum(vals)) for cid, vals in parts.items()]
    fused.sort(key=lambda item: (-item[1], item[0]))
    return fused


def retrieve_multi_source(
    rq: ReformulatedQuery, sources: Sequence[RetrievalSource], cfg: PipelineConfig
) -> tuple[Ranked, list[RetrievalSourceResult]]:
    if not sources:
        raise ValueError("no sources")
    results = []
    for src in sources:
        try:
            ranked = src.retrieve(rq, cfg.k_per_source)
            results.append(RetrievalSourceResult(src.source_id, ranked))
        except Exception as exc:  # a single broken source must not sink the run
            if len(sources) == 1:
                raise
            logger.warning("source %s failed: %s", src.source_id, exc)
            results.append(RetrievalSourceResult(src.source_id, [], error=f"{type(exc).__name__}: {exc}"))
    if all(r.error for r in results):
        raise RuntimeError("every retrieval source failed")
    return rrf_fuse((r.ranked for r in results), cfg.rrf_k), results


# Step C: evidence aggregation

CONDENSE_PROMPT = """Keep only the sentences of the passage that help answer the query. Do not add anything.

Query: {query}

Passage:
{text}"""


def aggregate_evidence(
    fused: Ranked,
    lookup: Mapping[str, str],
    cfg: PipelineConfig,
    llm: ChatProvider | None = None,
    per_source: Sequence[RetrievalSourceResult] = (),
    query: str = "",
) -> EvidenceBundle:
    contributors: dict[str, list[str]] = {}
    for res in per_source:
        for cid, _ in res.ranked:
            contributors.setdefault(cid, []).append(res.source_id)

    budget = cfg.evidence_budget_chars
    items: list[EvidenceItem] = []
    seen: set[str] = set()
    total = 0
    for cid, score in fused:
        if cid in seen:
            continue
        text = lookup.get(cid)
        if text is None:
            logger.warning("no text for chunk %s; skipped", cid)
            continue
        if items and total + len(text) > budget:
            break
        seen.add(cid)
        items.append(EvidenceItem(cid, text, score, contributors.get(cid, [])))
        total += len(text)

    bundle = EvidenceBundle(items, total)
    if llm is not None and total > 0.8 * budget:
        for item in items:
            req = ChatRequest(
                [ChatMessage("user", CONDENSE_PROMPT.format(query=query, text=item.text))],
                tag="condense",
                meta={"query": query, "text": item.text},
            )
            try:
                condensed = llm.complete(req).text.strip()
            except ProviderError as exc:
                logger.warning("condensing %s failed: %s", item.chunk_id, exc)
                continue
            if condensed:
                item.text = condensed
        bundle.total_chars = sum(len(i.text) for i in items)
        bundle.condensed = True
    return bundle


# Step D: decision and self-validation

DECIDE_PROMPT = """You answer questions about telecommunications standards using the evidence provided.
{body}
Think step by step about which evidence supports which answer, then reply with exactly these sections:
ANSWER: <{answer_hint}>
EXPLANATION: <why the evidence supports the answer>
CONFIDENCE: <number between 0 and 1>"""

VALIDATE_PROMPT = """Review the proposed answer below for consistency with the evidence, factual accuracy and
alignment with 3GPP standards. Reply with exactly these sections:
VERDICT: ACCEPT or REVISE
CRITIQUE: <what is wrong or missing, if anything>

Question: {question}
Proposed answer: {answer}
Explanation: {explanation}
Confidence: {confidence}

Evidence:
{evidence}"""

_SECTION = re.compile(r"^\W*(ANSWER|EXPLANATION|CONFIDENCE|VERDICT|CRITIQUE)\W*:\s*", re.IGNORECASE | re.MULTILINE)


def parse_sections(text: str) -> dict[str, str]:
    """Split ``NAME: value`` sections; a value runs until the next known header."""
    matches = list(_SECTION.finditer(text))
    out: dict[str, str] = {}
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        name = m.group(1).upper()
        # "**ANSWER:** x" leaves the closing emphasis in front of the value
        out.setdefault(name, text[m.end():end].lstrip("*_ \t").strip())
    return out


def parse_confidence(raw: str | None) -> float:
    if not raw:
        return 0.5
    m = re.search(r"[-+]?\d*\.?\d+(?:[eE][-+]?\d+)?", raw)
    if not m:
        return 0.5
    value = float(m.group(0))
    if "%" in raw or 1.0 < value <= 100.0:
        value /= 100.0
    return min(1.0, max(0.0, value))


def repair_label(answer: str, options: Mapping[str, str]) -> str:
    cand = answer.strip().strip("*\"'`").rstrip(".").strip()
    if cand in options:
        return cand
    lowered = {label.lower(): label for label in options}
    if cand.lower() in lowered:
        return lowered[cand.lower()]
    raise DecisionError(f"answer {answer!r} matches no option label")


def render_evidence(evidence: EvidenceBundle) -> str:
    if not evidence.items:
        return "(no evidence retrieved)"
    lines = []
    for n, item in enumerate(evidence.items, start=1):
        via = ", ".join(item.sources) or "unknown"
        lines.append(f"[{n}] ({item.chunk_id}; via {via}) {item.text}")
    return "\n".join(lines)


def _decide_request(rq, evidence, options, critique, retry: bool) -> ChatRequest:
    body = [f"Question: {rq.original}"]
    if rq.rewritten != rq.original:
        body.append(f"Reformulated: {rq.rewritten}")
    if options:
        body.append("Options:\n" + "\n".join(f"{label}: {text}" for label, text in options.items()))
    body.append("Evidence:\n" + render_evidence(evidence))
    if critique:
        body.append(f"A reviewer rejected a previous answer with this critique:\n{critique}")
    hint = "one option label, e.g. " + next(iter(options)) if options else "the answer"
    prompt = DECIDE_PROMPT.format(body="\n\n".join(body), answer_hint=hint)
    if retry:
        prompt += "\n\nYour previous reply could not be parsed. Use the three sections exactly."
    return ChatRequest(
        [ChatMessage("user", prompt)],
        tag="decide",
        meta={
            "question": rq.original,
            "rewritten": rq.rewritten,
            "options": dict(options or {}),
            "evidence": evidence.render(),
            "critique": critique or "",
        },
    )


def _parse_decision(text: str, options: Mapping[str, str] | None) -> Decision:
    sec = parse_sections(text)
    answer = sec.get("ANSWER", "")
    explanation = sec.get("EXPLANATION", "")
    if not answer or not explanation:
        raise DecisionError("reply lacks ANSWER or EXPLANATION")
    confidence = parse_confidence(sec.get("CONFIDENCE"))
    if options:
        label = repair_label(answer.splitlines()[0], options)
        return Decision(label, options[label], explanation, confidence)
    return Decision(None, answer, explanation, confidence)


def decide(
    rq: ReformulatedQuery,
    evidence: EvidenceBundle,
    options: Mapping[str, str] | None,
    llm: ChatProvider,
    critique: str | None = None,
) -> Decision:
    """Ask the provider for an answer; one re-prompt if the reply is unparseable."""
    try:
        return _parse_decision(llm.complete(_decide_request(rq, evidence, options, critique, False)).text, options)
    except DecisionError as first:
        logger.info("decision reply unparseable (%s); re-prompting", first)
    return _parse_decision(llm.complete(_decide_request(rq, evidence, options, critique, True)).text, options)


def validate(decision: Decision, rq: ReformulatedQuery, evidence: EvidenceBundle, llm: ChatProvider) -> tuple[str, str]:
    answer = decision.answer_label or decision.answer_text
    if decision.answer_label:
        answer = f"{decision.answer_label} ({decision.answer_text})"
    prompt = VALIDATE_PROMPT.format(
        question=rq.original,
        answer=answer,
        explanation=decision.explanation,
        confidence=decision.confidence,
        evidence=render_evidence(evidence),
    )
    req = ChatRequest(
        [ChatMessage("user", prompt)],
        tag="validate",
        meta={"question": rq.original, "decision": asdict(decision), "confidence": decision.confidence},
    )
    text = llm.complete(req).text
    sec = parse_sections(text)
    verdict = sec.get("VERDICT", "").split()
    verdict_word = verdict[0].upper().strip(".") if verdict else "REVISE"
    if verdict_word not in ("ACCEPT", "REVISE"):
        verdict_word = "REVISE"
    return verdict_word, sec.get("CRITIQUE", "" if sec else text.strip())


def self_validate(
    decision: Decision,
    rq: ReformulatedQuery,
    evidence: EvidenceBundle,
    llm: ChatProvider,
    cfg: PipelineConfig,
    options: Mapping[str, str] | None = None,
) -> tuple[Decision, list[ValidationRound]]:
    """Validate and re-decide until accepted with enough confidence, at most
    ``cfg.max_refinements`` extra decisions. On provider failure the most
    confident decision so far is returned and the last round carries the error."""
    rounds: list[ValidationRound] = []
    current = decision
    while True:
        try:
            verdict, critique = validate(current, rq, evidence, llm)
        except ProviderError as exc:
            rounds.append(ValidationRound(current, "ERROR", error=str(exc)))
            return _most_confident(rounds), rounds
        rounds.append(ValidationRound(current, verdict, critique))
        if verdict == "ACCEPT" and current.confidence >= cfg.confidence_threshold:
            return current, rounds
        if len(rounds) > cfg.max_refinements:
            return current, rounds
        try:
            current = decide(rq, evidence, options, llm, critique or "Revise the answer.")
        except (ProviderError, DecisionError) as exc:
            rounds[-1].error = str(exc)
            return _most_confident(rounds), rounds


def _most_confident(rounds: list[ValidationRound]) -> Decision:
    best = rounds[0].decision
    for r in rounds[1:]:
        if r.decision.confidence > best.confidence:
            best = r.decision
    return best


# The whole workflow


def run_pipeline(
    query: str,
    options: Mapping[str, str] | None,
    kb: KnowledgeBase,
    llm: ChatProvider,
    cfg: PipelineConfig | None = None,
) -> tuple[Decision, PipelineTrace]:
    cfg = cfg or PipelineConfig()
    options = dict(options) if options else None
    trace = PipelineTrace(query=query, options=options)

    def stage(name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, str(exc)) from exc
        finally:
            trace.timings[name] = time.perf_counter() - t0

    if cfg.retrieval and not cfg.sources:
        raise PipelineError("retrieve", "no sources")
    sources, lookup = stage("setup", kb.build_sources, cfg) if cfg.retrieval else ([], {})

    rq = stage(
        "reformulate",
        reformulate_query,
        query,
        llm if cfg.reformulate else None,
        kb.lexical,
        cfg.allow_fallback,
    )
    trace.reformulated = rq

    if cfg.retrieval:
        fused, per_source = stage("retrieve", retrieve_multi_source, rq, sources, cfg)
        trace.fused, trace.per_source = fused, per_source
        trace.flags.extend(f"source {r.source_id} failed: {r.error}" for r in per_source if r.error)
        evidence = stage(
            "aggregate",
            aggregate_evidence,
            fused,
            lookup,
            cfg,
            llm if cfg.condense else None,
            per_source,
            rq.rewritten,
        )
    else:
        evidence = EvidenceBundle()
    trace.evidence = evidence

    first = stage("decide", decide, rq, evidence, options, llm)
    if cfg.self_validate:
        final, rounds = stage("validate", self_validate, first, rq, evidence, llm, cfg, options)
    else:
        final, rounds = first, [ValidationRound(first, "SKIPPED")]
    trace.rounds = rounds
    trace.refinements = len(rounds) - 1
    trace.flags.extend(f"validation error: {r.error}" for r in rounds if r.error)
    return final, trace
