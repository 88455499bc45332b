"""``acr`` command line: ingest a corpus, build indexes, query them and run evaluations.

Exit codes are 0 on success, 1 for runtime, I/O and provider failures and 2 for
usage errors. Settings resolve as command-line flag, then environment variable,
then JSON config file, then built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from .agent import GraphSource, KnowledgeBase, PipelineConfig, PipelineError, ReformulatedQuery, extract_concepts, run_pipeline
from .corpus import ChunkingConfig, CorpusError
from .dense import VectorIndexError, search_dense
from .evalx import PRESETS, DatasetError, format_table, load_qa, run_comparison, write_report
from .hybrid import HybridConfig, search_hybrid
from .indexdir import ManifestError, build_indexes, ingest, open_knowledge_base
from .kgraph import GraphError
from .lexical import BooleanSyntaxError, eval_boolean, parse_boolean, search_lexical
from .providers import HttpChat, HttpEmbedder, ProviderConfig, ProviderError, StubEmbedder
from .stubs import data_path, load_lexicon, stub_stack

logger = logging.getLogger("acr")

SYNTHETIC = "@synthetic"
SYNTHETIC_FILES = {"corpus": "corpus.jsonl", "graph": "graph.tsv", "qa": "qa.jsonl"}

ENV_VARS = {"base_url": "ACR_BASE_URL", "api_key": "ACR_API_KEY"}

DEFAULTS: dict[str, Any] = {
    "provider": "stub",
    "base_url": "",
    "api_key": "",
    "chat_model": "",
    "embed_model": "",
    "embed_dim": None,
    "timeout": 60.0,
    "max_retries": 2,
    "max_concurrency": 4,
    "lexicon": None,
    "confidence_threshold": 0.7,
    "max_refinements": 2,
    "k_per_source": 10,
    "evidence_budget": 6000,
    "hops": 1,
    "coarse_k": 100,
    "lexical_weight": 0.0,
}


class UsageError(Exception):
    """Bad combination of arguments; reported with exit code 2."""


class Settings:
    """Flag > environment > config file > default lookup over :data:`DEFAULTS`."""

    def __init__(self, args: argparse.Namespace, env: dict[str, str] | None = None):
        self.args = args
        self.env = os.environ if env is None else env
        self.config = _read_config(args.config) if getattr(args, "config", None) else {}

    def __getitem__(self, key: str) -> Any:
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        var = ENV_VARS.get(key)
        if var and self.env.get(var):
            return self.env[var]
        if key in self.config:
            return self.config[key]
        return DEFAULTS[key]


def _read_config(path: str) -> dict[str, Any]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    # keys mirror flag names; accept both --base-url and base_url spellings
    config = {k.lstrip("-").replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(config) - set(DEFAULTS))
    if unknown:
        raise UsageError(f"config file {path}: unknown keys {', '.join(unknown)}")
    return config


def resolve_input(value: str, kind: str) -> Path:
    """Map the ``@synthetic`` sentinel to the bundled fixture file."""
    if value == SYNTHETIC:
        return data_path(SYNTHETIC_FILES[kind])
    return Path(value)


# Providers


def provider_config(s: Settings, model: str) -> ProviderConfig:
    if not s["base_url"]:
        raise UsageError("--provider http needs --base-url (or ACR_BASE_URL)")
    return ProviderConfig(
        base_url=s["base_url"],
        api_key=s["api_key"],
        model_name=model,
        timeout=float(s["timeout"]),
        max_retries=int(s["max_retries"]),
    )


def make_embedder(s: Settings, manifest_dim: int | None = None):
    dim = s["embed_dim"] if s["embed_dim"] is not None else manifest_dim
    if s["provider"] == "stub":
        return StubEmbedder(int(dim) if dim else 64)
    return HttpEmbedder(provider_config(s, s["embed_model"]), dim=int(dim) if dim else None)


def make_chat(s: Settings):
    if s["provider"] == "stub":
        return stub_stack(load_lexicon(s["lexicon"]))
    return HttpChat(provider_config(s, s["chat_model"]))


def pipeline_config(s: Settings, kb: KnowledgeBase) -> PipelineConfig:
    """Default agentic configuration restricted to the sources this knowledge base can serve."""
    available = {"lexical": kb.lexical is not None, "dense": kb.vectors is not None, "kgraph": kb.graph is not None}
    sources = tuple(src for src in PipelineConfig().sources if available[src])
    dropped = [src for src in PipelineConfig().sources if not available[src]]
    if dropped:
        logger.info("agentic run without %s", ", ".join(dropped))
    return PipelineConfig(
        sources=sources,
        k_per_source=int(s["k_per_source"]),
        evidence_budget_chars=int(s["evidence_budget"]),
        confidence_threshold=float(s["confidence_threshold"]),
        max_refinements=int(s["max_refinements"]),
        hops=int(s["hops"]),
        hybrid=HybridConfig(coarse_k=int(s["coarse_k"]), lexical_weight=float(s["lexical_weight"])),
    )


def _open(args: argparse.Namespace, s: Settings, need_embedder: bool = True):
    graph = resolve_input(args.graph, "graph") if getattr(args, "graph", None) else None
    kb, manifest = open_knowledge_base(args.dir, graph_path=graph)
    if need_embedder:
        kb.embedder = make_embedder(s, manifest.embed_dim)
    return kb, manifest


def _missing(what: str, directory: str, flag: str) -> ManifestError:
    return ManifestError(f"{directory} has no {what}; run `acr index --dir {directory} {flag}` first")


# Commands


def cmd_ingest(args: argparse.Namespace, s: Settings) -> int:
    if args.overlap >= args.chunk_size:
        raise UsageError(f"--overlap ({args.overlap}) must be smaller than --chunk-size ({args.chunk_size})")
    if args.overlap < 0 or args.chunk_size < 1:
        raise UsageError("--chunk-size must be positive and --overlap non-negative")
    graph = resolve_input(args.graph, "graph") if args.graph else None
    manifest = ingest(resolve_input(args.corpus, "corpus"), args.out, ChunkingConfig(args.chunk_size, args.overlap), graph)
    print(f"ingested {manifest.n_docs} documents into {manifest.n_chunks} chunks at {args.out}")
    return 0


def cmd_index(args: argparse.Namespace, s: Settings) -> int:
    if not (args.lexical or args.dense):
        raise UsageError("choose at least one of --lexical and --dense")
    embedder = make_embedder(s) if args.dense else None
    manifest = build_indexes(args.dir, args.lexical, args.dense, embedder)
    built = [name for name, flag in (("lexical", args.lexical), ("dense", args.dense)) if flag]
    extra = f" (provider {manifest.provider_id}, dim {manifest.embed_dim})" if args.dense else ""
    print(f"built {' and '.join(built)} index over {manifest.n_chunks} chunks{extra}")
    return 0


def _parse_options(raw: Sequence[str] | None) -> dict[str, str] | None:
    if not raw:
        return None
    options: dict[str, str] = {}
    for item in raw:
        label, sep, text = item.partition("=")
        if not sep or not label.strip():
            raise UsageError(f"--option expects label=text, got {item!r}")
        options[label.strip()] = text.strip()
    return options


def _print_ranked(ranked, kb: KnowledgeBase, lookup: dict[str, str] | None = None, as_json: bool = False) -> None:
    texts = lookup if lookup is not None else {cid: c.text for cid, c in kb.chunks.items()}
    if as_json:
        print(json.dumps([{"chunk_id": cid, "score": score} for cid, score in ranked]))
        return
    if not ranked:
        print("no results")
    for rank, (cid, score) in enumerate(ranked, start=1):
        preview = " ".join(texts.get(cid, "").split())[:80]
        print(f"{rank:>3}  {score:.6f}  {cid}  {preview}")


def _append_trace(path: str | None, record: dict) -> None:
    if path:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def cmd_query(args: argparse.Namespace, s: Settings) -> int:
    if args.method == "kg" and not args.graph:
        raise UsageError("--method kg needs --graph")
    if args.boolean and args.method != "lexical":
        raise UsageError("--boolean only applies to --method lexical")
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    options = _parse_options(args.option)
    kb, _ = _open(args, s, need_embedder=args.method in ("dense", "hybrid", "agentic"))

    if args.method in ("lexical", "hybrid") and kb.lexical is None:
        raise _missing("lexical index", args.dir, "--lexical")
    if args.method in ("dense", "hybrid") and kb.vectors is None:
        raise _missing("vector index", args.dir, "--dense")

    if args.method == "agentic":
        cfg = pipeline_config(s, kb)
        if not cfg.sources:
            raise _missing("lexical or vector index", args.dir, "--lexical --dense")
        decision, trace = run_pipeline(args.query, options, kb, make_chat(s), cfg)
        if args.json:
            print(json.dumps(asdict(decision), ensure_ascii=False))
        else:
            if decision.answer_label is not None:
                print(f"answer: {decision.answer_label}: {decision.answer_text}")
            else:
                print(f"answer: {decision.answer_text}")
            print(f"explanation: {decision.explanation}")
            print(f"confidence: {decision.confidence:.2f}")
            print(f"evidence: {', '.join(e.chunk_id for e in trace.evidence.items) or '(none)'}")
        _append_trace(args.trace_out, trace.to_record())
        return 0

    lookup = None
    if args.method == "lexical" and args.boolean:
        hits = sorted(eval_boolean(kb.lexical, parse_boolean(args.query)))
        ranked = [(cid, 1.0) for cid in hits]
    elif args.method == "lexical":
        ranked = search_lexical(kb.lexical, args.query, args.k)
    elif args.method == "dense":
        ranked = search_dense(kb.vectors, args.query, kb.embedder, args.k)
    elif args.method == "hybrid":
        hcfg = HybridConfig(coarse_k=int(s["coarse_k"]), final_k=args.k, lexical_weight=float(s["lexical_weight"]))
        ranked = search_hybrid(kb.lexical, kb.vectors, kb.embedder, args.query, hcfg)
    else:
        source = GraphSource(kb.graph, int(s["hops"]))
        ranked = source.retrieve(ReformulatedQuery(args.query, args.query, extract_concepts(args.query)), args.k)
        lookup = {cid: c.text for cid, c in source.chunks.items()}
    _print_ranked(ranked, kb, lookup, args.json)
    _append_trace(args.trace_out, {"method": args.method, "query": args.query, "results": ranked})
    return 0


def _evaluate(args: argparse.Namespace, s: Settings, presets: list[str]) -> int:
    qa = load_qa(resolve_input(args.qa, "qa"))
    kb, _ = _open(args, s)
    base = pipeline_config(s, kb)
    try:
        reports = run_comparison(qa, presets, kb, make_chat(s), kb.embedder, base, int(s["max_concurrency"]))
    except ValueError as exc:
        if "needs" in str(exc):
            raise ManifestError(f"{exc}; build it with `acr index --dir {args.dir}` or pass --graph") from None
        raise
    print(format_table(reports))
    if args.report_out:
        write_report(reports, args.report_out)
        print(f"report written to {args.report_out}")
    return 0


def cmd_eval(args: argparse.Namespace, s: Settings) -> int:
    return _evaluate(args, s, [args.preset])


def cmd_compare(args: argparse.Namespace, s: Settings) -> int:
    return _evaluate(args, s, list(PRESETS))


# Parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("providers and configuration")
    g.add_argument("--config", help="JSON file whose keys mirror the long flag names")
    g.add_argument("--provider", choices=("stub", "http"), help="stub (default) or an OpenAI-compatible HTTP endpoint")
    g.add_argument("--base-url", help="endpoint root, e.g. http://localhost:8000/v1 (env ACR_BASE_URL)")
    g.add_argument("--api-key", help="bearer token (env ACR_API_KEY)")
    g.add_argument("--chat-model")
    g.add_argument("--embed-model")
    g.add_argument("--embed-dim", type=int, help="embedding dimension (stub default 64)")
    g.add_argument("--timeout", type=float)
    g.add_argument("--max-retries", type=int)
    g.add_argument("--lexicon", help="synonym lexicon for the stub reformulator")
    g.add_argument("--seed", type=int, help="accepted for fixture selection; stubs are deterministic without it")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--graph", help="knowledge graph file (or @synthetic)")
    g.add_argument("--confidence-threshold", type=float)
    g.add_argument("--max-refinements", type=int)
    g.add_argument("--k-per-source", type=int)
    g.add_argument("--evidence-budget", type=int, help="evidence budget in characters")
    g.add_argument("--hops", type=int)
    g.add_argument("--coarse-k", type=int)
    g.add_argument("--lexical-weight", type=float)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="acr", description="Agentic contextual retrieval over a document corpus.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="chunk a corpus into an index directory")
    p.add_argument("--corpus", required=True, help="JSONL corpus (or @synthetic)")
    p.add_argument("--out", required=True, help="index directory to create or refresh")
    p.add_argument("--chunk-size", type=int, default=1000)
    p.add_argument("--overlap", type=int, default=100)
    p.add_argument("--graph", help="graph file to store alongside the chunks (or @synthetic)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", parents=[common], help="build lexical and/or dense indexes")
    p.add_argument("--dir", required=True)
    p.add_argument("--lexical", action="store_true")
    p.add_argument("--dense", action="store_true")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", parents=[common], help="search the index or answer a question")
    p.add_argument("--dir", required=True)
    p.add_argument("--method", choices=("lexical", "dense", "hybrid", "kg", "agentic"), default="lexical")
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--option", action="append", metavar="LABEL=TEXT", help="answer option; repeat for each")
    p.add_argument("--boolean", action="store_true", help="treat the lexical query as an AND/OR/NOT expression")
    p.add_argument("--trace-out", help="append a JSON record of the run to this file")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_query)

    for name, func, helptext in (("eval", cmd_eval, "evaluate one preset"), ("compare", cmd_compare, "evaluate every preset")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--dir", required=True)
        p.add_argument("--qa", required=True, help="JSONL QA file (or @synthetic)")
        if name == "eval":
            p.add_argument("--preset", choices=tuple(PRESETS), required=True)
        p.add_argument("--report-out", help="write per-item and summary rows as JSONL")
        p.add_argument("--max-concurrency", type=int)
        _pipeline_flags(p)
        p.set_defaults(func=func)
    return parser


RUNTIME_ERRORS = (
    OSError,
    CorpusError,
    DatasetError,
    GraphError,
    ManifestError,
    VectorIndexError,
    BooleanSyntaxError,
    ProviderError,
    PipelineError,
    ValueError,
    RuntimeError,
)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = Settings(args)
        if settings["provider"] not in ("stub", "http"):
            raise UsageError(f"unknown provider {settings['provider']!r}")
        return args.func(args, settings)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"acr {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except RUNTIME_ERRORS as exc:
        print(f"acr {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
