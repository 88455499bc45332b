"""Multiple-choice QA datasets, answer/explanation metrics and the baseline comparison runner."""

from __future__ import annotations

import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .agent import Decision, KnowledgeBase, PipelineConfig, run_pipeline
from .lexical import tokenize
from .providers import ChatProvider, Embedder

logger = logging.getLogger(__name__)


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class QAItem:
    qa_id: str
    question: str
    options: dict[str, str]
    answer_label: str
    answer_text: str
    explanation: str = ""
    category: str = ""


def _parse_item(record: dict, lineno: int) -> QAItem:
    for key in ("qa_id", "question", "options", "answer_label"):
        if key not in record:
            raise DatasetError(f"line {lineno}: missing field {key!r}")
    raw = record["options"]
    if not isinstance(raw, list) or not raw:
        raise DatasetError(f"line {lineno}: options must be a nonempty list of {{label, text}}")
    options: dict[str, str] = {}
    for opt in raw:
        if not isinstance(opt, dict) or "label" not in opt or "text" not in opt:
            raise DatasetError(f"line {lineno}: each option needs label and text")
        if opt["label"] in options:
            raise DatasetError(f"line {lineno}: duplicate option label {opt['label']!r}")
        options[opt["label"]] = opt["text"]
    label = record["answer_label"]
    if label not in options:
        raise DatasetError(f"line {lineno}: answer_label {label!r} is not among the option labels")
    answer_text = record.get("answer_text", options[label])
    if answer_text != options[label]:
        raise DatasetError(f"line {lineno}: answer_text disagrees with option {label!r}")
    return QAItem(
        qa_id=str(record["qa_id"]),
        question=record["question"],
        options=options,
        answer_label=label,
        answer_text=answer_text,
        explanation=record.get("explanation", ""),
        category=record.get("category", ""),
    )


def load_qa(path: str | Path) -> list[QAItem]:
    items = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {lineno}: malformed record ({exc.msg})") from None
            if not isinstance(record, dict):
                raise DatasetError(f"line {lineno}: expected an object")
            items.append(_parse_item(record, lineno))
    return items


# Metrics


def answer_accuracy(preds: Sequence[Decision], gold: Sequence[QAItem]) -> float:
    if len(preds) != len(gold):
        raise ValueError(f"{len(preds)} predictions for {len(gold)} gold items")
    if not gold:
        raise ValueError("empty dataset")
    return sum(p.answer_label == g.answer_label for p, g in zip(preds, gold)) / len(gold)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def token_f1(pred_text: str, gold_text: str) -> float:
    """Token-level F1 with multiset overlap (the usual extractive-QA score)."""
    pred, gold = tokenize(pred_text), tokenize(gold_text)
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    overlap = sum((Counter(pred) & Counter(gold)).values())
    return _f1(overlap / len(pred), overlap / len(gold))


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v)) / (nu * nv)


def explanation_cosine(pred_expl: str, gold_expl: str, embedder: Embedder) -> float:
    u, v = np.asarray(embedder.embed([pred_expl, gold_expl]))
    return min(1.0, max(0.0, _cosine(u, v)))


def explanation_embed_f1(pred_expl: str, gold_expl: str, embedder: Embedder) -> float:
    """Greedy token matching: each token is paired with its most similar token on the other side."""
    pred, gold = tokenize(pred_expl), tokenize(gold_expl)
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    vocab = list(dict.fromkeys(pred + gold))
    vecs = np.asarray(embedder.embed(vocab), dtype=np.float64)
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    vecs = np.divide(vecs, norms, out=np.zeros_like(vecs), where=norms > 0)
    pos = {t: i for i, t in enumerate(vocab)}
    sim = vecs[[pos[t] for t in pred]] @ vecs[[pos[t] for t in gold]].T
    precision = float(np.mean(sim.max(axis=1)))
    recall = float(np.mean(sim.max(axis=0)))
    return min(1.0, max(0.0, _f1(max(precision, 0.0), max(recall, 0.0))))


# Comparison runner


@dataclass
class MetricsReport:
    system_id: str
    n: int
    accuracy: float
    answer_f1: float
    explanation_embed_f1: float
    explanation_cosine: float
    rows: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d


PRESETS: dict[str, PipelineConfig] = {
    "none": PipelineConfig(sources=(), retrieval=False, reformulate=False, self_validate=False, condense=False),
    "traditional": PipelineConfig(sources=("lexical",), reformulate=False, self_validate=False, condense=False),
    "semantic": PipelineConfig(sources=("dense",), reformulate=False, self_validate=False, condense=False),
    "agentic": PipelineConfig(),
}


def preset_config(name: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Preset ``name`` with retrieval depth and thresholds taken from ``base``."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    preset = PRESETS[name]
    if base is None:
        return preset
    return replace(
        base,
        sources=preset.sources if name != "agentic" else base.sources,
        retrieval=preset.retrieval,
        reformulate=preset.reformulate and base.reformulate,
        self_validate=preset.self_validate and base.self_validate,
        condense=preset.condense and base.condense,
    )


def check_preset_resources(name: str, cfg: PipelineConfig, kb: KnowledgeBase) -> None:
    needs = {"lexical": [("lexical", kb.lexical)], "dense": [("vectors", kb.vectors), ("embedder", kb.embedder)],
             "hybrid": [("lexical", kb.lexical), ("vectors", kb.vectors), ("embedder", kb.embedder)],
             "kgraph": [("graph", kb.graph)]}
    if not cfg.retrieval:
        return
    for sid in cfg.sources:
        for what, value in needs.get(sid, []):
            if value is None:
                raise ValueError(f"preset {name!r} needs {what} for source {sid!r}")


def evaluate_preset(
    name: str,
    qa: Sequence[QAItem],
    kb: KnowledgeBase,
    llm: ChatProvider,
    embedder: Embedder,
    base: PipelineConfig | None = None,
    max_concurrency: int = 4,
    traces: list | None = None,
) -> MetricsReport:
    if not qa:
        raise ValueError("empty dataset")
    cfg = preset_config(name, base)
    check_preset_resources(name, cfg, kb)

    def answer(item: QAItem):
        return run_pipeline(item.question, item.options, kb, llm, cfg)

    if max_concurrency > 1:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            results = list(pool.map(answer, qa))
    else:
        results = [answer(item) for item in qa]

    rows = []
    for item, (decision, trace) in zip(qa, results):
        rows.append(
            {
                "system_id": name,
                "qa_id": item.qa_id,
                "category": item.category,
                "predicted_label": decision.answer_label,
                "gold_label": item.answer_label,
                "correct": decision.answer_label == item.answer_label,
                "answer_f1": token_f1(decision.answer_text, item.answer_text),
                "explanation_embed_f1": explanation_embed_f1(decision.explanation, item.explanation, embedder),
                "explanation_cosine": explanation_cosine(decision.explanation, item.explanation, embedder),
                "confidence": decision.confidence,
                "refinements": trace.refinements,
                "evidence": [e.chunk_id for e in trace.evidence.items] if trace.evidence else [],
            }
        )
        if traces is not None:
            traces.append(trace)
    n = len(rows)
    return MetricsReport(
        system_id=name,
        n=n,
        accuracy=answer_accuracy([d for d, _ in results], qa),
        answer_f1=sum(r["answer_f1"] for r in rows) / n,
        explanation_embed_f1=sum(r["explanation_embed_f1"] for r in rows) / n,
        explanation_cosine=sum(r["explanation_cosine"] for r in rows) / n,
        rows=rows,
    )


def run_comparison(
    qa: Sequence[QAItem],
    presets: Iterable[str],
    kb: KnowledgeBase,
    llm: ChatProvider,
    embedder: Embedder,
    base: PipelineConfig | None = None,
    max_concurrency: int = 4,
) -> list[MetricsReport]:
    presets = list(presets)
    if not presets:
        raise ValueError("no presets given")
    if not qa:
        raise ValueError("empty dataset")
    for name in presets:
        check_preset_resources(name, preset_config(name, base), kb)
    return [evaluate_preset(p, qa, kb, llm, embedder, base, max_concurrency) for p in presets]


METRIC_COLUMNS = ("accuracy", "answer_f1", "explanation_embed_f1", "explanation_cosine")


def format_table(reports: Sequence[MetricsReport]) -> str:
    header = ["system", "n", *METRIC_COLUMNS]
    body = [[r.system_id, str(r.n), *(f"{getattr(r, m):.4f}" for m in METRIC_COLUMNS)] for r in reports]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in [header, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def write_report(reports: Sequence[MetricsReport], path: str | Path) -> None:
    """Per-item rows followed by one ``summary`` row per preset, as JSON lines."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for rep in reports:
            for row in rep.rows:
                fh.write(json.dumps({"kind": "item", **row}, ensure_ascii=False) + "\n")
        for rep in reports:
            fh.write(json.dumps({"kind": "summary", **rep.summary()}) + "\n")
