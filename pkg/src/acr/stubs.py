"""Deterministic chat handlers that speak the pipeline's prompt protocol, and bundled fixture data.

``stub_stack()`` gives a :class:`~acr.providers.StubChat` that reformulates with a
synonym lexicon, decides with :func:`~acr.providers.stub_decide` and accepts any
decision whose confidence clears the threshold.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Callable

from .agent import extract_concepts
from .lexical import tokenize
from .providers import ChatRequest, StubChat, stub_decide

Lexicon = list[tuple[tuple[str, ...], str]]


def data_path(name: str) -> Path:
    """Path of a file bundled under ``acr/data``."""
    return Path(str(resources.files("acr") / "data" / name))


def load_lexicon(path: str | Path | None = None) -> Lexicon:
    """Read ``phrase<TAB>canonical term`` lines; defaults to the bundled lexicon."""
    path = Path(path) if path else data_path("lexicon.tsv")
    entries: Lexicon = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            phrase, sep, canonical = line.partition("\t")
            toks = tuple(tokenize(phrase))
            if not sep or not toks or not canonical.strip():
                raise ValueError(f"{path}:{lineno}: expected 'phrase<TAB>canonical'")
            entries.append((toks, canonical.strip()))
    return entries


def _contains(haystack: list[str], needle: tuple[str, ...]) -> bool:
    n = len(needle)
    return any(tuple(haystack[i:i + n]) == needle for i in range(len(haystack) - n + 1))


def expand_with_lexicon(query: str, lexicon: Lexicon) -> tuple[str, list[str]]:
    """Append the canonical term of every lexicon phrase found in ``query``."""
    toks = tokenize(query)
    canon = list(dict.fromkeys(c for phrase, c in lexicon if _contains(toks, phrase)))
    rewritten = f"{query} {' '.join(canon)}" if canon else query
    return rewritten, canon


def lexicon_reformulator(lexicon: Lexicon) -> Callable[[ChatRequest], str]:
    def handler(req: ChatRequest) -> str:
        query = req.meta["query"]
        rewritten, canon = expand_with_lexicon(query, lexicon)
        concepts = list(dict.fromkeys(canon + extract_concepts(query)))
        return "REWRITTEN: " + rewritten + "\nCONCEPTS:\n" + "\n".join(concepts)

    return handler


def identity_reformulator(req: ChatRequest) -> str:
    return f"REWRITTEN: {req.meta['query']}\nCONCEPTS:\n"


def decide_handler(req: ChatRequest) -> str:
    options = req.meta.get("options") or {}
    evidence = req.meta.get("evidence", "")
    if options:
        label, explanation, confidence = stub_decide(req.meta.get("question", ""), options, evidence)
        return f"ANSWER: {label}\nEXPLANATION: {explanation}\nCONFIDENCE: {confidence!r}"
    first = re.split(r"(?<=[.!?])\s", evidence.strip(), maxsplit=1)[0] if evidence.strip() else ""
    if not first:
        return "ANSWER: unknown\nEXPLANATION: No evidence was retrieved.\nCONFIDENCE: 0.0"
    return f"ANSWER: {first}\nEXPLANATION: Taken from the top evidence passage.\nCONFIDENCE: 1.0"


def threshold_validator(threshold: float = 0.7) -> Callable[[ChatRequest], str]:
    def handler(req: ChatRequest) -> str:
        if req.meta["confidence"] >= threshold:
            return "VERDICT: ACCEPT\nCRITIQUE: none"
        return "VERDICT: REVISE\nCRITIQUE: The evidence does not clearly support the answer."

    return handler


ALWAYS_ACCEPT = "VERDICT: ACCEPT\nCRITIQUE: none"
ALWAYS_REVISE = "VERDICT: REVISE\nCRITIQUE: Reconsider the evidence."


def condense_handler(req: ChatRequest) -> str:
    """Keep the sentences sharing a token with the query; the whole text if none do."""
    query = set(tokenize(req.meta.get("query", "")))
    text = req.meta["text"]
    sentences = re.split(r"(?<=[.!?;])\s+", text)
    kept = [s for s in sentences if query & set(tokenize(s))]
    return " ".join(kept) if kept else text


def stub_stack(lexicon: Lexicon | None = None, validator=None) -> StubChat:
    """The full deterministic chat stack used by tests, demos and ``--provider stub``."""
    lexicon = load_lexicon() if lexicon is None else lexicon
    return StubChat(
        {
            "reformulate": lexicon_reformulator(lexicon),
            "decide": decide_handler,
            "validate": validator if validator is not None else threshold_validator(),
            "condense": condense_handler,
        }
    )
