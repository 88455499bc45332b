"""Tokenizer, TF-IDF vector-space index with cosine ranking, and Boolean retrieval."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from .corpus import Chunk

_WORD = re.compile(r"[^\W_]+")

LEXICAL_FORMAT = "acr-lexical"
LEXICAL_VERSION = 1


def _simple_fold(text: str) -> str:
    if text.isascii():
        return text.lower()
    out = []
    for ch in text:
        folded = ch.casefold()
        if len(folded) != 1:
            # multi-character full folding; keep the one-to-one mapping only
            folded = ch.lower()
            if len(folded) != 1:
                folded = ch
        out.append(folded)
    return "".join(out)


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on every non-alphanumeric character.

    >>> tokenize("Ultra-Reliable Low-Latency")
    ['ultra', 'reliable', 'low', 'latency']
    """
    return _WORD.findall(_simple_fold(text))


def smoothed_idf(n_chunks: int, doc_freq: int) -> float:
    return math.log((1 + n_chunks) / (1 + doc_freq)) + 1.0


@dataclass
class LexicalIndex:
    postings: dict[str, list[tuple[str, int]]]
    doc_freq: dict[str, int]
    n_chunks: int
    chunk_norms: dict[str, float]
    chunk_ids: list[str] = field(default_factory=list)

    def idf(self, term: str) -> float:
        return smoothed_idf(self.n_chunks, self.doc_freq.get(term, 0))

    def universe(self) -> set[str]:
        return set(self.chunk_ids)


def build_lexical_index(chunks: Iterable[Chunk]) -> LexicalIndex:
    postings: dict[str, list[tuple[str, int]]] = {}
    chunk_ids: list[str] = []
    seen: set[str] = set()
    counts: list[Counter] = []
    for ch in chunks:
        if ch.chunk_id in seen:
            raise ValueError(f"duplicate chunk_id {ch.chunk_id!r}")
        seen.add(ch.chunk_id)
        chunk_ids.append(ch.chunk_id)
        tf = Counter(tokenize(ch.text))
        counts.append(tf)
        for term, n in tf.items():
            postings.setdefault(term, []).append((ch.chunk_id, n))

    n = len(chunk_ids)
    doc_freq = {t: len(p) for t, p in postings.items()}
    idf = {t: smoothed_idf(n, df) for t, df in doc_freq.items()}
    norms = {}
    for cid, tf in zip(chunk_ids, counts):
        norms[cid] = math.sqrt(sum((c * idf[t]) ** 2 for t, c in tf.items()))
    return LexicalIndex(postings=postings, doc_freq=doc_freq, n_chunks=n, chunk_norms=norms, chunk_ids=chunk_ids)


def search_lexical(index: LexicalIndex, query: str, k: int = 10) -> list[tuple[str, float]]:
    """Rank chunks by cosine between query and chunk TF-IDF vectors.

    Terms absent from the index still weigh into the query norm. Chunks with a
    zero score are dropped; ties go to the smaller chunk_id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q_tf = Counter(tokenize(query))
    if not q_tf:
        return []
    q_weights = {t: c * index.idf(t) for t, c in q_tf.items()}
    q_norm = math.sqrt(sum(w * w for w in q_weights.values()))

    acc: dict[str, float] = {}
    for term, wq in q_weights.items():
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for cid, tf in plist:
            acc[cid] = acc.get(cid, 0.0) + wq * tf * idf

    scored = []
    for cid, dot in acc.items():
        score = dot / (q_norm * index.chunk_norms[cid])
        if score > 0.0:
            scored.append((cid, min(score, 1.0)))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def save_lexical_index(index: LexicalIndex, path: str | Path) -> None:
    """Write the index as JSON lines: a header, one line per chunk, one per term."""
    with Path(path).open("w", encoding="utf-8") as fh:
        header = {"format": LEXICAL_FORMAT, "version": LEXICAL_VERSION, "n_chunks": index.n_chunks}
        fh.write(json.dumps(header) + "\n")
        for cid in index.chunk_ids:
            fh.write(json.dumps({"chunk": cid, "norm": index.chunk_norms[cid]}, ensure_ascii=False) + "\n")
        for term in sorted(index.postings):
            row = {"term": term, "postings": [[cid, tf] for cid, tf in index.postings[term]]}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def load_lexical_index(path: str | Path) -> LexicalIndex:
    with Path(path).open(encoding="utf-8") as fh:
        header = json.loads(fh.readline() or "{}")
        if header.get("format") != LEXICAL_FORMAT:
            raise ValueError(f"{path}: not a lexical index file")
        if header.get("version") != LEXICAL_VERSION:
            raise ValueError(f"{path}: unsupported lexical index version {header.get('version')}")
        chunk_ids: list[str] = []
        norms: dict[str, float] = {}
        postings: dict[str, list[tuple[str, int]]] = {}
        for line in fh:
            row = json.loads(line)
            if "chunk" in row:
                chunk_ids.append(row["chunk"])
                norms[row["chunk"]] = row["norm"]
            else:
                postings[row["term"]] = [(cid, tf) for cid, tf in row["postings"]]
    if len(chunk_ids) != header["n_chunks"]:
        raise ValueError(f"{path}: expected {header['n_chunks']} chunks, found {len(chunk_ids)}")
    doc_freq = {t: len(p) for t, p in postings.items()}
    return LexicalIndex(postings=postings, doc_freq=doc_freq, n_chunks=len(chunk_ids), chunk_norms=norms, chunk_ids=chunk_ids)


# Boolean retrieval


@dataclass(frozen=True)
class Term:
    token: str


@dataclass(frozen=True)
class Not:
    operand: "BooleanExpr"


@dataclass(frozen=True)
class And:
    left: "BooleanExpr"
    right: "BooleanExpr"


@dataclass(frozen=True)
class Or:
    left: "BooleanExpr"
    right: "BooleanExpr"


BooleanExpr = Union[Term, Not, And, Or]


class BooleanSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_KEYWORDS = {"AND", "OR", "NOT"}


def _lex(expr: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, byte_offset) triples; kind is one of ( ) AND OR NOT TERM END."""
    tokens = []
    i = 0
    n = len(expr)
    while i < n:
        ch = expr[i]
        if ch.isspace():
            i += 1
            continue
        offset = len(expr[:i].encode("utf-8"))
        if ch in "()":
            tokens.append((ch, ch, offset))
            i += 1
            continue
        j = i
        while j < n and not expr[j].isspace() and expr[j] not in "()":
            j += 1
        word = expr[i:j]
        kind = word.upper() if word.upper() in _KEYWORDS else "TERM"
        tokens.append((kind, word, offset))
        i = j
    tokens.append(("END", "", len(expr.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, expr: str):
        self.tokens = _lex(expr)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> BooleanExpr:
        node = self.parse_or()
        kind, text, offset = self.peek()
        if kind == ")":
            raise BooleanSyntaxError("unbalanced parenthesis", offset)
        if kind != "END":
            raise BooleanSyntaxError(f"unexpected {text!r}", offset)
        return node

    def parse_or(self) -> BooleanExpr:
        node = self.parse_and()
        while self.peek()[0] == "OR":
            self.take()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> BooleanExpr:
        node = self.parse_not()
        while self.peek()[0] == "AND":
            self.take()
            node = And(node, self.parse_not())
        return node

    def parse_not(self) -> BooleanExpr:
        if self.peek()[0] == "NOT":
            self.take()
            return Not(self.parse_not())
        return self.parse_atom()

    def parse_atom(self) -> BooleanExpr:
        kind, text, offset = self.take()
        if kind == "TERM":
            toks = tokenize(text)
            if len(toks) != 1:
                raise BooleanSyntaxError(f"term {text!r} is not a single token", offset)
            return Term(toks[0])
        if kind == "(":
            node = self.parse_or()
            if self.peek()[0] != ")":
                raise BooleanSyntaxError("unbalanced parenthesis", offset)
            self.take()
            return node
        if kind == "END":
            raise BooleanSyntaxError("unexpected end of expression", offset)
        if kind == ")":
            raise BooleanSyntaxError("unbalanced parenthesis", offset)
        raise BooleanSyntaxError(f"unexpected operator {text!r}", offset)


def parse_boolean(expr: str) -> BooleanExpr:
    """Parse ``a AND NOT (b OR c)`` style queries; NOT binds tighter than AND, AND than OR."""
    return _Parser(expr).parse()


def eval_boolean(index: LexicalIndex, expr: BooleanExpr) -> set[str]:
    if isinstance(expr, Term):
        return {cid for cid, _ in index.postings.get(expr.token, ())}
    if isinstance(expr, Not):
        return index.universe() - eval_boolean(index, expr.operand)
    if isinstance(expr, And):
        return eval_boolean(index, expr.left) & eval_boolean(index, expr.right)
    if isinstance(expr, Or):
        return eval_boolean(index, expr.left) | eval_boolean(index, expr.right)
    raise TypeError(f"not a boolean expression: {expr!r}")
