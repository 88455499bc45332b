"""Reference implementations used to check the library.

Each oracle recomputes a result the slow, obvious way from the defining formula
and shares no code with the package beyond the tokenizer.
"""

from __future__ import annotations

import math
import random
import struct
from collections import Counter

from acr.corpus import Chunk
from acr.lexical import And, Not, Or, Term, tokenize


def chunk_windows(length: int, size: int, overlap: int) -> list[tuple[int, int]]:
    """Slide a window until the text is covered."""
    spans: list[tuple[int, int]] = []
    start = 0
    while length > 0:
        end = min(start + size, length)
        spans.append((start, end))
        if end == length:
            break
        start += size - overlap
    return spans


class TfidfOracle:
    """Dense TF-IDF vectors over the whole vocabulary, scored against every chunk."""

    def __init__(self, chunks: list[Chunk]):
        self.n = len(chunks)
        tfs = {c.chunk_id: Counter(tokenize(c.text)) for c in chunks}
        self.df: Counter = Counter()
        for tf in tfs.values():
            self.df.update(set(tf))
        self.vocab = sorted(self.df)
        self.vectors = {}
        for cid, tf in tfs.items():
            vec = [tf.get(t, 0) * self.idf(t) for t in self.vocab]
            self.vectors[cid] = (vec, math.sqrt(sum(x * x for x in vec)))

    def idf(self, term: str) -> float:
        return math.log((1 + self.n) / (1 + self.df.get(term, 0))) + 1

    def rank(self, query: str, k: int) -> list[tuple[str, float]]:
        q = Counter(tokenize(query))
        # unseen query terms have no chunk weight but still count in the query norm
        qn = math.sqrt(sum((c * self.idf(t)) ** 2 for t, c in q.items()))
        qv = [q.get(t, 0) * self.idf(t) for t in self.vocab]
        out = []
        for cid, (cv, cn) in self.vectors.items():
            if qn == 0 or cn == 0:
                continue
            s = sum(a * b for a, b in zip(qv, cv)) / (qn * cn)
            if s > 0:
                out.append((cid, s))
        out.sort(key=lambda p: (-p[1], p[0]))
        return out[:k]


def tfidf_rank(chunks: list[Chunk], query: str, k: int) -> list[tuple[str, float]]:
    return TfidfOracle(chunks).rank(query, k)


def ranking_error(got: list[tuple[str, float]], everything: list[tuple[str, float]], k: int) -> float:
    """Worst score disagreement between a top-k result and the oracle's full ranking.

    Ids may swap only inside a tie: each returned id must carry its own oracle
    score, and position i must score like the oracle's i-th entry. Returns inf
    when ids repeat or the length is wrong.
    """
    want = everything[:k]
    exact = dict(everything)
    ids = [c for c, _ in got]
    if len(got) != len(want) or len(set(ids)) != len(ids) or not set(ids) <= exact.keys():
        return math.inf
    return max(
        [0.0]
        + [abs(s - exact[c]) for c, s in got]
        + [abs(s - w) for (_, s), (_, w) in zip(got, want)]
    )


def boolean_match(expr, tokens: set[str]) -> bool:
    """Evaluate a Boolean AST against one chunk's token set."""
    if isinstance(expr, Term):
        return expr.token in tokens
    if isinstance(expr, Not):
        return not boolean_match(expr.operand, tokens)
    if isinstance(expr, And):
        return boolean_match(expr.left, tokens) and boolean_match(expr.right, tokens)
    if isinstance(expr, Or):
        return boolean_match(expr.left, tokens) or boolean_match(expr.right, tokens)
    raise TypeError(expr)


def random_boolean(rng: random.Random, vocab: list[str], depth: int = 4):
    """A random expression as (AST, source text)."""
    if depth == 0 or rng.random() < 0.3:
        w = rng.choice(vocab)
        return Term(w), w
    op = rng.choice(["AND", "OR", "NOT"])
    if op == "NOT":
        sub, text = random_boolean(rng, vocab, depth - 1)
        return Not(sub), f"NOT ({text})"
    left, lt = random_boolean(rng, vocab, depth - 1)
    right, rt = random_boolean(rng, vocab, depth - 1)
    node = And(left, right) if op == "AND" else Or(left, right)
    return node, f"({lt}) {op} ({rt})"


def fnv64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) % (1 << 64)
    return h


def hashed_vector(text: str, dim: int) -> list[float]:
    """Signed hashed bag of words, unit length, as plain floats."""
    v = [0.0] * dim
    for tok in tokenize(text):
        raw = tok.encode("utf-8")
        v[fnv64(raw) % dim] += 1.0 if fnv64(raw + b"\xff") % 2 == 0 else -1.0
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v] if norm else v


def to_f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


class FullScanOracle:
    """Cosine of the query against every float32-stored row, summed dimension by dimension."""

    def __init__(self, chunks: list[Chunk], dim: int):
        self.dim = dim
        self.rows = [(c.chunk_id, [to_f32(x) for x in hashed_vector(c.text, dim)]) for c in chunks]

    def rank(self, query: str, k: int) -> list[tuple[str, float]]:
        q = hashed_vector(query, self.dim)
        scored = []
        for cid, row in self.rows:
            s = 0.0
            for a, b in zip(row, q):
                s += a * b
            scored.append((cid, s))
        scored.sort(key=lambda p: (-p[1], p[0]))
        return scored[:k]


def full_scan(chunks: list[Chunk], query: str, dim: int, k: int) -> list[tuple[str, float]]:
    return FullScanOracle(chunks, dim).rank(query, k)


def rrf_reference(rankings: list[list[str]], k: float) -> dict[str, float]:
    scores: dict[str, float] = {}
    for ranking in rankings:
        for pos, cid in enumerate(ranking):
            scores[cid] = scores.get(cid, 0.0) + 1.0 / (k + pos + 1)
    return scores


def random_chunks(rng: random.Random, n: int, vocab: list[str], max_len: int = 12, prefix: str = "c") -> list[Chunk]:
    out = []
    for i in range(n):
        words = [rng.choice(vocab) for _ in range(rng.randint(1, max_len))]
        text = " ".join(words)
        out.append(Chunk(f"{prefix}{i:05d}", f"d{i}", 0, 0, len(text), text))
    return out


def make_vocab(rng: random.Random, size: int) -> list[str]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    words: set[str] = set()
    while len(words) < size:
        words.add("".join(rng.choice(letters) for _ in range(rng.randint(2, 7))))
    # "and", "or" and "not" would read as operators in Boolean queries
    return sorted(words - {"and", "or", "not"})


def cosine_reference(a: str, b: str, dim: int) -> float:
    u, v = hashed_vector(a, dim), hashed_vector(b, dim)
    return min(1.0, max(0.0, sum(x * y for x, y in zip(u, v))))


def greedy_f1_reference(pred: str, gold: str, dim: int) -> float:
    """Each token matched to its most similar token on the other side; F1 of the two means."""
    p, g = tokenize(pred), tokenize(gold)
    if not p and not g:
        return 1.0
    if not p or not g:
        return 0.0

    def sim(a: str, b: str) -> float:
        return sum(x * y for x, y in zip(hashed_vector(a, dim), hashed_vector(b, dim)))

    precision = sum(max(sim(a, b) for b in g) for a in p) / len(p)
    recall = sum(max(sim(a, b) for a in p) for b in g) / len(g)
    precision, recall = max(precision, 0.0), max(recall, 0.0)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
