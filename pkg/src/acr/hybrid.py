"""Two-stage retrieval: TF-IDF coarse filter, then dense re-ranking of the survivors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import VectorIndex, embed_query, rank, score_rows
from .lexical import LexicalIndex, search_lexical
from .providers import Embedder


@dataclass(frozen=True)
class HybridConfig:
    coarse_k: int = 100
    final_k: int = 10
    # weight of the lexical score in the final score; 0 means pure dense re-rank
    lexical_weight: float = 0.0

    def __post_init__(self) -> None:
        if self.final_k < 1 or self.coarse_k < 1:
            raise ValueError("coarse_k and final_k must be >= 1")
        if not 0.0 <= self.lexical_weight <= 1.0:
            raise ValueError("lexical_weight must lie in [0, 1]")


def search_hybrid(
    lex: LexicalIndex,
    vec: VectorIndex,
    embedder: Embedder,
    query: str,
    cfg: HybridConfig | None = None,
) -> list[tuple[str, float]]:
    cfg = cfg or HybridConfig()
    if lex.n_chunks != len(vec) or set(lex.chunk_ids) != set(vec.chunk_ids):
        raise ValueError("lexical and vector indexes cover different chunk sets")
    coarse = search_lexical(lex, query, cfg.coarse_k)
    if not coarse:
        return []
    ids = [cid for cid, _ in coarse]
    rows = np.array([vec.row_of(cid) for cid in ids], dtype=np.intp)
    scores = score_rows(vec, embed_query(vec, query, embedder), rows)
    if cfg.lexical_weight:
        lex_scores = np.array([s for _, s in coarse])
        scores = (1.0 - cfg.lexical_weight) * scores + cfg.lexical_weight * lex_scores
    return rank(ids, scores, cfg.final_k)
