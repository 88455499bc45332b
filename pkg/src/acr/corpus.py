"""Documents, fixed-size character chunking and the line-delimited corpus format."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable


class CorpusError(ValueError):
    """Raised for unreadable or invalid corpus and chunk files."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str = ""
    text: str = ""
    source: str = ""
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    ordinal: int
    char_start: int
    char_end: int
    text: str


@dataclass(frozen=True)
class ChunkingConfig:
    chunk_size: int = 1000
    overlap: int = 100

    def __post_init__(self) -> None:
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be positive, got {self.chunk_size}")
        if not 0 <= self.overlap < self.chunk_size:
            raise ValueError(
                f"overlap must satisfy 0 <= overlap < chunk_size, got overlap={self.overlap}, "
                f"chunk_size={self.chunk_size}"
            )

    @property
    def stride(self) -> int:
        return self.chunk_size - self.overlap


def expected_chunk_count(length: int, cfg: ChunkingConfig) -> int:
    """Closed-form number of chunks for a text of ``length`` characters."""
    if length == 0:
        return 0
    if length <= cfg.chunk_size:
        return 1
    return -(-(length - cfg.chunk_size) // cfg.stride) + 1


def chunk_spans(length: int, cfg: ChunkingConfig) -> list[tuple[int, int]]:
    n = expected_chunk_count(length, cfg)
    spans = []
    for i in range(n):
        start = i * cfg.stride
        spans.append((start, min(start + cfg.chunk_size, length)))
    return spans


def chunk_document(doc: Document, cfg: ChunkingConfig | None = None) -> list[Chunk]:
    """Split a document into overlapping windows of ``cfg.chunk_size`` characters.

    Offsets count code points (Python ``str`` indices). The last window is clipped
    to the end of the text, so it may overlap its predecessor by more than
    ``cfg.overlap``.
    """
    cfg = cfg or ChunkingConfig()
    return [
        Chunk(
            chunk_id=f"{doc.doc_id}#{i}",
            doc_id=doc.doc_id,
            ordinal=i,
            char_start=start,
            char_end=end,
            text=doc.text[start:end],
        )
        for i, (start, end) in enumerate(chunk_spans(len(doc.text), cfg))
    ]


def chunk_corpus(docs: Iterable[Document], cfg: ChunkingConfig | None = None) -> list[Chunk]:
    cfg = cfg or ChunkingConfig()
    chunks: list[Chunk] = []
    for doc in docs:
        chunks.extend(chunk_document(doc, cfg))
    return chunks


def reassemble(chunks: list[Chunk]) -> str:
    """Concatenate one document's chunks, dropping the overlapping prefixes."""
    out: list[str] = []
    end = 0
    for ch in chunks:
        out.append(ch.text[end - ch.char_start:])
        end = ch.char_end
    return "".join(out)


def _parse_document(record: object, lineno: int) -> Document:
    if not isinstance(record, dict):
        raise CorpusError(f"line {lineno}: expected an object")
    doc_id = record.get("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"line {lineno}: missing or empty doc_id")
    metadata = record.get("metadata") or {}
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise CorpusError(f"line {lineno}: metadata must map strings to strings")
    for key in ("title", "text", "source"):
        if not isinstance(record.get(key, ""), str):
            raise CorpusError(f"line {lineno}: field {key!r} must be a string")
    return Document(
        doc_id=doc_id,
        title=record.get("title", ""),
        text=record.get("text", ""),
        source=record.get("source", ""),
        metadata=dict(metadata),
    )


def load_corpus(path: str | Path) -> list[Document]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")
    docs: list[Document] = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: malformed record ({exc.msg})") from None
            doc = _parse_document(record, lineno)
            if doc.doc_id in seen:
                raise CorpusError(
                    f"line {lineno}: duplicate doc_id {doc.doc_id!r} (first seen on line {seen[doc.doc_id]})"
                )
            seen[doc.doc_id] = lineno
            docs.append(doc)
    return docs


def save_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(asdict(doc), ensure_ascii=False) + "\n")


def save_chunks(chunks: Iterable[Chunk], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for ch in chunks:
            fh.write(json.dumps(asdict(ch), ensure_ascii=False) + "\n")


def load_chunks(path: str | Path) -> list[Chunk]:
    chunks = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                chunks.append(Chunk(**json.loads(line)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise CorpusError(f"line {lineno}: malformed chunk record ({exc})") from None
    return chunks
