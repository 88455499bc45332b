"""The index directory: manifest, chunks, lexical and vector indexes, optional graph.

Every artifact is written to a temporary file and renamed into place, and the
manifest records a SHA-256 per file so a half-written directory never loads.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .agent import KnowledgeBase
from .corpus import ChunkingConfig, chunk_corpus, load_chunks, load_corpus, save_chunks
from .dense import build_vector_index, load_vector_index, save_vector_index
from .kgraph import load_graph
from .lexical import build_lexical_index, load_lexical_index, save_lexical_index
from .providers import Embedder

MANIFEST_VERSION = 1
MANIFEST = "manifest.json"
CHUNKS = "chunks"
LEXICAL = "lexical"
VECTORS = "vectors"
GRAPH = "graph"


class ManifestError(RuntimeError):
    pass


@dataclass
class IndexManifest:
    version: int = MANIFEST_VERSION
    chunk_size: int = 1000
    overlap: int = 100
    n_docs: int = 0
    n_chunks: int = 0
    embed_dim: int | None = None
    provider_id: str | None = None
    created_at: str = ""
    checksums: dict[str, str] = field(default_factory=dict)


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def atomic_write(path: Path, write: Callable[[Path], None]) -> None:
    """Call ``write`` on a temp path next to ``path`` and rename it into place on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_manifest(directory: Path, manifest: IndexManifest) -> None:
    atomic_write(
        directory / MANIFEST,
        lambda p: p.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8"),
    )


def read_manifest(directory: str | Path, verify: bool = True) -> IndexManifest:
    directory = Path(directory)
    path = directory / MANIFEST
    if not path.is_file():
        raise ManifestError(f"{directory} has no {MANIFEST}; run `acr ingest` first")
    try:
        manifest = IndexManifest(**json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, TypeError) as exc:
        raise ManifestError(f"unreadable manifest: {exc}") from None
    if manifest.version != MANIFEST_VERSION:
        raise ManifestError(f"unsupported manifest version {manifest.version}")
    if verify:
        for name, digest in manifest.checksums.items():
            f = directory / name
            if not f.is_file():
                raise ManifestError(f"dirty manifest: {name} is listed but missing")
            if sha256_file(f) != digest:
                raise ManifestError(f"dirty manifest: checksum mismatch for {name}")
    return manifest


def ingest(corpus_path: str | Path, out_dir: str | Path, cfg: ChunkingConfig, graph_path: str | Path | None = None) -> IndexManifest:
    out = Path(out_dir)
    docs = load_corpus(corpus_path)
    chunks = chunk_corpus(docs, cfg)
    if graph_path is not None:
        load_graph(graph_path)  # validate before copying
    out.mkdir(parents=True, exist_ok=True)
    for stale in (LEXICAL, VECTORS):
        (out / stale).unlink(missing_ok=True)
    atomic_write(out / CHUNKS, lambda p: save_chunks(chunks, p))
    manifest = IndexManifest(
        chunk_size=cfg.chunk_size,
        overlap=cfg.overlap,
        n_docs=len(docs),
        n_chunks=len(chunks),
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        checksums={CHUNKS: sha256_file(out / CHUNKS)},
    )
    if graph_path is not None:
        atomic_write(out / GRAPH, lambda p: shutil.copyfile(graph_path, p))
        manifest.checksums[GRAPH] = sha256_file(out / GRAPH)
    write_manifest(out, manifest)
    return manifest


def build_indexes(directory: str | Path, lexical: bool, dense: bool, embedder: Embedder | None = None) -> IndexManifest:
    directory = Path(directory)
    manifest = read_manifest(directory)
    chunks = load_chunks(directory / CHUNKS)
    if dense and embedder is None:
        raise ValueError("dense index requested without an embedder")
    # build everything in memory first so a provider failure leaves the directory untouched
    index = build_lexical_index(chunks) if lexical else None
    vindex = build_vector_index(chunks, embedder) if dense else None
    if index is not None:
        atomic_write(directory / LEXICAL, lambda p: save_lexical_index(index, p))
        manifest.checksums[LEXICAL] = sha256_file(directory / LEXICAL)
    if vindex is not None:
        atomic_write(directory / VECTORS, lambda p: save_vector_index(vindex, p))
        manifest.checksums[VECTORS] = sha256_file(directory / VECTORS)
        manifest.embed_dim = vindex.dim
        manifest.provider_id = vindex.provider_id
    write_manifest(directory, manifest)
    return manifest


def open_knowledge_base(
    directory: str | Path,
    embedder: Embedder | None = None,
    graph_path: str | Path | None = None,
) -> tuple[KnowledgeBase, IndexManifest]:
    """Load whatever artifacts the directory holds; absent ones stay ``None``."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    chunks = load_chunks(directory / CHUNKS)
    kb = KnowledgeBase.from_chunks(chunks, embedder=embedder)
    if LEXICAL in manifest.checksums:
        kb.lexical = load_lexical_index(directory / LEXICAL)
    if VECTORS in manifest.checksums:
        # a mismatched query embedder is rejected at search time, not here
        kb.vectors = load_vector_index(directory / VECTORS, provider_id=manifest.provider_id or "")
    if graph_path is not None:
        kb.graph = load_graph(graph_path)
    elif GRAPH in manifest.checksums:
        kb.graph = load_graph(directory / GRAPH)
    return kb, manifest
