from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acr.agent import KnowledgeBase  # noqa: E402
from acr.corpus import ChunkingConfig, chunk_corpus, load_corpus  # noqa: E402
from acr.dense import build_vector_index  # noqa: E402
from acr.kgraph import load_graph  # noqa: E402
from acr.lexical import build_lexical_index  # noqa: E402
from acr.providers import StubEmbedder  # noqa: E402
from acr.stubs import data_path  # noqa: E402


@pytest.fixture(scope="session")
def synthetic_chunks():
    return chunk_corpus(load_corpus(data_path("corpus.jsonl")), ChunkingConfig())


@pytest.fixture(scope="session")
def stub_embedder():
    return StubEmbedder(64)


@pytest.fixture()
def synthetic_kb(synthetic_chunks, stub_embedder):
    return KnowledgeBase.from_chunks(
        synthetic_chunks,
        lexical=build_lexical_index(synthetic_chunks),
        vectors=build_vector_index(synthetic_chunks, stub_embedder),
        embedder=stub_embedder,
        graph=load_graph(data_path("graph.tsv")),
    )


@pytest.fixture()
def spectrum_graph(tmp_path):
    path = tmp_path / "spectrum.tsv"
    path.write_text(
        "# spectrum example\n"
        "E\tsb\tspectrum bands\n"
        "E\tud\tuser demands\n"
        "E\til\tinterference levels\n"
        "T\tsb\tassigned to\tud\n"
        "T\tsb\tinterferes with\til\n",
        encoding="utf-8",
    )
    return load_graph(path)


# One PASS/FAIL line per acceptance criterion, printed after the run.
def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, detail in RESULTS:
        terminalreporter.write_line(f"{status:4}  {name}: {detail}")
    if not any(name == "live-provider smoke" for _, name, _ in RESULTS):
        terminalreporter.write_line("SKIP  live-provider smoke: set ACR_BASE_URL (and optionally ACR_CHAT_MODEL, ACR_EMBED_MODEL)")
