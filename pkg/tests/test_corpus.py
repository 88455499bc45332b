from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acr.corpus import (
    Chunk,
    ChunkingConfig,
    CorpusError,
    Document,
    chunk_corpus,
    chunk_document,
    expected_chunk_count,
    load_chunks,
    load_corpus,
    reassemble,
    save_chunks,
    save_corpus,
)
from oracles import chunk_windows


def spans(text_len, size=1000, overlap=100):
    doc = Document("d", text="x" * text_len)
    return [(c.char_start, c.char_end) for c in chunk_document(doc, ChunkingConfig(size, overlap))]


def test_exact_chunk_size_gives_one_chunk():
    assert spans(1000) == [(0, 1000)]


def test_1900_chars_gives_two_chunks():
    assert spans(1900) == [(0, 1000), (900, 1900)]


def test_2500_chars_gives_three_chunks():
    assert spans(2500) == [(0, 1000), (900, 1900), (1800, 2500)]


def test_empty_text_gives_no_chunks():
    assert spans(0) == []


def test_chunk_ids_and_text():
    doc = Document("ts-1", text="abcdefghij")
    chunks = chunk_document(doc, ChunkingConfig(4, 1))
    assert [c.chunk_id for c in chunks] == ["ts-1#0", "ts-1#1", "ts-1#2"]
    assert [c.text for c in chunks] == ["abcd", "defg", "ghij"]
    assert [c.ordinal for c in chunks] == [0, 1, 2]


def test_offsets_count_code_points():
    doc = Document("u", text="é" * 5 + "漢字" * 3)
    chunks = chunk_document(doc, ChunkingConfig(4, 2))
    for c in chunks:
        assert doc.text[c.char_start:c.char_end] == c.text
    assert chunks[-1].char_end == len(doc.text) == 11


@pytest.mark.parametrize("size,overlap", [(0, 0), (10, 10), (10, 11), (10, -1)])
def test_invalid_config(size, overlap):
    with pytest.raises(ValueError):
        ChunkingConfig(size, overlap)


@settings(max_examples=300, deadline=None)
@given(
    length=st.integers(0, 5000),
    size=st.integers(1, 400),
    data=st.data(),
)
def test_spans_match_sliding_window(length, size, data):
    overlap = data.draw(st.integers(0, size - 1))
    cfg = ChunkingConfig(size, overlap)
    got = spans(length, size, overlap)
    assert got == chunk_windows(length, size, overlap)
    assert len(got) == expected_chunk_count(length, cfg)


@settings(max_examples=200, deadline=None)
@given(text=st.text(max_size=300), size=st.integers(1, 50), data=st.data())
def test_reassemble_round_trip(text, size, data):
    overlap = data.draw(st.integers(0, size - 1))
    chunks = chunk_document(Document("d", text=text), ChunkingConfig(size, overlap))
    assert reassemble(chunks) == text


def _write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def _record(doc_id, text="t"):
    return json.dumps({"doc_id": doc_id, "title": "", "text": text, "source": "", "metadata": {}})


def test_load_empty_file(tmp_path):
    assert load_corpus(_write_lines(tmp_path / "c.jsonl", [])) == []


def test_load_keeps_file_order(tmp_path):
    docs = load_corpus(_write_lines(tmp_path / "c.jsonl", [_record("b"), _record("a")]))
    assert [d.doc_id for d in docs] == ["b", "a"]


def test_duplicate_doc_id_names_line(tmp_path):
    path = _write_lines(tmp_path / "c.jsonl", [_record("a"), _record("b"), _record("a")])
    with pytest.raises(CorpusError, match="line 3"):
        load_corpus(path)


def test_malformed_line_names_line(tmp_path):
    path = _write_lines(tmp_path / "c.jsonl", [_record("a"), "{not json"])
    with pytest.raises(CorpusError, match="line 2"):
        load_corpus(path)


def test_bad_metadata_rejected(tmp_path):
    path = _write_lines(tmp_path / "c.jsonl", [json.dumps({"doc_id": "a", "metadata": {"k": 1}})])
    with pytest.raises(CorpusError, match="metadata"):
        load_corpus(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "absent.jsonl")


def test_corpus_and_chunk_round_trip(tmp_path):
    docs = [Document("a", "A", "alpha " * 50, "src", {"release": "18"}), Document("b", text="beta")]
    save_corpus(docs, tmp_path / "c.jsonl")
    assert load_corpus(tmp_path / "c.jsonl") == docs
    chunks = chunk_corpus(docs, ChunkingConfig(100, 10))
    save_chunks(chunks, tmp_path / "chunks")
    assert load_chunks(tmp_path / "chunks") == chunks
    assert all(isinstance(c, Chunk) for c in chunks)
