from __future__ import annotations

import json

import pytest

import metric_fixture as mf
from acr.agent import Decision
from acr.evalx import (
    PRESETS,
    DatasetError,
    answer_accuracy,
    evaluate_preset,
    explanation_cosine,
    explanation_embed_f1,
    format_table,
    load_qa,
    preset_config,
    run_comparison,
    token_f1,
    write_report,
)
from acr.providers import StubEmbedder
from acr.stubs import data_path, stub_stack
from oracles import cosine_reference, greedy_f1_reference

EMB = StubEmbedder(64)


def _qa_line(**overrides):
    record = {
        "qa_id": "q1",
        "question": "?",
        "options": [{"label": f"option {i}", "text": f"text {i}"} for i in range(1, 5)],
        "answer_label": "option 2",
        "explanation": "because",
    }
    record.update(overrides)
    return json.dumps(record)


def test_load_valid(tmp_path):
    path = tmp_path / "qa.jsonl"
    path.write_text(_qa_line() + "\n" + _qa_line(qa_id="q2") + "\n")
    items = load_qa(path)
    assert [i.qa_id for i in items] == ["q1", "q2"]
    assert items[0].answer_text == "text 2"
    assert list(items[0].options) == ["option 1", "option 2", "option 3", "option 4"]


def test_load_empty(tmp_path):
    (tmp_path / "qa.jsonl").write_text("")
    assert load_qa(tmp_path / "qa.jsonl") == []


def test_unknown_answer_label_names_line(tmp_path):
    path = tmp_path / "qa.jsonl"
    path.write_text(_qa_line() + "\n" + _qa_line(answer_label="option 9") + "\n")
    with pytest.raises(DatasetError, match="line 2"):
        load_qa(path)


def test_malformed_line(tmp_path):
    path = tmp_path / "qa.jsonl"
    path.write_text(_qa_line() + "\n{oops\n")
    with pytest.raises(DatasetError, match="line 2"):
        load_qa(path)


def test_accuracy_counts():
    golds = mf.GOLD[:4]
    preds = [Decision(g.answer_label, "", "", 1.0) for g in golds[:2]] + [Decision("x", "", "", 1.0)] * 2
    assert answer_accuracy(preds, golds) == 0.5
    assert answer_accuracy([Decision(g.answer_label, "", "", 1.0) for g in golds], golds) == 1.0
    assert answer_accuracy(mf.PRED, mf.GOLD) == mf.ACCURACY
    with pytest.raises(ValueError):
        answer_accuracy(mf.PRED[:2], mf.GOLD)


def test_token_f1_worked_example():
    assert token_f1("the serving network collects data", "serving network collects charging data") == pytest.approx(0.8)


@pytest.mark.parametrize("pred,gold,value", [("a b", "a b", 1.0), ("a b", "c d", 0.0), ("", "", 1.0), ("a", "", 0.0)])
def test_token_f1_edges(pred, gold, value):
    assert token_f1(pred, gold) == value


def test_fixture_values():
    for p, g, tf1, etf1, cos, ef1 in zip(
        mf.PRED, mf.GOLD, mf.TOKEN_F1, mf.EXPLANATION_TOKEN_F1, mf.EXPLANATION_COSINE, mf.EXPLANATION_EMBED_F1
    ):
        assert token_f1(p.answer_text, g.answer_text) == pytest.approx(tf1, abs=1e-12)
        assert token_f1(p.explanation, g.explanation) == pytest.approx(etf1, abs=1e-12)
        assert explanation_cosine(p.explanation, g.explanation, EMB) == pytest.approx(cos, abs=1e-12)
        assert explanation_embed_f1(p.explanation, g.explanation, EMB) == pytest.approx(ef1, abs=1e-12)


def test_metrics_match_oracle_recomputation():
    pairs = [
        ("URLLC needs low latency and high reliability", "low latency with high reliability is the URLLC goal"),
        ("paging saves power", "the device sleeps between paging occasions to save power"),
        ("x", "y z"),
    ]
    for a, b in pairs:
        assert explanation_cosine(a, b, EMB) == pytest.approx(cosine_reference(a, b, 64), abs=1e-12)
        assert explanation_embed_f1(a, b, EMB) == pytest.approx(greedy_f1_reference(a, b, 64), abs=1e-12)


def test_identical_explanations_score_one():
    text = "the serving network collects charging data"
    assert explanation_cosine(text, text, EMB) == pytest.approx(1.0, abs=1e-6)
    assert explanation_embed_f1(text, text, EMB) == pytest.approx(1.0, abs=1e-6)


def test_empty_explanation_cosine_is_zero():
    assert explanation_cosine("", "something", EMB) == 0.0


def test_disjoint_tokens_score_near_zero():
    # alpha, beta, gamma and delta land in four different stub slots
    assert explanation_embed_f1("alpha beta", "gamma delta", EMB) < 0.05


def test_subset_prediction_has_full_precision():
    # pred tokens are all in gold; recall drops for the unmatched "handover"
    pred, gold = "paging cycle", "paging cycle handover"
    assert explanation_embed_f1(pred, gold, EMB) == pytest.approx(2 * 1 * (2 / 3) / (1 + 2 / 3), abs=1e-9)


def test_preset_config_keeps_base_settings():
    base = preset_config("agentic")
    assert preset_config("traditional", base).sources == ("lexical",)
    assert preset_config("none", base).retrieval is False
    with pytest.raises(ValueError, match="unknown preset"):
        preset_config("bogus")


@pytest.fixture(scope="module")
def synthetic_qa():
    return load_qa(data_path("qa.jsonl"))


def test_none_preset_picks_lowest_label(synthetic_kb, synthetic_qa):
    report = evaluate_preset("none", synthetic_qa, synthetic_kb, stub_stack(), EMB)
    lowest = sum(item.answer_label == "option 1" for item in synthetic_qa) / len(synthetic_qa)
    assert report.accuracy == lowest
    assert all(row["evidence"] == [] for row in report.rows)


def test_comparison_ordering(synthetic_kb, synthetic_qa):
    reports = {r.system_id: r for r in run_comparison(synthetic_qa, PRESETS, synthetic_kb, stub_stack(), EMB)}
    assert reports["agentic"].accuracy > max(reports["traditional"].accuracy, reports["semantic"].accuracy)


def test_serial_and_concurrent_runs_agree(synthetic_kb, synthetic_qa):
    a = evaluate_preset("agentic", synthetic_qa, synthetic_kb, stub_stack(), EMB, max_concurrency=1)
    b = evaluate_preset("agentic", synthetic_qa, synthetic_kb, stub_stack(), EMB, max_concurrency=4)
    assert a == b


def test_empty_dataset_and_presets(synthetic_kb):
    with pytest.raises(ValueError, match="empty dataset"):
        run_comparison([], ["none"], synthetic_kb, stub_stack(), EMB)
    with pytest.raises(ValueError, match="no presets"):
        run_comparison(mf.GOLD, [], synthetic_kb, stub_stack(), EMB)


def test_missing_resource_detected_before_running(synthetic_kb, synthetic_qa):
    synthetic_kb.vectors = None
    with pytest.raises(ValueError, match="needs vectors"):
        run_comparison(synthetic_qa, ["none", "semantic"], synthetic_kb, stub_stack(), EMB)


def test_report_and_table(tmp_path, synthetic_kb, synthetic_qa):
    reports = run_comparison(synthetic_qa[:3], ["none", "traditional"], synthetic_kb, stub_stack(), EMB)
    write_report(reports, tmp_path / "r.jsonl")
    rows = [json.loads(line) for line in (tmp_path / "r.jsonl").read_text().splitlines()]
    assert [r["kind"] for r in rows] == ["item"] * 6 + ["summary"] * 2
    table = format_table(reports).splitlines()
    assert table[0].split() == ["system", "n", "accuracy", "answer_f1", "explanation_embed_f1", "explanation_cosine"]
    assert len(table) == 4
