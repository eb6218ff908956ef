import json

import pytest
from hypothesis import given, strategies as st

from mathsem.config import Config
from mathsem.context import DefiniensCandidate
from mathsem.errors import PathMismatch, SchemaError
from mathsem.evalharness import (
    Counts,
    GoldCase,
    GoldDefiniens,
    GoldSense,
    MetricsReport,
    evaluate_corpus,
    evaluate_definiens,
    evaluate_senses,
    load_gold,
    parse_gold,
    perfect_predictions,
)
from mathsem.mst import parse_latex
from mathsem.tagger import tag

CASE = GoldCase("c", "Let $x$ be a number.", (GoldDefiniens("x", ("number", "real number")),
                                                GoldDefiniens("y", ("length",))))


def cand(ident, definiens, score):
    return DefiniensCandidate(ident, definiens, 0.0, 0.0, score)


@pytest.mark.parametrize("counts,p,r,f1", [
    (Counts(2, 2, 0), 0.5, 1.0, 2 / 3),
    (Counts(0, 0, 0), 1.0, 1.0, 1.0),
    (Counts(0, 3, 0), 0.0, 1.0, 0.0),
    (Counts(0, 0, 4), 1.0, 0.0, 0.0),
])
def test_counts(counts, p, r, f1):
    assert (counts.precision, counts.recall, counts.f1) == pytest.approx((p, r, f1))


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_metric_bounds(tp, fp, fn):
    c = Counts(tp, fp, fn)
    for v in (c.precision, c.recall, c.f1):
        assert 0.0 <= v <= 1.0
    assert c.f1 <= max(c.precision, c.recall) + 1e-12


def test_definiens_matching():
    counts = evaluate_definiens([cand("x", "Real Number", 0.9), cand("x", "number", 0.8), cand("x", "set", 0.7)],
                                CASE)
    assert counts == Counts(tp=1, fp=1, fn=1)


def test_cutoff_is_strict():
    assert evaluate_definiens([cand("x", "number", 0.3)], CASE, cutoff=0.3) == Counts(0, 0, 2)
    assert evaluate_definiens([cand("x", "number", 0.31)], CASE, cutoff=0.3) == Counts(1, 0, 1)


def test_duplicate_predictions_count_once():
    assert evaluate_definiens([cand("x", "set", 0.9)] * 3, CASE) == Counts(0, 1, 2)


def test_perfect_fixpoint():
    assert evaluate_definiens(perfect_predictions(CASE), CASE) == Counts(2, 0, 0)


def test_senses(lexicon):
    tagged = tag(parse_latex(r"\gamma+E"), lexicon)
    gold = GoldCase("s", "$\\gamma+E$", (), (GoldSense(0, (0,), "const:EulerMascheroni"),
                                            GoldSense(0, (1,), "const:E")))
    assert evaluate_senses({0: tagged}, gold) == Counts(tp=1, fp=0, fn=1)
    wrong = GoldCase("s", "", (), (GoldSense(0, (0,), "var:gamma"),))
    assert evaluate_senses({0: tagged}, wrong) == Counts(tp=0, fp=1, fn=1)


def test_sense_path_mismatch(lexicon):
    tagged = tag(parse_latex("x"), lexicon)
    with pytest.raises(PathMismatch):
        evaluate_senses({0: tagged}, GoldCase("s", "", (), (GoldSense(0, (4,), "var:generic"),)))


def test_report_table():
    report = MetricsReport({"a": Counts(1, 0, 0), "bb": Counts(0, 1, 1)})
    assert report.total == Counts(1, 1, 1)
    table = report.to_table("title")
    assert table.splitlines()[0] == "title"
    assert table.splitlines()[-1].startswith("aggregate")


@pytest.mark.parametrize("data,pointer", [
    ([], ""),
    ({"cases": {}}, "/cases"),
    ({"cases": [{"id": "", "document": ""}]}, "/cases/0/id"),
    ({"cases": [{"id": "a", "document": "x"}, {"id": "a", "document": "y"}]}, "/cases/1/id"),
    ({"cases": [{"id": "a", "document": "", "identifier_definiens": [{"identifier": "x", "definiens": []}]}]},
     "/cases/0/identifier_definiens/0/definiens"),
    ({"cases": [{"id": "a", "document": "$x$", "sense_assignments": [{"segment": 1, "path": [], "sense": "v:x"}]}]},
     "/cases/0/sense_assignments/0/segment"),
    ({"cases": [{"id": "a", "document": "$x$", "sense_assignments": [{"segment": 0, "path": [2], "sense": "v:x"}]}]},
     "/cases/0/sense_assignments/0/path"),
])
def test_gold_schema(data, pointer, lexicon):
    with pytest.raises(SchemaError) as info:
        parse_gold(data, lexicon)
    assert info.value.pointer == pointer


def test_bundled_corpus(gold_cases):
    assert len(gold_cases) >= 20
    assert len({c.id for c in gold_cases}) == len(gold_cases)


def test_invalid_json(tmp_path):
    path = tmp_path / "gold.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_gold(path)


def test_parallel_matches_serial(gold_cases, lexicon):
    cases = gold_cases[:4]
    serial = evaluate_corpus(cases, Config(), lexicon, jobs=1)
    parallel = evaluate_corpus(cases, Config(), lexicon, jobs=2)
    assert json.dumps(serial.to_dict()) == json.dumps(parallel.to_dict())
    assert list(parallel.definiens.cases) == [c.id for c in cases]


def test_corpus_scores_epsilon_case(gold_cases, lexicon):
    case = next(c for c in gold_cases if c.id == "dlmf-1.5-e2")
    report = evaluate_corpus([case], Config(), lexicon)
    assert report.senses.cases[case.id] == Counts(2, 0, 0)
    assert report.definiens.cases[case.id].tp == 3
