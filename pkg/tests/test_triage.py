import pytest

from conftest import parse_fixture
from needlefinder.source_model import build_call_graph, extract_facts, parse_unit
from needlefinder.triage import TriageConfig, triage_corpus, triage_function


def verdicts_for(src: str):
    unit = parse_unit(src, "t.c")
    return {v.function: v for v in triage_corpus([unit])}


def test_assert_free_deref_free_function_rejected():
    v = verdicts_for("int add(int a, int b) { return a + b; }")["add"]
    assert not v.accepted and "NO_SPEC" in v.reasons and v.score == 0.0


def test_deref_counts_as_implicit_spec():
    v = verdicts_for("int get(int *p) { return p[0]; }")["get"]
    assert v.accepted


def test_rejection_reasons_accumulate():
    src = "double f(double x) { while (x > 1) { while (x > 2) { while (x > 3) { while (x > 4) x--; } } } return x; }"
    v = verdicts_for(src)["f"]
    assert not v.accepted
    codes = {r.split("(")[0] for r in v.reasons}
    assert {"NO_SPEC", "BAD_TYPE", "LOOP_NESTING"} <= codes


def test_score_discounts_multiply():
    src = """
    int h(int x) { return x; }
    int f(int n) {
        assert(n >= 0);
        for (int i = 0; i < n; i++) n += h(i);
        return n;
    }
    """
    v = verdicts_for(src)["f"]
    cfg = TriageConfig()
    assert v.accepted
    assert v.score == pytest.approx(cfg.loop_nesting_weight * cfg.callee_weight)


def test_bad_callee_noted_not_rejected():
    src = 'int f(int n) { assert(n > 0); int *p = malloc(n); return p != 0; }'
    v = verdicts_for(src)["f"]
    assert v.accepted
    assert any(n.startswith("BAD_CALLEE(malloc)") for n in v.notes)
    assert any(n.startswith("UNRESOLVED_CALL(malloc)") for n in v.notes)


def test_unresolved_callees_can_be_made_fatal():
    unit = parse_unit("int f(int n) { assert(n); return g(n); }", "t.c")
    cfg = TriageConfig(forbid_unresolved_callees=True)
    graph = build_call_graph([unit])
    v = triage_function(extract_facts(unit)[0], graph, cfg)
    assert not v.accepted
    assert any(r.startswith("UNRESOLVED_CALLEE") for r in v.reasons)


def test_ranking_is_deterministic_and_score_sorted():
    verdicts = triage_corpus([parse_fixture("triage_corpus.c")])
    scores = [v.score for v in verdicts]
    assert scores == sorted(scores, reverse=True)
    again = triage_corpus([parse_fixture("triage_corpus.c")])
    assert [v.function for v in verdicts] == [v.function for v in again]


def test_verdict_serialization_round_trip():
    from needlefinder.triage import TriageVerdict

    for v in triage_corpus([parse_fixture("triage_corpus.c")]):
        assert TriageVerdict.from_dict(v.to_dict()).to_dict() == v.to_dict()
