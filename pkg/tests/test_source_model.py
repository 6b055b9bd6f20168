import pytest

from conftest import parse_fixture, read_fixture
from needlefinder.errors import ParseError
from needlefinder.source_model import (
    CallGraph,
    build_call_graph,
    extract_facts,
    parse_unit,
    render_expr,
    resolve_type,
)


def facts_of(src: str, name: str):
    unit = parse_unit(src, "t.c")
    return next(f for f in extract_facts(unit) if f.name == name)


def test_parses_all_corpus_fixtures():
    for f in ("bintree.c", "bintree_buggy.c", "minutes.c", "bmh.c", "bmh_buggy.c", "triage_corpus.c"):
        unit = parse_fixture(f)
        assert unit.functions, f


def test_defines_and_typedefs_resolve():
    unit = parse_unit(
        """
        #define N 4
        typedef unsigned short u16;
        typedef u16 mychar;
        mychar buf[N];
        int get(int i) { return buf[i]; }
        """,
        "t.c",
    )
    g = unit.globals[0]
    t = resolve_type(g.type, unit)
    assert t.kind == "array" and t.length == 4
    assert t.elem.kind == "short"


def test_parse_error_has_location():
    with pytest.raises(ParseError) as ei:
        parse_unit("int f(int x) { return x + ; }", "bad.c")
    assert ":" in str(ei.value)


def test_unsupported_array_size_expression_rejected():
    with pytest.raises(ParseError):
        parse_unit("int a[3 + 4]; int f(void) { return a[0]; }", "bad.c")


def test_facts_assert_and_deref_sites():
    f = facts_of(
        """
        int a[8];
        int f(int i, int n) {
            assert(n > 0);
            if (i < 0) i = 0;
            return a[i] + n;
        }
        """,
        "f",
    )
    assert f.assert_count == 1
    assert f.assert_sites[0].condition_text == "(n > 0)"
    assert f.deref_count == 1
    site = f.deref_sites[0]
    assert site.kind == "index" and site.base == "a" and site.index_text == "i"
    assert f.array_length("a") == 8


def test_facts_loop_nesting_and_callees():
    f = facts_of(
        """
        int g(int x) { return x; }
        int f(int n) {
            int s = 0;
            for (int i = 0; i < n; i++)
                for (int j = 0; j < n; j++)
                    s += g(j);
            while (s > 100) s--;
            return s;
        }
        """,
        "f",
    )
    assert f.loop_count == 3
    assert f.max_loop_nesting == 2
    assert f.callees == ["g"]


def test_goto_and_switch_mark_opaque():
    src = """
    int f(int x) { if (x) goto out; x = 1; out: return x; }
    int g(int x) { switch (x) { case 0: return 1; default: return 2; } }
    """
    unit = parse_unit(src, "t.c")
    assert all(f.opaque for f in extract_facts(unit))


def test_callgraph_recursion_direct_and_mutual():
    graph = build_call_graph([parse_fixture("triage_corpus.c")])
    assert graph.is_recursive("fact_rec")
    assert graph.is_recursive("is_even") and graph.is_recursive("is_odd")
    assert not graph.is_recursive("with_helper")
    assert "helper_abs" in graph.reachable("with_helper") or graph.callees("with_helper")


def test_callgraph_unresolved_calls():
    graph = build_call_graph([parse_unit("int f(void) { return mystery(); }", "t.c")])
    assert ("f", "mystery") in graph.unresolved_calls


def test_render_expr_round_trips_through_parser():
    src = "int f(int x, int y) { return (x + 2) * y - x / 3; }"
    unit = parse_unit(src, "t.c")
    ret = unit.functions[0].body.stmts[-1]
    text = render_expr(ret.value)
    unit2 = parse_unit(f"int f(int x, int y) {{ return {text}; }}", "t.c")
    assert render_expr(unit2.functions[0].body.stmts[-1].value) == text
