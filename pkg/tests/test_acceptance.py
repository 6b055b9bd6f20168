"""End-to-end acceptance checks over the shipped corpus fixtures.

Each test exercises a full slice of the pipeline (trace -> infer -> harness
-> check) with fixed seeds and explicit wall-clock tolerances.
"""

import random
import shutil
import subprocess
import time

import pytest

from conftest import CORPUS, TRACES, fixture_entry, parse_fixture, program_for
from needlefinder.drivers import Lcg, run_bintree_tester, run_bmh_tester, run_minutes_sweep
from needlefinder.engine import Program
from needlefinder.errors import FormatError
from needlefinder.harness import (
    HarnessConfig,
    check_with_schedule,
    derive_properties,
    exhaustive_check,
    generate_harness,
    replay_witness,
    suggest_unwind,
)
from needlefinder.invariants import InferenceConfig, Invariant, infer_point
from needlefinder.pipeline import _harness_config, select_invariants
from needlefinder.source_model import extract_facts, parse_unit
from needlefinder.traces import SampleStore, TraceRecord, ingest


def _store(records) -> SampleStore:
    store = SampleStore()
    for r in records:
        store.add(r)
    return store


def _harness_for(prog, fx, invs):
    unit = prog.unit
    facts = {f.name: f for f in extract_facts(unit)}
    hcfg = _harness_config(fx["harness"])
    selected = select_invariants(invs, fx["harness"].get("invariants"))
    target = hcfg.call_sequence[-1]
    props = derive_properties(facts[target], include_overflow=hcfg.include_overflow)
    return generate_harness(
        facts, selected, props, hcfg, globals_in_scope=frozenset(unit.global_names())
    ), facts


def test_bintree_end_to_end(manifest):
    """Random testing misses the splice bug; the exhaustive harness does not."""
    t0 = time.monotonic()
    fx = fixture_entry(manifest, "bintree_buggy")
    drv = fx["driver"]

    prog = program_for("bintree_buggy.c", ["add"])
    out = run_bintree_tester(
        prog, seed=drv["seed"], num_tests=drv["num_tests"], max_len=drv["max_len"]
    )
    assert out.failures == [], "the random tester must not trip over this variant"
    assert out.records, "instrumentation must produce trace records"

    # short op sequences keep every branch counter small
    exit_recs = [r for r in out.records if r.pp == "add:exit:0"]
    assert max(max(r.vars.values()) for r in exit_recs) <= 2

    invs = infer_point(_store(out.records), "add:exit:0")
    assert any(i.form in ("one_of", "range") and i.var == "br0" for i in invs)

    harness, _ = _harness_for(prog, fx, invs)
    result = exhaustive_check(program_for("bintree_buggy.c", ["add"]), harness)
    assert result.verdict == "Counterexample"
    assert result.violated.kind == "state_check"
    assert replay_witness(program_for("bintree_buggy.c", ["add"]), harness, result.witness)

    # the unmutated tree is clean over the same domain
    fx_ok = fixture_entry(manifest, "bintree")
    prog_ok = program_for("bintree.c", ["add"])
    harness_ok, _ = _harness_for(prog_ok, fx_ok, invs)
    result_ok = exhaustive_check(prog_ok, harness_ok)
    assert result_ok.verdict == "ExhaustedClean"
    assert result_ok.explored + result_ok.excluded == 20**4

    assert time.monotonic() - t0 < 60.0


def test_minutes_overflow_then_off_by_one(manifest):
    """Without a precondition the conversion overflows; the traced range
    precondition excludes that and exposes the boundary flag bug instead."""
    t0 = time.monotonic()
    fx = fixture_entry(manifest, "minutes")

    prog = program_for("minutes.c", ["to_millis"])
    bare, _ = _harness_for(prog, {**fx, "harness": {**fx["harness"], "invariants": None}}, [])
    r1 = exhaustive_check(prog, bare)
    assert r1.verdict == "Counterexample"
    assert r1.violated.kind == "overflow"
    assert r1.excluded == 0

    invs = infer_point(ingest(TRACES / "minutes.trace"), "to_millis:entry:0")
    assert any(i.form == "range" and i.var == "m" and i.hi == 1439 for i in invs)

    guarded, _ = _harness_for(prog, fx, invs)
    r2 = exhaustive_check(program_for("minutes.c", ["to_millis"]), guarded)
    assert r2.verdict == "Counterexample"
    assert r2.violated.kind == "user_assert"
    assert r2.witness == {"v1": 1}
    assert r2.explored == 1439 and r2.excluded == 38561

    assert time.monotonic() - t0 < 10.0


def test_substring_search_scaled_domain(manifest):
    """Small alphabet/pattern/text domains decide both search variants, and
    the invariant-derived unwind schedule never ends on a hit loop cap."""
    t0 = time.monotonic()
    fx = fixture_entry(manifest, "bmh")
    invs = infer_point(ingest(TRACES / "bmh.trace"), "check_bmh:entry:0")

    prog = program_for("bmh.c", ["check_bmh"])
    harness, facts = _harness_for(prog, fx, invs)
    schedule = suggest_unwind(
        facts["check_bmh"], select_invariants(invs, fx["harness"]["unwind_from"])
    )
    assert schedule == [4, 8, 16, 32, 64]
    result, used = check_with_schedule(prog, harness, schedule)
    assert result.verdict == "ExhaustedClean"
    assert result.caps_hit == []
    assert used == schedule[0]

    fx_bad = fixture_entry(manifest, "bmh_buggy")
    prog_bad = program_for("bmh_buggy.c", ["check_bmh"])
    harness_bad, _ = _harness_for(prog_bad, fx_bad, invs)
    r_bad = exhaustive_check(prog_bad, harness_bad)
    assert r_bad.verdict == "Counterexample"
    assert r_bad.violated.kind == "user_assert"
    assert r_bad.witness == fx_bad["bug"]["certified_witness"]

    assert time.monotonic() - t0 < 30.0


def test_triage_labels_exact(manifest):
    """Triage matches the hand-labeled 20-function corpus exactly."""
    from needlefinder.triage import triage_corpus

    labels = fixture_entry(manifest, "triage_corpus")["labels"]
    verdicts = triage_corpus([parse_fixture("triage_corpus.c")])
    by_name = {v.function: v for v in verdicts}
    assert set(by_name) == set(labels["accept"]) | set(labels["reject"])

    accepted = {v.function for v in verdicts if v.accepted}
    expected = set(labels["accept"])
    # precision and recall both 1.0: the sets coincide
    assert accepted == expected
    for name, (code, _why) in labels["reject"].items():
        v = by_name[name]
        assert not v.accepted
        codes = [r.split("(")[0] for r in v.reasons]
        assert code in codes, f"{name}: expected {code} in {v.reasons}"


def test_randomized_inference_is_sound_and_order_free():
    """1000 random sample stores: every reported invariant holds on every
    sample, range endpoints are attained, the small-set shape appears exactly
    when it should, and record order never changes the result."""
    rng = random.Random(0xC0FFEE)
    cfg = InferenceConfig()
    for _ in range(1000):
        n = rng.randint(cfg.min_support, 30)
        names = [f"x{i}" for i in range(rng.randint(1, 4))]
        cols = {}
        for v in names:
            style = rng.randrange(4)
            if style == 0:
                cols[v] = [rng.randint(-5, 5)] * n
            elif style == 1:
                pool = rng.sample(range(-10, 10), rng.randint(2, 3))
                cols[v] = [rng.choice(pool) for _ in range(n)]
            elif style == 2:
                cols[v] = [rng.randint(-100, 100) for _ in range(n)]
            else:
                a, b = rng.randint(-4, 4) or 1, rng.randint(-8, 8)
                cols[v] = [a * k + b for k in range(n)]
        recs = [TraceRecord("f:entry:0", {v: cols[v][i] for v in names}) for i in range(n)]
        invs = infer_point(_store(recs), "f:entry:0", cfg)

        for r in recs:
            for inv in invs:
                assert inv.eval(r.vars), (inv, r.vars)
        for inv in invs:
            if inv.form == "range":
                assert inv.lo in cols[inv.var] and inv.hi in cols[inv.var]
        for v in names:
            distinct = len(set(cols[v]))
            has_small_set = any(i.form == "one_of" and i.var == v for i in invs)
            assert has_small_set == (2 <= distinct <= cfg.one_of_cap)
            assert any(i.form == "constant" and i.var == v for i in invs) == (distinct == 1)

        shuffled = recs[:]
        rng.shuffle(shuffled)
        assert infer_point(_store(shuffled), "f:entry:0", cfg) == invs


TRIPLE_SRC = """
int last;
int tri(int a, int b, int c) { last = a + b + c; assert(%s); return last; }
"""


def _triple_harness(condition: str, assumes: list[Invariant]):
    unit = parse_unit(TRIPLE_SRC % condition, "triple.c")
    prog = Program(unit)
    facts = {f.name: f for f in extract_facts(unit)}
    cfg = HarnessConfig(call_sequence=("tri",), domain_bounds={"*": (0, 3)}, prefer_ranges=False)
    props = derive_properties(facts["tri"])
    h = generate_harness(facts, assumes, props, cfg, globals_in_scope=frozenset(unit.global_names()))
    return prog, h


def test_explored_set_matches_brute_force_filter():
    """The checker's explored assignments equal a brute-force evaluation of
    the assumed preconditions over the full domain, and witnesses replay."""
    assumes = [
        Invariant("tri:entry:0", "range", "a", 9, lo=1, hi=3),
        Invariant("tri:entry:0", "one_of", "b", 9, values=(0, 2)),
        Invariant("tri:entry:0", "nonzero", "c", 9),
    ]
    prog, h = _triple_harness("a + b + c < 100", assumes)
    res = exhaustive_check(prog, h, collect_explored=True)
    assert res.verdict == "ExhaustedClean"
    got = {(d["v1"], d["v2"], d["v3"]) for d in res.explored_assignments}
    want = {
        (a, b, c)
        for a in range(4)
        for b in range(4)
        for c in range(4)
        if 1 <= a <= 3 and b in (0, 2) and c != 0
    }
    assert got == want
    assert res.explored == len(want)
    assert res.excluded == 4**3 - len(want)

    prog2, h2 = _triple_harness("a + b + c != 5", assumes)
    cex = exhaustive_check(prog2, h2)
    assert cex.verdict == "Counterexample"
    w = cex.witness
    assert w["v1"] + w["v2"] + w["v3"] == 5
    hit = replay_witness(prog2, h2, w)
    assert hit is not None and hit.kind == "user_assert"
    assert replay_witness(prog2, h2, {"v1": 1, "v2": 0, "v3": 1}) is None


def test_instrumentation_preserves_behavior_and_counts_arms():
    """1000 random op sequences: the instrumented tree returns exactly what
    the original does, and each branch counter equals an independent count
    of its arm's executions."""
    orig = Program(parse_fixture("bintree.c"))
    inst_src = __import__("conftest").instrumented("bintree.c", ["add"])
    inst = Program(inst_src.parse())
    counters = inst_src.counters_for("add")
    rng = random.Random(424242)
    ops = ("add", "remove", "find")
    for _ in range(1000):
        orig.reset()
        inst.reset()
        arms: dict[str, int] = {}
        orig.rt.arms = arms
        for _op in range(rng.randint(1, 8)):
            name = ops[rng.randrange(3)]
            v = rng.randrange(20)
            assert orig.call(name, v) == inst.call(name, v)
        assert orig.call("repOK") == inst.call("repOK") == 1
        for c in counters:
            assert inst.G[c.name] == arms.get(f"add:branch:{c.ordinal}", 0)
        orig.rt.arms = None


# ---------------------------------------------------------------------------
# C corpus shim


CC = shutil.which("cc")


@pytest.mark.skipif(CC is None, reason="no C compiler on PATH")
def test_c_probe_shim_round_trip(tmp_path):
    """100000 probe calls from a C program round-trip through the trace file
    byte-for-byte into the ingester, and the malformed-line tolerance sits
    exactly at one line in ten."""
    build = subprocess.run(
        ["make", "-C", str(CORPUS), "shim-smoke"], capture_output=True, text=True
    )
    assert build.returncode == 0, build.stdout + build.stderr
    trace = tmp_path / "smoke.trace"
    run = subprocess.run(
        [str(CORPUS / "build" / "shim_smoke"), "100000"],
        env={"NF_TRACE_FILE": str(trace), "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stdout + run.stderr

    store = ingest(trace)
    assert store.total_records == 100000
    assert store.skipped == 0
    # the C driver and this generator share one linear-congruential stream
    rng = Lcg(2024)
    for rec in store.records():
        assert rec.pp == "smoke:entry:0"
        assert rec.vars == {"i": rng.rand(1 << 20), "j": rng.rand(97) - 48}

    lines = trace.read_text().splitlines(keepends=True)
    n = len(lines)
    at_limit = tmp_path / "at_limit.trace"
    bad = "this is not a record\n"
    at_limit.write_text("".join(lines[: n - n // 10]) + bad * (n // 10))
    assert ingest(at_limit).skipped == n // 10  # exactly 10%: tolerated

    over = tmp_path / "over_limit.trace"
    over.write_text("".join(lines[: n - n // 10 - 1]) + bad * (n // 10 + 1))
    with pytest.raises(FormatError):
        ingest(over)
