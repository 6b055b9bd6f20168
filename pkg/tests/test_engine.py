import pytest

from needlefinder.engine import EngineError, Program, Trap, UnwindExceeded
from needlefinder.source_model import parse_unit


def prog_of(src: str) -> Program:
    return Program(parse_unit(src, "t.c"))


def test_arithmetic_wraps_at_32_bits():
    p = prog_of("int f(int x) { return x + 1; }")
    assert p.call("f", 2**31 - 1) == -(2**31)
    assert p.call("f", -1) == 0


def test_overflow_trap_when_enabled():
    p = prog_of("int f(int x) { return x * 1000; }")
    assert p.call("f", 3000000) == -1294967296
    p.rt.overflow_check = True
    with pytest.raises(Trap) as ei:
        p.call("f", 3000000)
    assert ei.value.kind == "overflow"


def test_user_assert_trap_carries_location_and_function():
    p = prog_of("int f(int x) {\n    assert(x != 3);\n    return x; }")
    assert p.call("f", 2) == 2
    with pytest.raises(Trap) as ei:
        p.call("f", 3)
    t = ei.value
    assert t.kind == "user_assert" and t.function == "f" and t.loc[0] == 2


def test_array_bound_trap():
    p = prog_of("int a[4]; int f(int i) { return a[i]; }")
    assert p.call("f", 3) == 0
    for bad in (4, -1):
        with pytest.raises(Trap) as ei:
            p.call("f", bad)
        assert ei.value.kind == "array_bound"


def test_null_deref_trap():
    p = prog_of("int f(int *p) { return p[0]; }")
    with pytest.raises(Trap) as ei:
        p.call("f", 0)
    assert ei.value.kind == "null_deref"


def test_pointer_arguments_alias_caller_arrays():
    p = prog_of("void put(int *p, int i, int v) { p[i] = v; }")
    buf = [0, 0, 0]
    p.call("put", buf, 1, 42)
    assert buf == [0, 42, 0]


def test_loop_cap_raises_and_records():
    p = prog_of("int f(int n) { int s = 0; while (s < n) { s++; } return s; }")
    p.rt.loop_cap = 5
    assert p.call("f", 5) == 5
    with pytest.raises(UnwindExceeded):
        p.call("f", 6)
    assert p.rt.caps_hit


def test_division_by_zero_is_tool_error():
    p = prog_of("int f(int x) { return 10 / x; }")
    assert p.call("f", 2) == 5
    with pytest.raises(EngineError):
        p.call("f", 0)


def test_unknown_callee_is_tool_error():
    p = prog_of("int f(int x) { return mystery(x); }")
    with pytest.raises(EngineError):
        p.call("f", 1)


def test_char_and_short_casts_truncate():
    p = prog_of("int f(int x) { return (char)x; }\nint g(int x) { return (short)x; }")
    assert p.call("f", 257) == 1
    assert p.call("g", 65537) == 1


def test_globals_reset_between_runs():
    p = prog_of("int n = 7; int a[3]; void bump(void) { n++; a[0] = 1; }")
    p.call("bump")
    assert p.G["n"] == 8 and p.G["a"][0] == 1
    p.reset()
    assert p.G["n"] == 7 and p.G["a"] == [0, 0, 0]


def test_compound_assignment_and_increments():
    p = prog_of(
        """
        int f(int x) {
            int s = 0;
            s += x;
            s *= 2;
            s -= 1;
            s++;
            --s;
            return s;
        }
        """
    )
    assert p.call("f", 5) == 9


def test_for_loop_with_continue_and_break():
    p = prog_of(
        """
        int f(int n) {
            int s = 0;
            for (int i = 0; i < n; i++) {
                if (i == 2) continue;
                if (i == 5) break;
                s += i;
            }
            return s;
        }
        """
    )
    assert p.call("f", 10) == 0 + 1 + 3 + 4


def test_calling_an_opaque_function_is_tool_error():
    # do-while is outside the supported subset; its body is kept opaque
    p = prog_of("int f(int n) { int c = 0; do { c++; } while (c < n); return c; }")
    with pytest.raises(EngineError):
        p.call("f", 0)


def test_ternary_and_logical_short_circuit():
    p = prog_of(
        """
        int a[2];
        int f(int i) { return (i >= 0 && i < 2) ? a[i] : -1; }
        """
    )
    assert p.call("f", 5) == -1  # a[5] must never be evaluated


def test_arm_hooks_count_branch_executions():
    p = prog_of("int f(int x) { if (x > 0) { x = 1; } else { x = 2; } return x; }")
    arms = {}
    p.rt.arms = arms
    p.call("f", 5)
    p.call("f", -5)
    p.call("f", 7)
    assert arms == {"f:branch:0": 2, "f:branch:1": 1}


def test_locals_shadow_globals_for_whole_body():
    # C would reject use-before-declaration; this interpreter scopes the
    # local over the whole body, which the corpus never relies on
    p = prog_of("int n = 9; int f(void) { int n = 1; return n; }")
    assert p.call("f") == 1
    assert p.G["n"] == 9


def test_unsigned_modulo_via_typedef():
    p = prog_of(
        """
        typedef unsigned char uint8;
        int f(int x) { return (uint8)x; }
        """
    )
    assert p.call("f", 300) == 44
    assert p.call("f", -1) == 255
