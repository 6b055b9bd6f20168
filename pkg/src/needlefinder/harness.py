"""Checker harnesses: symbolic inputs, invariant assumes, property asserts.

A harness fixes a call sequence (state-building calls, then the checked
call), declares fresh symbolic arguments for every call, assumes the
inferred invariants between the state-building calls and the checked call,
and asserts the derived properties. It can be decided two ways: rendered to
C for an external bounded model checker, or enumerated exhaustively over
finite domains by the built-in interpreter.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field, replace

from .engine import EngineError, Program, Trap, UnwindExceeded
from .errors import UnrenderableInvariant
from .invariants import Invariant, render_condition, widen_to_range
from .source_model.facts import FunctionFacts

VERDICTS = ("Counterexample", "ExhaustedClean", "VerifiedToBound", "ResourceOut", "ToolError")

DIALECTS = {
    "cbmc": {
        "assume": "__CPROVER_assume",
        "nondet": None,  # uninitialized locals are nondeterministic
        "prelude": ["#include <assert.h>"],
    },
    "svcomp": {
        "assume": "__VERIFIER_assume",
        "nondet": "__VERIFIER_nondet_int()",
        "prelude": [
            "#include <assert.h>",
            "extern void __VERIFIER_assume(int);",
            "extern int __VERIFIER_nondet_int(void);",
        ],
    },
}


# ---------------------------------------------------------------------------
# properties


@dataclass(frozen=True)
class Property:
    kind: str  # 'user_assert' | 'array_bound' | 'null_deref' | 'overflow' | 'state_check'
    function: str
    loc: tuple[int, int]
    condition: str  # human-readable condition that must hold
    detail: str = ""

    def describe(self) -> str:
        return f"{self.kind} at {self.function}:{self.loc[0]}:{self.loc[1]}: {self.condition}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "function": self.function,
            "loc": list(self.loc),
            "condition": self.condition,
            "detail": self.detail,
        }


def derive_properties(facts: FunctionFacts, include_overflow: bool = False) -> list[Property]:
    """One property per assert site and per memory deref of the function.

    Sites over harness-internal names (``__nf`` prefix) are skipped so an
    instrumented unit yields the same property set as its original.
    """
    props: list[Property] = []
    for s in facts.assert_sites:
        props.append(Property("user_assert", facts.name, s.loc, s.condition_text or ""))
    for s in facts.deref_sites:
        if s.base.startswith("__nf"):
            continue
        if s.kind == "index":
            length = facts.array_length(s.base)
            bound = str(length) if length is not None else f"{s.base}_len"
            cond = f"0 <= {s.index_text} && {s.index_text} < {bound}"
            props.append(Property("array_bound", facts.name, s.loc, cond, detail=s.base))
        else:
            props.append(Property("null_deref", facts.name, s.loc, f"{s.base} != 0", detail=s.base))
    if include_overflow:
        # function-wide: the engine reports the precise location, matching is by kind
        props.append(Property("overflow", facts.name, (0, 0), "no signed 32-bit overflow"))
    return props


def match_property(props: list[Property], trap: Trap) -> Property:
    """The declared property a trap violates, synthesized if none was derived."""
    for p in props:
        if p.kind == trap.kind and p.function == trap.function and p.loc == trap.loc:
            return p
    if trap.kind == "overflow":
        for p in props:
            if p.kind == "overflow" and p.function == trap.function:
                return p
    return Property(trap.kind, trap.function, trap.loc, f"trap({trap.kind})", detail=str(trap.detail or ""))


# ---------------------------------------------------------------------------
# configuration and symbolic layout


@dataclass(frozen=True)
class HarnessConfig:
    dialect: str = "cbmc"
    call_sequence: tuple[str, ...] = ()
    domain_bounds: dict = field(default_factory=dict)  # var/param/'*' -> (lo, hi)
    array_size_bounds: dict = field(default_factory=dict)  # array param -> allocated cells
    length_params: dict = field(default_factory=dict)  # array param -> length param
    unwind: int = 4
    prefer_ranges: bool = True
    include_overflow: bool = False
    state_check: str | None = None  # repOK-style function asserted after the checked call
    budget: int = 10**7
    safety_factor: int = 2
    timeout: float = 300.0
    target_include: str | None = None

    def __post_init__(self):
        if self.unwind < 1:
            raise ValueError("unwind must be >= 1")
        if self.dialect not in DIALECTS:
            raise ValueError(f"unknown dialect {self.dialect!r}")


@dataclass(frozen=True)
class SymVar:
    name: str  # v1, v2, ...
    kind: str  # 'int' | 'array'
    call_index: int
    param: str
    c_type: str = "int"
    cells: int = 0  # allocated size when kind == 'array'
    length_var: str | None = None  # sym var holding the logical length


@dataclass
class HarnessSource:
    target: str
    text: str
    sym_vars: list[SymVar]
    assumes: list[Invariant]
    properties: list[Property]
    cfg: HarnessConfig
    signatures: dict[str, list[tuple[str, str]]]  # fn -> [(param, 'int'|'array')]


def _length_param_for(array_param: str, params: list[str], cfg: HarnessConfig) -> str | None:
    if array_param in cfg.length_params:
        return cfg.length_params[array_param]
    for cand in (array_param + "len", array_param + "_len", "n_" + array_param):
        if cand in params:
            return cand
    return None


def domain_of(sym: SymVar, cfg: HarnessConfig) -> tuple[int, int]:
    for key in (sym.name, sym.param, "*"):
        if key in cfg.domain_bounds:
            lo, hi = cfg.domain_bounds[key]
            return int(lo), int(hi)
    raise ValueError(f"no domain bound for symbolic variable {sym.name} ({sym.param})")


def layout_sym_vars(
    signatures: dict[str, FunctionFacts], cfg: HarnessConfig
) -> list[SymVar]:
    """Fresh symbolic variables for every parameter of every call, in order."""
    out: list[SymVar] = []
    n = 0
    for ci, fn in enumerate(cfg.call_sequence):
        facts = signatures[fn]
        names = [p for p, _ in facts.params]
        pending: dict[str, int] = {}  # array sym index -> fix up once lengths exist
        by_param: dict[str, str] = {}
        for pname, ptype in facts.params:
            n += 1
            if ptype.kind in ("pointer", "array"):
                cells = cfg.array_size_bounds.get(pname)
                if cells is None:
                    raise ValueError(f"no array_size_bounds entry for {fn} parameter {pname!r}")
                elem = ptype.elem.kind if ptype.elem is not None else "int"
                ctype = {"char": "char", "short": "short", "long": "long"}.get(elem, "int")
                out.append(SymVar(f"v{n}", "array", ci, pname, ctype, cells=cells))
                pending[pname] = len(out) - 1
            else:
                out.append(SymVar(f"v{n}", "int", ci, pname))
            by_param[pname] = f"v{n}"
        for ap, idx in pending.items():
            lp = _length_param_for(ap, names, cfg)
            if lp is not None:
                out[idx] = replace(out[idx], length_var=by_param[lp])
    return out


# ---------------------------------------------------------------------------
# harness text


def _emit_assume_exprs(
    invariants: list[Invariant],
    checked_params: dict[str, str],
    globals_in_scope: frozenset[str],
    cfg: HarnessConfig,
) -> tuple[list[str], list[Invariant]]:
    exprs: list[str] = []
    used: list[Invariant] = []
    for inv in invariants:
        inv2 = widen_to_range(inv) if cfg.prefer_ranges else inv
        for v in inv2.variables:
            if v not in checked_params and v not in globals_in_scope:
                raise UnrenderableInvariant(inv2.pp, v)
        cond = render_condition(inv2)
        for v in inv2.variables:
            if v in checked_params:
                cond = re.sub(rf"\b{re.escape(v)}\b", checked_params[v], cond)
        exprs.append(cond)
        used.append(inv2)
    return exprs, used


def generate_harness(
    signatures: dict[str, FunctionFacts],
    invariants: list[Invariant],
    properties: list[Property],
    cfg: HarnessConfig,
    globals_in_scope: frozenset[str] = frozenset(),
) -> HarnessSource:
    """Render the checker entry point for cfg.dialect.

    Layout: symbolic declarations, domain assumes, state-building calls,
    invariant assumes, the checked call, then the optional state-check
    assert. Invariants may reference globals (including injected counters)
    or parameters of the checked call; anything else is unrenderable.
    """
    if not cfg.call_sequence:
        raise ValueError("call_sequence must be nonempty")
    target = cfg.call_sequence[-1]
    d = DIALECTS[cfg.dialect]
    syms = layout_sym_vars(signatures, cfg)
    last_ci = len(cfg.call_sequence) - 1
    checked_params = {s.param: s.name for s in syms if s.call_index == last_ci}

    lines: list[str] = []
    lines += d["prelude"]
    if cfg.target_include:
        lines.append(f'#include "{cfg.target_include}"')
    lines.append("")
    lines.append("int main(void)")
    lines.append("{")
    for s in syms:
        if s.kind == "array":
            lines.append(f"    {s.c_type} {s.name}[{s.cells}];")
        else:
            lines.append(f"    int {s.name};")
    if d["nondet"] is not None:
        for s in syms:
            if s.kind == "array":
                lines.append(
                    f"    for (int _i = 0; _i < {s.cells}; _i++) {s.name}[_i] = ({s.c_type}){d['nondet']};"
                )
            else:
                lines.append(f"    {s.name} = {d['nondet']};")
    bounded: set[str] = set()
    for s in syms:
        if s.kind != "int":
            continue
        lo, hi = domain_of(s, cfg)
        lines.append(f"    {d['assume']}({lo} <= {s.name} && {s.name} <= {hi});")
        bounded.add(s.name)
    for s in syms:
        if s.kind == "array" and s.length_var is not None and s.length_var not in bounded:
            lines.append(f"    {d['assume']}(0 <= {s.length_var} && {s.length_var} <= {s.cells});")
    if any(v.startswith("br") for inv in invariants for v in inv.variables):
        lines.append("    nf_reset();")

    def call_text(ci: int, fn: str) -> str:
        args = ", ".join(s.name for s in syms if s.call_index == ci)
        return f"    {fn}({args});"

    for ci, fn in enumerate(cfg.call_sequence[:-1]):
        lines.append(call_text(ci, fn))
    assume_exprs, used = _emit_assume_exprs(invariants, checked_params, globals_in_scope, cfg)
    for expr in assume_exprs:
        lines.append(f"    {d['assume']}{expr if expr.startswith('(') else '(' + expr + ')'};")
    lines.append(call_text(last_ci, target))
    props = list(properties)
    if cfg.state_check:
        lines.append(f"    assert({cfg.state_check}() != 0);")
        props.append(
            Property("state_check", cfg.state_check, (0, 0), f"{cfg.state_check}() != 0")
        )
    lines.append("    return 0;")
    lines.append("}")
    sigs = {
        fn: [(p, "array" if t.kind in ("pointer", "array") else "int") for p, t in signatures[fn].params]
        for fn in dict.fromkeys(cfg.call_sequence)
    }
    return HarnessSource(target, "\n".join(lines) + "\n", syms, used, props, cfg, sigs)


# ---------------------------------------------------------------------------
# internal exhaustive backend


@dataclass
class CheckResult:
    verdict: str
    witness: dict | None = None
    violated: Property | None = None
    explored: int = 0
    excluded: int = 0
    caps_hit: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    detail: str = ""
    explored_assignments: list | None = None  # only with collect_explored

    def to_dict(self) -> dict:
        # wall_time is deliberately not serialized: persisted artifacts and
        # reports must be byte-identical across reruns
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "violated": self.violated.to_dict() if self.violated else None,
            "explored": self.explored,
            "excluded": self.excluded,
            "caps_hit": sorted(self.caps_hit),
            "detail": self.detail,
        }


def _count_assignments(syms: list[SymVar], cfg: HarnessConfig) -> int:
    total = 1
    length_vars = {s.length_var for s in syms if s.kind == "array" and s.length_var}
    for s in syms:
        if s.kind == "int" and s.name not in length_vars:
            lo, hi = domain_of(s, cfg)
            total *= hi - lo + 1
    for s in syms:
        if s.kind != "array":
            continue
        clo, chi = domain_of(s, cfg)
        width = chi - clo + 1
        if s.length_var is None:
            total *= width**s.cells
        else:
            lsym = next(x for x in syms if x.name == s.length_var)
            llo, lhi = domain_of(lsym, cfg)
            lhi = min(lhi, s.cells)
            total *= sum(width**L for L in range(llo, lhi + 1))
    return total


def _enumerate(syms: list[SymVar], cfg: HarnessConfig):
    """Yield full assignments, every coordinate in descending order.

    Array cells are enumerated only up to the current value of the coupled
    length variable; the remaining allocated cells are zero.
    """
    scalars = [s for s in syms if s.kind == "int"]
    arrays = [s for s in syms if s.kind == "array"]
    order = scalars + arrays  # lengths get fixed before their arrays

    def rec(i: int, acc: dict):
        if i == len(order):
            yield dict(acc)
            return
        s = order[i]
        if s.kind == "int":
            lo, hi = domain_of(s, cfg)
            for v in range(hi, lo - 1, -1):
                acc[s.name] = v
                yield from rec(i + 1, acc)
            del acc[s.name]
        else:
            clo, chi = domain_of(s, cfg)
            if s.length_var is not None:
                n = min(int(acc[s.length_var]), s.cells)
            else:
                n = s.cells
            cells = [0] * s.cells

            def fill(j: int):
                if j == n:
                    acc[s.name] = list(cells)
                    yield from rec(i + 1, acc)
                    acc.pop(s.name, None)
                    return
                for v in range(chi, clo - 1, -1):
                    cells[j] = v
                    yield from fill(j + 1)
                cells[j] = 0

            yield from fill(0)

    yield from rec(0, {})


def _invariant_env(
    harness: HarnessSource, prog: Program, assignment: dict
) -> dict[str, int]:
    last_ci = len(harness.cfg.call_sequence) - 1
    env: dict[str, int] = {}
    for inv in harness.assumes:
        for v in inv.variables:
            if v in env:
                continue
            sym = next(
                (s for s in harness.sym_vars if s.call_index == last_ci and s.param == v), None
            )
            if sym is not None:
                env[v] = assignment[sym.name]
            elif v in prog.G:
                env[v] = prog.G[v]
            else:
                raise UnrenderableInvariant(inv.pp, v)
    return env


def _run_assignment(prog: Program, harness: HarnessSource, assignment: dict):
    """Execute one assignment. Returns ('cex', trap) | ('excluded', None) |
    ('clean', None) | ('capped', None)."""
    cfg = harness.cfg
    prog.reset()
    prog.rt.overflow_check = cfg.include_overflow
    prog.rt.loop_cap = cfg.unwind * cfg.safety_factor
    if "nf_reset" in prog.F:
        prog.call("nf_reset")

    def args_for(ci: int) -> list:
        out = []
        for s in harness.sym_vars:
            if s.call_index == ci:
                v = assignment[s.name]
                out.append(list(v) if isinstance(v, list) else v)
        return out

    seq = cfg.call_sequence
    try:
        for ci in range(len(seq) - 1):
            prog.call(seq[ci], *args_for(ci))
    except Trap as t:
        return "cex", t
    except UnwindExceeded:
        return "capped", None

    env = _invariant_env(harness, prog, assignment)
    for inv in harness.assumes:
        if not inv.eval(env):
            return "excluded", None

    try:
        prog.call(seq[-1], *args_for(len(seq) - 1))
        if cfg.state_check:
            ok = prog.call(cfg.state_check)
            if ok == 0:
                sc = next(p for p in harness.properties if p.kind == "state_check")
                return "cex", Trap("state_check", sc.loc, sc.function)
    except Trap as t:
        return "cex", t
    except UnwindExceeded:
        return "capped", None
    return "clean", None


def exhaustive_check(
    prog: Program, harness: HarnessSource, collect_explored: bool = False
) -> CheckResult:
    """Enumerate every domain assignment and decide the harness exactly.

    Assignments violating an assume are excluded; the first property
    violation in enumeration order wins. A clean sweep is ExhaustedClean,
    or VerifiedToBound when some execution hit the loop cap.
    """
    cfg = harness.cfg
    t0 = time.monotonic()
    total = _count_assignments(harness.sym_vars, cfg)
    if total > cfg.budget:
        return CheckResult(
            "ResourceOut",
            detail=f"{total} assignments exceed budget {cfg.budget}",
            wall_time=time.monotonic() - t0,
        )
    prog.rt.caps_hit = set()
    explored = 0
    excluded = 0
    capped = False
    kept = [] if collect_explored else None
    try:
        for assignment in _enumerate(harness.sym_vars, cfg):
            status, trap = _run_assignment(prog, harness, assignment)
            if status == "excluded":
                excluded += 1
                continue
            explored += 1
            if kept is not None:
                kept.append(_freeze(assignment))
            if status == "cex":
                return CheckResult(
                    "Counterexample",
                    witness=_freeze(assignment),
                    violated=match_property(harness.properties, trap),
                    explored=explored,
                    excluded=excluded,
                    caps_hit=sorted(prog.rt.caps_hit),
                    wall_time=time.monotonic() - t0,
                    explored_assignments=kept,
                )
            if status == "capped":
                capped = True
    except EngineError as e:
        return CheckResult(
            "ToolError",
            detail=str(e),
            explored=explored,
            excluded=excluded,
            wall_time=time.monotonic() - t0,
        )
    verdict = "VerifiedToBound" if capped else "ExhaustedClean"
    return CheckResult(
        verdict,
        explored=explored,
        excluded=excluded,
        caps_hit=sorted(prog.rt.caps_hit),
        wall_time=time.monotonic() - t0,
        explored_assignments=kept,
    )


def _freeze(assignment: dict) -> dict:
    return {k: (list(v) if isinstance(v, list) else v) for k, v in assignment.items()}


def replay_witness(prog: Program, harness: HarnessSource, witness: dict) -> Property | None:
    """Re-execute a witness (assumes not enforced); the violated property or None."""
    status, trap = _run_assignment(prog, harness, witness)
    if status == "cex":
        return match_property(harness.properties, trap)
    return None


# ---------------------------------------------------------------------------
# unwind schedule


def suggest_unwind(
    facts: FunctionFacts, invariants: list[Invariant], cap: int = 64
) -> list[int]:
    """Unwind schedule: start from invariant bounds if any, else 2,4,8,16."""
    his: list[int] = []
    for inv in invariants:
        r = widen_to_range(inv)
        if r.form == "range":
            his.append(r.hi)
    if not his:
        return [k for k in (2, 4, 8, 16) if k <= cap] or [cap]
    k = max(his) + 1
    out = [k]
    while out[-1] < cap:
        out.append(min(out[-1] * 2, cap))
    return out


def check_with_schedule(
    prog: Program, harness: HarnessSource, schedule: list[int]
) -> tuple[CheckResult, int]:
    """Re-check at increasing unwind bounds until no loop cap is hit."""
    result = None
    used = schedule[0]
    for k in schedule:
        harness.cfg = replace(harness.cfg, unwind=k)
        result = exhaustive_check(prog, harness)
        used = k
        if result.verdict != "VerifiedToBound":
            break
    return result, used


# ---------------------------------------------------------------------------
# external tool adapter


_CBMC_ASSIGN = re.compile(r"^\s+(\w+)=(-?\d+)\b")


def run_external_bmc(harness_path: str, cfg: HarnessConfig, bmc_cmd: str) -> CheckResult:
    """Drive a dialect-compatible checker via a command template.

    The template may use {file} and {k} (or {unwind}) placeholders, e.g.
    ``cbmc {file} --unwind {k}``.
    """
    t0 = time.monotonic()
    cmd = bmc_cmd.format(file=harness_path, k=cfg.unwind, unwind=cfg.unwind)
    try:
        proc = subprocess.run(
            shlex.split(cmd), capture_output=True, text=True, timeout=cfg.timeout
        )
    except FileNotFoundError:
        return CheckResult("ToolError", detail="NotFound", wall_time=time.monotonic() - t0)
    except subprocess.TimeoutExpired:
        return CheckResult(
            "ResourceOut", detail=f"timeout after {cfg.timeout}s", wall_time=time.monotonic() - t0
        )
    out = proc.stdout + proc.stderr
    wall = time.monotonic() - t0
    if proc.returncode == 127:
        return CheckResult("ToolError", detail="NotFound", wall_time=wall)
    if "VERIFICATION FAILED" in out:
        witness: dict[str, int] = {}
        violated = None
        for line in out.splitlines():
            m = _CBMC_ASSIGN.match(line)
            if m and m.group(1).startswith("v"):
                witness.setdefault(m.group(1), int(m.group(2)))
        vm = re.search(r"Violated property:\s*\n\s*(.+)\n\s*(.+)", out)
        if vm:
            violated = Property("user_assert", "?", (0, 0), vm.group(2).strip(), detail=vm.group(1).strip())
        return CheckResult("Counterexample", witness=witness or None, violated=violated, wall_time=wall)
    if "VERIFICATION SUCCESSFUL" in out:
        return CheckResult("VerifiedToBound", wall_time=wall)
    return CheckResult("ToolError", detail=out[-2000:], wall_time=wall)
