"""Per-function static facts: asserts, dereferences, loops, callees, globals."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import cast as A
from .render import render_expr
from .types import GroundType, resolve_type

DEFAULT_ASSERT_MACROS = frozenset({"assert", "JS_ASSERT"})


@dataclass
class Site:
    kind: str  # 'assert' | 'index' | 'deref'
    loc: tuple[int, int]
    base: str | None = None  # innermost array/pointer name for index/deref sites
    index_text: str | None = None
    condition_text: str | None = None  # asserted expression for assert sites
    write: bool = False


@dataclass
class FunctionFacts:
    name: str
    params: list[tuple[str, GroundType]] = field(default_factory=list)
    locals: list[tuple[str, GroundType]] = field(default_factory=list)
    ret_type: GroundType = GroundType("void")
    assert_sites: list[Site] = field(default_factory=list)
    deref_sites: list[Site] = field(default_factory=list)
    loop_count: int = 0
    max_loop_nesting: int = 0
    is_recursive: bool = False
    callees: list[str] = field(default_factory=list)
    unresolved_call_sites: list[tuple[int, int]] = field(default_factory=list)
    reads_globals: list[tuple[str, GroundType]] = field(default_factory=list)
    opaque: bool = False

    @property
    def assert_count(self) -> int:
        return len(self.assert_sites)

    @property
    def deref_count(self) -> int:
        return len(self.deref_sites)

    def array_length(self, name: str) -> int | None:
        """Declared length of a local/param/global array, if statically known."""
        for n, t in [*self.locals, *self.params, *self.reads_globals]:
            if n == name and t.kind == "array":
                return t.length
        return None


class _Walker:
    def __init__(self, unit: A.SourceUnit, fn: A.FunctionDef, assert_macros: frozenset[str]):
        self.unit = unit
        self.fn = fn
        self.assert_macros = assert_macros
        self.facts = FunctionFacts(
            name=fn.name,
            ret_type=resolve_type(fn.ret_type, unit),
            params=[(p.name or f"arg{i}", resolve_type(p.type, unit)) for i, p in enumerate(fn.params)],
        )
        self.depth = 0
        self._global_types = {g.name: resolve_type(g.type, unit) for g in unit.globals}
        self._seen_globals: set[str] = set()
        self._seen_callees: set[str] = set()

    def run(self) -> FunctionFacts:
        if self.fn.opaque or self.fn.body is None:
            self.facts.opaque = self.fn.opaque
            return self.facts
        self.stmt(self.fn.body)
        return self.facts

    # -- statements

    def stmt(self, s: A.Stmt) -> None:
        if isinstance(s, A.Block):
            for x in s.stmts:
                self.stmt(x)
        elif isinstance(s, A.Decl):
            for d in s.items:
                self.facts.locals.append((d.name, resolve_type(d.type, self.unit)))
                if d.init is not None:
                    self.expr(d.init)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.If):
            self.expr(s.test)
            self.stmt(s.then)
            if s.other is not None:
                self.stmt(s.other)
        elif isinstance(s, (A.While, A.For)):
            self.facts.loop_count += 1
            self.depth += 1
            self.facts.max_loop_nesting = max(self.facts.max_loop_nesting, self.depth)
            if isinstance(s, A.For):
                if s.init is not None:
                    self.stmt(s.init)
                if s.test is not None:
                    self.expr(s.test)
                for u in s.update:
                    self.expr(u)
            else:
                self.expr(s.test)
            self.stmt(s.body)
            self.depth -= 1
        elif isinstance(s, A.Return):
            if s.value is not None:
                self.expr(s.value)
        # Break/Continue/Empty: nothing to record

    # -- expressions

    def expr(self, e: A.Expr, write: bool = False) -> None:
        if isinstance(e, A.Name):
            if (
                e.id in self._global_types
                and e.id not in self._seen_globals
                and e.id not in {n for n, _ in self.facts.params}
                and e.id not in {n for n, _ in self.facts.locals}
            ):
                self._seen_globals.add(e.id)
                self.facts.reads_globals.append((e.id, self._global_types[e.id]))
        elif isinstance(e, A.Num) or isinstance(e, A.Str):
            pass
        elif isinstance(e, A.Unary):
            if e.op == "*":
                self.facts.deref_sites.append(
                    Site("deref", e.loc, base=_base_name(e.operand), index_text="0", write=write)
                )
            self.expr(e.operand)
        elif isinstance(e, A.Bin):
            self.expr(e.left)
            self.expr(e.right)
        elif isinstance(e, A.Cond):
            self.expr(e.test)
            self.expr(e.then)
            self.expr(e.other)
        elif isinstance(e, A.Assign):
            self.expr(e.target, write=True)
            self.expr(e.value)
        elif isinstance(e, A.IncDec):
            self.expr(e.target, write=True)
        elif isinstance(e, A.Index):
            self.facts.deref_sites.append(
                Site(
                    "index",
                    e.loc,
                    base=_base_name(e.base),
                    index_text=render_expr(e.index),
                    write=write,
                )
            )
            self.expr(e.base)
            self.expr(e.index)
        elif isinstance(e, A.Call):
            if isinstance(e.func, A.Name):
                name = e.func.id
                if name in self.assert_macros:
                    cond = render_expr(e.args[0]) if e.args else "0"
                    self.facts.assert_sites.append(Site("assert", e.loc, condition_text=cond))
                else:
                    if name not in self._seen_callees:
                        self._seen_callees.add(name)
                        self.facts.callees.append(name)
            else:
                self.facts.unresolved_call_sites.append(e.loc)
                self.expr(e.func)
            for a in e.args:
                self.expr(a)
        elif isinstance(e, A.Cast):
            self.expr(e.operand)
        elif isinstance(e, A.Comma):
            for x in e.items:
                self.expr(x)


def _base_name(e: A.Expr) -> str | None:
    while isinstance(e, (A.Index, A.Cast)):
        e = e.base if isinstance(e, A.Index) else e.operand
    if isinstance(e, A.Name):
        return e.id
    return None


def extract_facts(
    unit: A.SourceUnit, assert_macros: frozenset[str] | set[str] = DEFAULT_ASSERT_MACROS
) -> list[FunctionFacts]:
    """Static facts for every function in the unit (opaque ones flagged, not dropped).

    is_recursive here reflects unit-local cycles only; build_call_graph refines
    it across units.
    """
    out = [_Walker(unit, fn, frozenset(assert_macros)).run() for fn in unit.functions]
    _mark_recursion(out)
    return out


def _mark_recursion(facts: list[FunctionFacts]) -> None:
    edges = {f.name: [c for c in f.callees] for f in facts}
    for f in facts:
        f.is_recursive = _on_cycle(f.name, edges)


def _on_cycle(start: str, edges: dict[str, list[str]]) -> bool:
    stack = list(edges.get(start, ()))
    seen: set[str] = set()
    while stack:
        n = stack.pop()
        if n == start:
            return True
        if n in seen or n not in edges:
            continue
        seen.add(n)
        stack.extend(edges[n])
    return False
