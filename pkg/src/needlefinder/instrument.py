"""Source instrumentation: branch counters and entry/exit trace probes.

All instrumentation is expressed as recorded text edits against the original
source, and inserted text never contains a newline, so line numbers are
preserved and stripping the edits recovers the original bytes exactly.
Every inserted fragment carries an /*NF*/ marker.

Counter placement mirrors the extended-invariants style: a counter per
branch arm, where an arm whose sole statement is another `if` is a
pass-through (the inner arms carry the counters), and an absent `else` is
synthesized only when the `then` arm can fall through.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnsupportedConstruct
from .source_model import cast as A
from .source_model import parse_unit
from .source_model.cast import type_expr_text
from .source_model.types import resolve_type

INT_KINDS = ("int", "short", "long", "char")

NF_TRACE_EXTERN = (
    "/*NF*/ extern void nf_trace(const char *pp, const char **names, long long *vals, int n); "
)


@dataclass(frozen=True)
class ProgramPoint:
    id: str  # "<function>:<kind>:<ordinal>"
    function: str
    kind: str  # 'entry' | 'exit' | 'branch'
    ordinal: int
    loc: tuple[int, int]


@dataclass(frozen=True)
class CounterInfo:
    name: str  # module-unique, e.g. br3
    function: str
    ordinal: int  # arm ordinal within its function
    pp_id: str
    loc: tuple[int, int]


@dataclass(frozen=True)
class Edit:
    start: int
    end: int  # == start for pure inserts
    text: str


@dataclass
class InstrumentedSource:
    path: str
    original_text: str
    edits: list[Edit] = field(default_factory=list)
    point_map: dict[str, tuple[int, int]] = field(default_factory=dict)
    counter_decls: list[CounterInfo] = field(default_factory=list)
    instrumented_functions: list[str] = field(default_factory=list)
    defines: dict[str, int] = field(default_factory=dict)
    _decl_pos: int = 0

    @property
    def text(self) -> str:
        out = []
        cur = 0
        for e in sorted(self.edits, key=lambda e: (e.start, e.end)):
            out.append(self.original_text[cur : e.start])
            out.append(e.text)
            cur = e.end
        out.append(self.original_text[cur:])
        return "".join(out)

    def strip(self) -> str:
        """Undo all instrumentation (identity on the recorded original)."""
        return self.original_text

    def counters_for(self, function: str) -> list[CounterInfo]:
        return [c for c in self.counter_decls if c.function == function]

    def parse(self) -> A.SourceUnit:
        return parse_unit(self.text, self.path, self.defines)


# ---------------------------------------------------------------------------
# branch arms


def _sole_if(s: A.Stmt) -> bool:
    """Arm is a pass-through: its only content is another conditional."""
    if isinstance(s, A.If):
        return True
    return isinstance(s, A.Block) and len(s.stmts) == 1 and isinstance(s.stmts[0], A.If)

def _falls_through(s: A.Stmt) -> bool:
    """Whether control can reach the end of the arm (so an else is observable)."""
    last = s
    if isinstance(s, A.Block):
        if not s.stmts:
            return True
        last = s.stmts[-1]
    return not isinstance(last, (A.Return, A.Break, A.Continue))


@dataclass
class Arm:
    kind: str  # 'then' | 'else' | 'else_synth' | 'loop'
    stmt: A.Stmt | None  # None for synthesized else
    attach_after: int  # for else_synth: offset where ` else {...}` goes
    loc: tuple[int, int]
    owner: A.Stmt | None = None  # the If/While/For the arm belongs to


def collect_arms(body: A.Block) -> list[Arm]:
    arms: list[Arm] = []

    def visit(s: A.Stmt) -> None:
        if isinstance(s, A.If):
            counted_then = not _sole_if(s.then)
            if counted_then:
                arms.append(Arm("then", s.then, 0, s.then.loc, s))
            visit(s.then)
            if s.other is not None:
                if not _sole_if(s.other):
                    arms.append(Arm("else", s.other, 0, s.other.loc, s))
                visit(s.other)
            elif counted_then and _falls_through(s.then):
                # synthesizing after a pass-through arm would mis-attach the else
                arms.append(Arm("else_synth", None, s.then.end, s.loc, s))
        elif isinstance(s, (A.While, A.For)):
            if not _sole_if(s.body):
                arms.append(Arm("loop", s.body, 0, s.body.loc, s))
            visit(s.body)
        elif isinstance(s, A.Block):
            for x in s.stmts:
                visit(x)
        elif isinstance(s, A.Decl):
            pass

    visit(body)
    return arms


# ---------------------------------------------------------------------------
# counters


def inject_counters(
    source_text: str,
    path: str = "<memory>",
    functions: list[str] | None = None,
    defines: dict[str, int] | None = None,
) -> InstrumentedSource:
    """Add one `brN` counter per branch arm of each selected function.

    Counters are file-scope ints (module-unique names), plus a generated
    `nf_reset` that zeroes them at the start of each harness/test scope.
    """
    unit = parse_unit(source_text, path, defines)
    inst = InstrumentedSource(path, source_text, defines=dict(unit.defines))
    targets = [
        f
        for f in unit.functions
        if functions is None or f.name in functions
    ]
    if not unit.functions:
        return inst
    inst._decl_pos = min(f.pos for f in unit.functions)
    n = 0
    for fn in targets:
        if fn.opaque or fn.body is None:
            if functions is not None and fn.name in (functions or []):
                raise UnsupportedConstruct(fn.loc, f"cannot instrument opaque function {fn.name!r}")
            continue
        inst.instrumented_functions.append(fn.name)
        for k, arm in enumerate(collect_arms(fn.body)):
            name = f"br{n}"
            n += 1
            pp = ProgramPoint(f"{fn.name}:branch:{k}", fn.name, "branch", k, arm.loc)
            inst.point_map[pp.id] = arm.loc
            inst.counter_decls.append(CounterInfo(name, fn.name, k, pp.id, arm.loc))
            bump = f"/*NF*/ {name} = {name} + 1; "
            if arm.kind == "else_synth":
                inst.edits.append(Edit(arm.attach_after, arm.attach_after, f" else {{ {bump}}}"))
            elif isinstance(arm.stmt, A.Block):
                p = arm.stmt.pos + 1  # just after '{'
                inst.edits.append(Edit(p, p, f" {bump}"))
            else:
                inst.edits.append(Edit(arm.stmt.pos, arm.stmt.pos, f"{{ {bump}"))
                inst.edits.append(Edit(arm.stmt.end, arm.stmt.end, " }"))
    decls = "".join(f"/*NF*/ int {c.name} = 0; " for c in inst.counter_decls)
    resets = "".join(f"{c.name} = 0; " for c in inst.counter_decls)
    blob = f"{decls}/*NF*/ void nf_reset(void) {{ {resets}}} "
    inst.edits.append(Edit(inst._decl_pos, inst._decl_pos, blob))
    return inst


# ---------------------------------------------------------------------------
# probes


def _probe_stmt_text(pp_id: str, pairs: list[tuple[str, str]], uid: int, braced: bool) -> str:
    """One nf_trace call logging (name, C expression) pairs."""
    if not pairs:
        body = f'nf_trace("{pp_id}", 0, 0, 0); '
    else:
        k = len(pairs)
        parts = [f"const char *__nfn{uid}[{k}]; long long __nfv{uid}[{k}]; "]
        for i, (name, expr) in enumerate(pairs):
            parts.append(f'__nfn{uid}[{i}] = "{name}"; __nfv{uid}[{i}] = (long long)({expr}); ')
        parts.append(f'nf_trace("{pp_id}", __nfn{uid}, __nfv{uid}, {k}); ')
        body = "".join(parts)
    return f"{{ /*NF*/ {body}}} " if braced else body


def inject_probes(
    inst: InstrumentedSource, observables: dict[str, list[str]] | None = None
) -> InstrumentedSource:
    """Add entry probes (parameters) and exit probes (counters + __ret).

    `observables` optionally overrides the entry-logged variable list per
    function; by default every integer-kind parameter is logged. Pointer
    parameters are never traced; their integer length observables already
    appear in the signature.
    """
    unit = parse_unit(inst.original_text, inst.path, inst.defines)
    inst.edits.append(Edit(inst._decl_pos, inst._decl_pos, NF_TRACE_EXTERN))
    uid = 0
    for fname in inst.instrumented_functions:
        fn = unit.function(fname)
        counters = inst.counters_for(fname)
        ret = resolve_type(fn.ret_type, unit)
        has_ret = ret.kind in INT_KINDS

        entry_pp = f"{fname}:entry:0"
        exit_pp = f"{fname}:exit:0"
        inst.point_map[entry_pp] = fn.loc
        inst.point_map[exit_pp] = fn.loc

        if observables is not None and fname in observables:
            entry_vars = observables[fname]
        else:
            entry_vars = [
                p.name
                for p in fn.params
                if p.name and resolve_type(p.type, unit).kind in INT_KINDS
            ]
        entry_pairs = [(v, v) for v in entry_vars]
        p = fn.body_pos + 1
        inst.edits.append(Edit(p, p, " " + _probe_stmt_text(entry_pp, entry_pairs, uid, True)))
        uid += 1

        exit_pairs = [(c.name, c.name) for c in counters]
        returns = _collect_returns(fn.body)
        for r in returns:
            if r.value is not None and has_ret:
                j = uid
                uid += 1
                head = f"{{ /*NF*/ long long __nfr{j} = (long long)("
                probe = _probe_stmt_text(exit_pp, exit_pairs + [("__ret", f"__nfr{j}")], j, False)
                tail = f"); {probe}return ({type_expr_text(fn.ret_type)})__nfr{j}; }}"
                inst.edits.append(Edit(r.pos, r.value_pos, head))
                inst.edits.append(Edit(r.semi_pos, r.semi_pos + 1, tail))
            else:
                txt = _probe_stmt_text(exit_pp, exit_pairs, uid, True)
                uid += 1
                inst.edits.append(Edit(r.pos, r.pos, txt))
        if ret.kind == "void" or not returns:
            # fall-through exit at the closing brace
            txt = _probe_stmt_text(exit_pp, exit_pairs, uid, True)
            uid += 1
            end = fn.end - 1
            inst.edits.append(Edit(end, end, txt))
    return inst


def _collect_returns(s: A.Stmt | None) -> list[A.Return]:
    out: list[A.Return] = []

    def visit(x: A.Stmt) -> None:
        if isinstance(x, A.Return):
            out.append(x)
        elif isinstance(x, A.Block):
            for y in x.stmts:
                visit(y)
        elif isinstance(x, A.If):
            visit(x.then)
            if x.other is not None:
                visit(x.other)
        elif isinstance(x, (A.While, A.For)):
            visit(x.body)

    if s is not None:
        visit(s)
    return out


def instrument_source(
    source_text: str,
    path: str = "<memory>",
    functions: list[str] | None = None,
    defines: dict[str, int] | None = None,
    observables: dict[str, list[str]] | None = None,
) -> InstrumentedSource:
    """Counters plus probes in one step."""
    return inject_probes(inject_counters(source_text, path, functions, defines), observables)
