"""Concrete executor for the C subset.

Each SourceUnit is compiled once into Python closures; runs are then cheap
enough for exhaustive input enumeration at desk scale. The runtime hooks
give the checker its properties:

  - array reads/writes go through bounds checks (ArrayBound / NullDeref),
  - int arithmetic is 32-bit, trapping on overflow when enabled else wrapping,
  - assert-macro calls trap (UserAssert),
  - loops respect an iteration cap (bounded checking),
  - branch-arm execution counts can be collected independently of any
    source-level brN counters, and nf_trace calls feed a trace sink.
"""

from __future__ import annotations

import keyword
from dataclasses import dataclass, field
from typing import Callable

from .instrument import collect_arms
from .source_model import cast as A
from .source_model.facts import DEFAULT_ASSERT_MACROS
from .source_model.types import GroundType, resolve_type
from .traces import TraceRecord

I32_MIN, I32_MAX = -(2**31), 2**31 - 1


class Trap(Exception):
    """A property violation observed during execution."""

    def __init__(self, kind: str, loc: tuple[int, int], function: str = "?", detail=None):
        self.kind = kind  # 'user_assert' | 'array_bound' | 'null_deref' | 'overflow'
        self.loc = loc
        self.function = function
        self.detail = detail
        super().__init__(f"{kind} at {function}:{loc[0]}:{loc[1]}")


class UnwindExceeded(Exception):
    def __init__(self, loop_id: str):
        self.loop_id = loop_id
        super().__init__(loop_id)


class EngineError(Exception):
    """Execution failure outside the modeled properties (ToolError grade)."""


class _Cont(Exception):
    pass


@dataclass
class Runtime:
    loop_cap: int = 10**9
    overflow_check: bool = False
    arms: dict[str, int] | None = None
    trace: Callable | None = None
    caps_hit: set[str] = field(default_factory=set)

    def trace_to(self, sink: list[TraceRecord]) -> None:
        def _t(pp, names, vals, n):
            rec_vars = {}
            for i in range(n):
                rec_vars[names[i]] = int(vals[i])
            sink.append(TraceRecord(pp, rec_vars))

        self.trace = _t


def _safe(name: str) -> str:
    return name + "_v" if keyword.iskeyword(name) or name.startswith("__py") else name


class _FnCompiler:
    def __init__(self, prog: "Program", fn: A.FunctionDef):
        self.prog = prog
        self.fn = fn
        self.unit = prog.unit
        self.lines: list[str] = []
        self.tmp = 0
        self.loop_n = 0
        self.loop_stack: list[bool] = []  # True when continue must raise _Cont
        self.types: dict[str, GroundType] = {}
        for p in fn.params:
            if p.name:
                self.types[p.name] = resolve_type(p.type, self.unit)
        self._collect_local_types(fn.body)
        self.locals = set(self.types)  # params + locals shadow globals for the whole body
        # branch-arm hook maps, aligned with instrument.collect_arms ordinals
        self.arm_then: dict[int, int] = {}
        self.arm_else: dict[int, int] = {}
        self.arm_synth: dict[int, int] = {}
        self.arm_loop: dict[int, int] = {}
        if fn.body is not None:
            for k, arm in enumerate(collect_arms(fn.body)):
                if arm.kind == "then":
                    self.arm_then[id(arm.owner)] = k
                elif arm.kind == "else":
                    self.arm_else[id(arm.owner)] = k
                elif arm.kind == "else_synth":
                    self.arm_synth[id(arm.owner)] = k
                else:
                    self.arm_loop[id(arm.owner)] = k

    def _collect_local_types(self, s: A.Stmt | None) -> None:
        if s is None:
            return
        if isinstance(s, A.Block):
            for x in s.stmts:
                self._collect_local_types(x)
        elif isinstance(s, A.Decl):
            for d in s.items:
                self.types[d.name] = resolve_type(d.type, self.unit)
        elif isinstance(s, A.If):
            self._collect_local_types(s.then)
            self._collect_local_types(s.other)
        elif isinstance(s, (A.While, A.For)):
            if isinstance(s, A.For) and s.init is not None:
                self._collect_local_types(s.init)
            self._collect_local_types(s.body)

    # -- type queries --------------------------------------------------------

    def type_of(self, e: A.Expr) -> GroundType | None:
        if isinstance(e, A.Name):
            if e.id in self.locals:
                return self.types.get(e.id)
            return self.prog.global_types.get(e.id)
        if isinstance(e, A.Index):
            t = self.type_of(e.base)
            return t.elem if t is not None and t.kind in ("pointer", "array") else None
        if isinstance(e, A.Unary):
            if e.op == "*":
                t = self.type_of(e.operand)
                return t.elem if t is not None and t.kind in ("pointer", "array") else None
            return self.type_of(e.operand)
        if isinstance(e, A.Cast):
            from .source_model.types import resolve_type_expr

            return resolve_type_expr(e.to, self.unit.typedefs)
        if isinstance(e, A.Bin) and e.op in ("+", "-"):
            for side in (e.left, e.right):
                t = self.type_of(side)
                if t is not None and t.kind in ("pointer", "array"):
                    return t
            return None
        if isinstance(e, A.Str):
            return GroundType("pointer", elem=GroundType("char"))
        if isinstance(e, A.Assign):
            return self.type_of(e.target)
        if isinstance(e, A.Cond):
            return self.type_of(e.then)
        return None

    def _is_ptr(self, e: A.Expr) -> bool:
        t = self.type_of(e)
        return t is not None and t.kind in ("pointer", "array")

    def _is_long(self, e: A.Expr) -> bool:
        t = self.type_of(e)
        return t is not None and t.kind == "long"

    # -- emission --------------------------------------------------------------

    def emit(self, indent: int, line: str) -> None:
        self.lines.append("        " + "    " * indent + line)

    def new_tmp(self) -> str:
        self.tmp += 1
        return f"_t{self.tmp}"

    def wrap32(self, expr: str, loc: tuple[int, int]) -> str:
        t = self.new_tmp()
        return f"(({t}) if {I32_MIN} <= ({t} := ({expr})) <= {I32_MAX} else _ovf({t}, {loc!r}, {self.fn.name!r}))"

    # -- expressions -------------------------------------------------------------

    def ex(self, e: A.Expr) -> str:
        loc = e.loc
        if isinstance(e, A.Num):
            return repr(e.value)
        if isinstance(e, A.Str):
            return repr(e.value)
        if isinstance(e, A.Name):
            if e.id in self.locals:
                return _safe(e.id)
            if e.id in self.prog.global_types:
                return f"G[{e.id!r}]"
            raise EngineError(f"unknown identifier {e.id!r} in {self.fn.name}")
        if isinstance(e, A.Unary):
            v = self.ex(e.operand)
            if e.op == "-":
                return self.wrap32(f"-({v})", loc) if not self._is_long(e.operand) else f"(-({v}))"
            if e.op == "+":
                return f"({v})"
            if e.op == "!":
                return f"(1 if ({v}) == 0 else 0)"
            if e.op == "~":
                return self.wrap32(f"~({v})", loc)
            if e.op == "*":
                return f"_rd({v}, 0, {loc!r}, {self.fn.name!r})"
        if isinstance(e, A.Bin):
            return self.binop(e)
        if isinstance(e, A.Cond):
            return f"(({self.ex(e.then)}) if ({self.ex(e.test)}) != 0 else ({self.ex(e.other)}))"
        if isinstance(e, A.Assign):
            return self.assign_expr(e)
        if isinstance(e, A.Index):
            return f"_rd({self.ex(e.base)}, {self.ex(e.index)}, {loc!r}, {self.fn.name!r})"
        if isinstance(e, A.Call):
            return self.call_expr(e)
        if isinstance(e, A.Cast):
            return self.cast_expr(e)
        if isinstance(e, A.IncDec):
            raise EngineError(f"{e.op} only supported in statement position ({self.fn.name})")
        if isinstance(e, A.Comma):
            raise EngineError(f"comma expression in value position ({self.fn.name})")
        raise EngineError(f"cannot compile {type(e).__name__}")

    def binop(self, e: A.Bin) -> str:
        a, b = self.ex(e.left), self.ex(e.right)
        op, loc = e.op, e.loc
        if op in ("+", "-"):
            if self._is_ptr(e.left) or self._is_ptr(e.right):
                h = "_padd" if op == "+" else "_psub"
                return f"{h}({a}, {b})"
            if self._is_long(e.left) or self._is_long(e.right):
                return f"(({a}) {op} ({b}))"
            return self.wrap32(f"({a}) {op} ({b})", loc)
        if op == "*":
            if self._is_long(e.left) or self._is_long(e.right):
                return f"(({a}) * ({b}))"
            return self.wrap32(f"({a}) * ({b})", loc)
        if op == "/":
            return f"_div({a}, {b}, {loc!r}, {self.fn.name!r})"
        if op == "%":
            return f"_mod({a}, {b}, {loc!r}, {self.fn.name!r})"
        if op == "<<":
            return self.wrap32(f"({a}) << _shv({b})", loc)
        if op == ">>":
            return f"(({a}) >> _shv({b}))"
        if op in ("&", "|", "^"):
            return f"(({a}) {op} ({b}))"
        if op in ("<", ">", "<=", ">=", "==", "!="):
            return f"(({a}) {op} ({b}))"
        if op == "&&":
            return f"(1 if ({a}) != 0 and ({b}) != 0 else 0)"
        if op == "||":
            return f"(1 if ({a}) != 0 or ({b}) != 0 else 0)"
        raise EngineError(f"operator {op!r}")

    def cast_expr(self, e: A.Cast) -> str:
        from .source_model.types import resolve_type_expr

        t = resolve_type_expr(e.to, self.unit.typedefs)
        v = self.ex(e.operand)
        if t.kind == "char":
            return f"(({v}) & 255)"
        if t.kind == "short":
            return f"(({v}) & 65535)"
        if t.kind == "int":
            return f"_c32({v})"
        return f"({v})"

    def call_expr(self, e: A.Call) -> str:
        if not isinstance(e.func, A.Name):
            raise EngineError(f"indirect call in {self.fn.name}")
        name = e.func.id
        args = ", ".join(self.ex(a) for a in e.args)
        if name in self.prog.assert_macros:
            raise EngineError("assert macro used in expression position")
        if name == "nf_trace":
            return f"_tr({args})"
        return f"_call({name!r}, {e.loc!r}, {args})"

    def assign_expr(self, e: A.Assign) -> str:
        # assignment as a value (e.g. inside a condition)
        if e.op != "=":
            raise EngineError("compound assignment in expression position")
        v = self.ex(e.value)
        t = e.target
        if isinstance(t, A.Name):
            if t.id in self.locals:
                return f"({_safe(t.id)} := ({v}))"
            return f"_setg({t.id!r}, {v})"
        if isinstance(t, A.Index):
            return f"_wre({self.ex(t.base)}, {self.ex(t.index)}, {v}, {t.loc!r}, {self.fn.name!r})"
        if isinstance(t, A.Unary) and t.op == "*":
            return f"_wre({self.ex(t.operand)}, 0, {v}, {t.loc!r}, {self.fn.name!r})"
        raise EngineError("unsupported assignment target")

    # -- statements ---------------------------------------------------------------

    def hook(self, indent: int, k: int | None) -> None:
        if k is None:
            return
        aid = f"{self.fn.name}:branch:{k}"
        self.emit(indent, f"if _arms is not None: _arms[{aid!r}] = _arms.get({aid!r}, 0) + 1")

    def st(self, s: A.Stmt, indent: int) -> None:
        if isinstance(s, A.Block):
            if not s.stmts:
                self.emit(indent, "pass")
            for x in s.stmts:
                self.st(x, indent)
        elif isinstance(s, A.Decl):
            for d in s.items:
                t = self.types[d.name]
                name = _safe(d.name)
                if t.kind == "array":
                    if t.length is None:
                        raise EngineError(f"unsized local array {d.name!r}")
                    self.emit(indent, f"{name} = [0] * {t.length}")
                elif d.init is not None:
                    self.emit(indent, f"{name} = {self.ex(d.init)}")
                else:
                    self.emit(indent, f"{name} = 0")
        elif isinstance(s, A.ExprStmt):
            self.expr_stmt(s.expr, indent)
        elif isinstance(s, A.If):
            self.emit(indent, f"if ({self.ex(s.test)}) != 0:")
            self.hook(indent + 1, self.arm_then.get(id(s)))
            self.st(s.then, indent + 1)
            synth = self.arm_synth.get(id(s))
            if s.other is not None:
                self.emit(indent, "else:")
                self.hook(indent + 1, self.arm_else.get(id(s)))
                self.st(s.other, indent + 1)
            elif synth is not None:
                self.emit(indent, "else:")
                self.hook(indent + 1, synth)
                self.emit(indent + 1, "pass")
        elif isinstance(s, A.While):
            self.compile_loop(s, None, s.test, [], s.body, indent)
        elif isinstance(s, A.For):
            self.compile_loop(s, s.init, s.test, s.update, s.body, indent)
        elif isinstance(s, A.Return):
            if s.value is None:
                self.emit(indent, "return None")
            else:
                self.emit(indent, f"return {self.ex(s.value)}")
        elif isinstance(s, A.Break):
            self.emit(indent, "break")
        elif isinstance(s, A.Continue):
            if self.loop_stack and self.loop_stack[-1]:
                self.emit(indent, "raise _Cont()")
            else:
                self.emit(indent, "continue")
        elif isinstance(s, A.Empty):
            self.emit(indent, "pass")
        else:
            raise EngineError(f"cannot compile statement {type(s).__name__}")

    def expr_stmt(self, e: A.Expr, indent: int) -> None:
        if isinstance(e, A.Comma):
            for x in e.items:
                self.expr_stmt(x, indent)
            return
        if isinstance(e, A.Assign):
            self.do_assign(e, indent)
            return
        if isinstance(e, A.IncDec):
            op = "+" if e.op == "++" else "-"
            self.do_assign(
                A.Assign("=", e.target, A.Bin(op, e.target, A.Num(1, e.loc), e.loc), e.loc), indent
            )
            return
        if isinstance(e, A.Call) and isinstance(e.func, A.Name) and e.func.id in self.prog.assert_macros:
            arg = self.ex(e.args[0]) if e.args else "0"
            self.emit(indent, f"if ({arg}) == 0: _as({e.loc!r}, {self.fn.name!r})")
            return
        self.emit(indent, f"{self.ex(e)}")

    def do_assign(self, e: A.Assign, indent: int) -> None:
        if e.op != "=":
            op = e.op[0]
            e = A.Assign("=", e.target, A.Bin(op, e.target, e.value, e.loc, e.pos), e.loc, e.pos)
        v = self.ex(e.value)
        t = e.target
        if isinstance(t, A.Name):
            if t.id in self.locals:
                self.emit(indent, f"{_safe(t.id)} = {v}")
            elif t.id in self.prog.global_types:
                self.emit(indent, f"G[{t.id!r}] = {v}")
            else:
                raise EngineError(f"unknown identifier {t.id!r}")
        elif isinstance(t, A.Index):
            self.emit(indent, f"_wr({self.ex(t.base)}, {self.ex(t.index)}, {v}, {t.loc!r}, {self.fn.name!r})")
        elif isinstance(t, A.Unary) and t.op == "*":
            self.emit(indent, f"_wr({self.ex(t.operand)}, 0, {v}, {t.loc!r}, {self.fn.name!r})")
        else:
            raise EngineError("unsupported assignment target")

    def compile_loop(self, node, init, test, update, body, indent: int) -> None:
        loop_id = f"{self.fn.name}:loop:{self.loop_n}"
        self.loop_n += 1
        if init is not None:
            self.st(init, indent)
        lc = f"_lc{self.loop_n}"
        self.emit(indent, f"{lc} = 0")
        self.emit(indent, "while True:")
        if test is not None:
            self.emit(indent + 1, f"if ({self.ex(test)}) == 0: break")
        self.emit(indent + 1, f"{lc} += 1")
        self.emit(indent + 1, f"if {lc} > _cap: _uw({loop_id!r})")
        self.hook(indent + 1, self.arm_loop.get(id(node)))
        needs_wrap = bool(update) and _has_direct_continue(body)
        self.loop_stack.append(needs_wrap)
        if needs_wrap:
            self.emit(indent + 1, "try:")
            self.st(body, indent + 2)
            self.emit(indent + 1, "except _Cont: pass")
        else:
            self.st(body, indent + 1)
        self.loop_stack.pop()
        for u in update:
            self.expr_stmt(u, indent + 1)

    def compile(self) -> str:
        params = ", ".join(_safe(p.name or f"arg{i}") for i, p in enumerate(self.fn.params))
        self.lines = []
        head = f"    def {_safe(self.fn.name)}_impl({params}):"
        self.emit(0, "_cap = _rt.loop_cap")
        self.emit(0, "_arms = _rt.arms")
        if self.fn.body is None:
            self.emit(0, f"raise EngineError('call to opaque function {self.fn.name}')")
        else:
            self.st(self.fn.body, 0)
        return head + "\n" + "\n".join(self.lines)


def _has_direct_continue(s: A.Stmt) -> bool:
    if isinstance(s, A.Continue):
        return True
    if isinstance(s, A.Block):
        return any(_has_direct_continue(x) for x in s.stmts)
    if isinstance(s, A.If):
        return _has_direct_continue(s.then) or (
            s.other is not None and _has_direct_continue(s.other)
        )
    return False  # nested loops own their continues


class Program:
    """A compiled translation unit plus its mutable global state."""

    def __init__(self, unit: A.SourceUnit, assert_macros=DEFAULT_ASSERT_MACROS):
        self.unit = unit
        self.assert_macros = frozenset(assert_macros)
        self.rt = Runtime()
        self.G: dict[str, object] = {}
        self.F: dict[str, Callable] = {}
        self.global_types = {g.name: resolve_type(g.type, unit) for g in unit.globals}
        self._global_inits = [(g.name, self.global_types[g.name], g.init) for g in unit.globals]
        self._build()
        self.reset()

    # -- runtime helper closures ------------------------------------------------

    def _helpers(self) -> dict:
        rt = self.rt
        G = self.G
        F = self.F

        def _ovf(v, loc, fn):
            if rt.overflow_check:
                raise Trap("overflow", loc, fn, v)
            return ((v - I32_MIN) & 0xFFFFFFFF) + I32_MIN

        def _c32(v):
            return ((v - I32_MIN) & 0xFFFFFFFF) + I32_MIN

        def _rd(b, i, loc, fn):
            tb = type(b)
            if tb is list:
                if 0 <= i < len(b):
                    return b[i]
                raise Trap("array_bound", loc, fn, int(i))
            if tb is tuple:
                base, off = b
                j = off + i
                if 0 <= j < len(base):
                    return base[j]
                raise Trap("array_bound", loc, fn, int(j))
            if b == 0 or b is None:
                raise Trap("null_deref", loc, fn)
            raise EngineError(f"cannot index value of type {tb.__name__}")

        def _wr(b, i, v, loc, fn):
            tb = type(b)
            if tb is list:
                if 0 <= i < len(b):
                    b[i] = v
                    return
                raise Trap("array_bound", loc, fn, int(i))
            if tb is tuple:
                base, off = b
                j = off + i
                if 0 <= j < len(base):
                    base[j] = v
                    return
                raise Trap("array_bound", loc, fn, int(j))
            if b == 0 or b is None:
                raise Trap("null_deref", loc, fn)
            raise EngineError(f"cannot index value of type {tb.__name__}")

        def _wre(b, i, v, loc, fn):
            _wr(b, i, v, loc, fn)
            return v

        def _padd(a, b):
            if type(a) is list:
                a = (a, 0)
            if type(b) is list:
                b = (b, 0)
            if type(a) is tuple:
                return (a[0], a[1] + b)
            return (b[0], b[1] + a)

        def _psub(a, b):
            if type(a) is list:
                a = (a, 0)
            if type(a) is tuple and type(b) is int:
                return (a[0], a[1] - b)
            raise EngineError("unsupported pointer subtraction")

        def _div(a, b, loc, fn):
            if b == 0:
                raise EngineError(f"division by zero at {fn}:{loc[0]}:{loc[1]}")
            q = abs(a) // abs(b)
            return -q if (a < 0) != (b < 0) else q

        def _mod(a, b, loc, fn):
            if b == 0:
                raise EngineError(f"division by zero at {fn}:{loc[0]}:{loc[1]}")
            return a - _div(a, b, loc, fn) * b

        def _shv(b):
            if not 0 <= b < 64:
                raise EngineError(f"shift amount {b} out of range")
            return b

        def _as(loc, fn):
            raise Trap("user_assert", loc, fn)

        def _uw(loop_id):
            rt.caps_hit.add(loop_id)
            raise UnwindExceeded(loop_id)

        def _tr(pp, names, vals, n):
            if rt.trace is not None:
                nm = [] if n == 0 else [names[i] if type(names) is list else names[0][names[1] + i] for i in range(n)]
                vv = [] if n == 0 else [vals[i] if type(vals) is list else vals[0][vals[1] + i] for i in range(n)]
                rt.trace(pp, nm, vv, n)
            return 0

        def _setg(name, v):
            G[name] = v
            return v

        def _call(name, loc, *args):
            f = F.get(name)
            if f is None:
                raise EngineError(f"call to undefined function {name!r} at {loc[0]}:{loc[1]}")
            return f(*args)

        return {
            "_rt": rt, "G": G, "F": F, "_ovf": _ovf, "_c32": _c32, "_rd": _rd, "_wr": _wr,
            "_wre": _wre, "_padd": _padd, "_psub": _psub, "_div": _div, "_mod": _mod,
            "_shv": _shv, "_as": _as, "_uw": _uw, "_tr": _tr, "_setg": _setg, "_call": _call,
            "_Cont": _Cont, "EngineError": EngineError,
        }

    def _build(self) -> None:
        parts = ["def _build_unit(ns):"]
        parts.append("    " + "; ".join(f"{k} = ns[{k!r}]" for k in self._helpers()))
        names = []
        for fn in self.unit.functions:
            comp = _FnCompiler(self, fn)
            parts.append(comp.compile())
            names.append(fn.name)
            parts.append(f"    F[{fn.name!r}] = {_safe(fn.name)}_impl")
        src = "\n".join(parts) + "\n"
        self._source = src
        module_ns: dict = {}
        exec(compile(src, f"<needlefinder:{self.unit.path}>", "exec"), module_ns)
        module_ns["_build_unit"](self._helpers())

    def reset(self) -> None:
        """Reinitialize all globals to their declared initial values."""
        for name, t, init in self._global_inits:
            if t.kind == "array":
                self.G[name] = [0] * (t.length or 0)
            elif init is not None:
                self.G[name] = _const_eval(init)
            else:
                self.G[name] = 0

    def call(self, name: str, *args):
        f = self.F.get(name)
        if f is None:
            raise EngineError(f"no such function {name!r}")
        return f(*args)


def _const_eval(e: A.Expr) -> int:
    if isinstance(e, A.Num):
        return e.value
    if isinstance(e, A.Unary) and e.op == "-":
        return -_const_eval(e.operand)
    if isinstance(e, A.Unary) and e.op == "+":
        return _const_eval(e.operand)
    if isinstance(e, A.Bin) and e.op in ("+", "-", "*"):
        a, b = _const_eval(e.left), _const_eval(e.right)
        return {"+": a + b, "-": a - b, "*": a * b}[e.op]
    raise EngineError("global initializer is not a constant expression")
