"""Ground types and typedef resolution.

A GroundType is what triage reasons about: one of the simple scalar kinds,
pointers/arrays over them, or `unresolved` carrying the original name.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import cast as A
from ..errors import TypedefCycle

SCALAR_KINDS = ("int", "short", "long", "char", "void")
_IGNORED_WORDS = {"unsigned", "signed", "const", "volatile", "register", "static", "extern"}


@dataclass(frozen=True)
class GroundType:
    kind: str  # 'int' | 'short' | 'long' | 'char' | 'void' | 'pointer' | 'array' | 'unresolved'
    elem: "GroundType | None" = None
    length: int | None = None
    name: str | None = None

    def render(self) -> str:
        if self.kind == "pointer":
            return self.elem.render() + " *"
        if self.kind == "array":
            return self.elem.render() + (f"[{self.length}]" if self.length is not None else "[]")
        if self.kind == "unresolved":
            return self.name or "?"
        return self.kind

    @property
    def base_kind(self) -> str:
        """Scalar kind under any pointer/array nesting."""
        t = self
        while t.kind in ("pointer", "array"):
            t = t.elem
        return t.kind


INT = GroundType("int")
VOID = GroundType("void")


def _resolve_base(words: tuple[str, ...], typedefs: dict[str, A.TypeExpr], stack: tuple[str, ...]) -> GroundType:
    core = [w for w in words if w not in _IGNORED_WORDS]
    if not core:
        return INT  # bare 'unsigned' etc.
    if len(core) == 1 and core[0] in typedefs:
        name = core[0]
        if name in stack:
            raise TypedefCycle(name)
        target = typedefs[name]
        if isinstance(target, A.TBase) and target.names == ("__opaque__",):
            return GroundType("unresolved", name=name)
        return _resolve(target, typedefs, stack + (name,))
    joined = " ".join(core)
    if joined in ("long long", "long long int", "long int", "long"):
        return GroundType("long")
    if joined in ("short", "short int"):
        return GroundType("short")
    if joined in SCALAR_KINDS:
        return GroundType(joined)
    return GroundType("unresolved", name=joined)


def _resolve(expr: A.TypeExpr, typedefs: dict[str, A.TypeExpr], stack: tuple[str, ...]) -> GroundType:
    if isinstance(expr, A.TBase):
        return _resolve_base(expr.names, typedefs, stack)
    if isinstance(expr, A.TPtr):
        return GroundType("pointer", elem=_resolve(expr.inner, typedefs, stack))
    return GroundType("array", elem=_resolve(expr.inner, typedefs, stack), length=expr.length)


def resolve_type_expr(expr: A.TypeExpr, typedefs: dict[str, A.TypeExpr]) -> GroundType:
    """Fully expand typedef chains; qualifiers are stripped to the base kind."""
    return _resolve(expr, typedefs, ())


def resolve_type(expr: A.TypeExpr, unit: A.SourceUnit) -> GroundType:
    return resolve_type_expr(expr, unit.typedefs)


def parse_type_text(text: str) -> A.TypeExpr:
    """Parse a rendered type expression back into a TypeExpr (for round-trips)."""
    text = text.strip()
    dims: list[int | None] = []
    while text.endswith("]"):
        open_i = text.rindex("[")
        body = text[open_i + 1 : -1]
        dims.append(int(body) if body else None)
        text = text[:open_i].strip()
    ptrs = 0
    while text.endswith("*"):
        ptrs += 1
        text = text[:-1].strip()
    expr: A.TypeExpr = A.TBase(tuple(text.split()))
    for _ in range(ptrs):
        expr = A.TPtr(expr)
    for d in reversed(dims):  # dims were collected outermost-first
        expr = A.TArr(expr, d)
    return expr
