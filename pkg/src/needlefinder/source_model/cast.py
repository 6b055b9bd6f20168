"""Syntax tree for the supported C subset.

Every node carries ``loc`` (line, col) and ``pos`` (byte offset into the
original text) so later stages can report locations and splice text edits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Loc = tuple[int, int]


# ---------------------------------------------------------------------------
# type expressions (pre-resolution)


@dataclass(frozen=True)
class TBase:
    names: tuple[str, ...]  # e.g. ("unsigned", "short") or ("jschar",)


@dataclass(frozen=True)
class TPtr:
    inner: "TypeExpr"


@dataclass(frozen=True)
class TArr:
    inner: "TypeExpr"
    length: int | None  # None for unsized ([] in prototypes)


TypeExpr = TBase | TPtr | TArr


def type_expr_text(t: TypeExpr) -> str:
    if isinstance(t, TBase):
        return " ".join(t.names)
    if isinstance(t, TPtr):
        return type_expr_text(t.inner) + " *"
    return type_expr_text(t.inner) + (f"[{t.length}]" if t.length is not None else "[]")


# ---------------------------------------------------------------------------
# expressions


@dataclass
class Num:
    value: int
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Str:
    value: str
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Name:
    id: str
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Unary:
    op: str  # '-', '+', '!', '~', '*'
    operand: "Expr"
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Bin:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Cond:
    test: "Expr"
    then: "Expr"
    other: "Expr"
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Assign:
    op: str  # '=', '+=', '-=', '*=', '/=', '%='
    target: "Expr"  # Name | Index | Unary('*')
    value: "Expr"
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class IncDec:
    op: str  # '++' or '--'
    target: "Expr"
    prefix: bool = False
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Index:
    base: "Expr"
    index: "Expr"
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Call:
    func: "Expr"
    args: list["Expr"] = field(default_factory=list)
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Cast:
    to: TypeExpr
    operand: "Expr"
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Comma:
    items: list["Expr"] = field(default_factory=list)
    loc: Loc = (0, 0)
    pos: int = 0


Expr = Num | Str | Name | Unary | Bin | Cond | Assign | IncDec | Index | Call | Cast | Comma


# ---------------------------------------------------------------------------
# statements


@dataclass
class Declarator:
    name: str
    type: TypeExpr
    init: Expr | None
    loc: Loc = (0, 0)
    pos: int = 0


@dataclass
class Decl:
    items: list[Declarator]
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


@dataclass
class ExprStmt:
    expr: Expr
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


@dataclass
class If:
    test: Expr
    then: "Stmt"
    other: "Stmt | None"
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


@dataclass
class While:
    test: Expr
    body: "Stmt"
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


@dataclass
class For:
    init: "Stmt | None"  # Decl or ExprStmt over a Comma, or None
    test: Expr | None
    update: list[Expr]
    body: "Stmt"
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


@dataclass
class Return:
    value: Expr | None
    loc: Loc = (0, 0)
    pos: int = 0  # offset of the 'return' keyword
    end: int = 0  # offset one past the closing ';'
    value_pos: int = 0  # offset where the value expression starts (if any)
    semi_pos: int = 0  # offset of the ';'


@dataclass
class Break:
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


@dataclass
class Continue:
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


@dataclass
class Block:
    stmts: list["Stmt"]
    loc: Loc = (0, 0)
    pos: int = 0  # offset of '{'
    end: int = 0  # offset one past '}'


@dataclass
class Empty:
    loc: Loc = (0, 0)
    pos: int = 0
    end: int = 0


Stmt = Decl | ExprStmt | If | While | For | Return | Break | Continue | Block | Empty


# ---------------------------------------------------------------------------
# top level


@dataclass
class Param:
    name: str | None
    type: TypeExpr
    loc: Loc = (0, 0)


@dataclass
class FunctionDef:
    name: str
    ret_type: TypeExpr
    params: list[Param]
    body: Block | None  # None when opaque
    loc: Loc = (0, 0)
    pos: int = 0  # offset of the first token of the definition
    body_pos: int = 0  # offset of the body '{'
    end: int = 0  # offset one past the body '}'
    storage: str | None = None
    opaque: bool = False
    opaque_reason: str | None = None


@dataclass
class GlobalVar:
    name: str
    type: TypeExpr
    init: Expr | None
    loc: Loc = (0, 0)


@dataclass
class SourceUnit:
    path: str
    text: str
    functions: list[FunctionDef] = field(default_factory=list)
    typedefs: dict[str, TypeExpr] = field(default_factory=dict)
    globals: list[GlobalVar] = field(default_factory=list)
    defines: dict[str, int] = field(default_factory=dict)
    prototypes: set[str] = field(default_factory=set)

    def function(self, name: str) -> FunctionDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def global_names(self) -> set[str]:
        return {g.name for g in self.globals}
