"""Recursive-descent parser for the C subset.

File-level syntax errors raise ParseError and reject the unit. Unsupported
constructs *inside a function body* degrade that one function to opaque so
a messy corpus file still yields usable facts for its other functions.
"""

from __future__ import annotations

from . import cast as A
from ..errors import ParseError, TypedefCycle, UnsupportedConstruct
from .lexer import Token, collect_defines, tokenize

BASE_TYPE_WORDS = {"int", "short", "long", "char", "void", "float", "double"}
TYPE_QUALS = {"unsigned", "signed", "const", "volatile", "register"}
STORAGE = {"static", "extern"}
UNSUPPORTED_STMT_KEYWORDS = {
    "switch", "case", "default", "do", "goto", "sizeof", "struct", "union", "enum",
}
ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%="}
BIN_LEVELS = (
    ("||",), ("&&",), ("|",), ("^",), ("&",),
    ("==", "!="), ("<", ">", "<=", ">="), ("<<", ">>"), ("+", "-"), ("*", "/", "%"),
)

OPAQUE_TYPE = A.TBase(("__opaque__",))


class Parser:
    def __init__(self, text: str, path: str = "<memory>", defines: dict[str, int] | None = None):
        self.text = text
        self.path = path
        self.defines = collect_defines(text, defines)
        self.toks: list[Token] = tokenize(text, self.defines)
        self.i = 0
        self.typedefs: dict[str, A.TypeExpr] = {}

    # -- token helpers ------------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("punct", "id") and t.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        t = self.peek()
        if not self.at(text):
            raise ParseError(t.loc, f"expected {text!r}, found {t.text!r}")
        return self.next()

    def is_type_start(self, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "id" and (
            t.text in BASE_TYPE_WORDS or t.text in TYPE_QUALS or t.text in self.typedefs
        )

    # -- types --------------------------------------------------------------

    def parse_base_type(self) -> A.TBase:
        words: list[str] = []
        has_base = False
        while True:
            t = self.peek()
            if t.kind != "id":
                break
            if t.text in TYPE_QUALS:
                words.append(self.next().text)
                continue
            if t.text in BASE_TYPE_WORDS:
                has_base = True
                words.append(self.next().text)
                continue
            if t.text in self.typedefs and not has_base:
                has_base = True
                words.append(self.next().text)
                continue
            break
        if not words:
            raise ParseError(self.peek().loc, f"expected type, found {self.peek().text!r}")
        return A.TBase(tuple(words))

    def parse_pointers(self, base: A.TypeExpr) -> A.TypeExpr:
        t = base
        while self.accept("*"):
            while self.peek().kind == "id" and self.peek().text in TYPE_QUALS:
                self.next()
            t = A.TPtr(t)
        return t

    def parse_array_suffix(self, base: A.TypeExpr) -> A.TypeExpr:
        dims: list[int | None] = []
        while self.accept("["):
            if self.at("]"):
                dims.append(None)
            else:
                t = self.peek()
                if t.kind != "num":
                    raise ParseError(t.loc, "array length must be an integer constant")
                dims.append(int(self.next().value))
            self.expect("]")
        for d in reversed(dims):
            base = A.TArr(base, d)
        return base

    # -- expressions ---------------------------------------------------------

    def parse_assign_expr(self) -> A.Expr:
        lhs = self.parse_cond()
        t = self.peek()
        if t.kind == "punct" and t.text in ASSIGN_OPS:
            if not isinstance(lhs, (A.Name, A.Index)) and not (
                isinstance(lhs, A.Unary) and lhs.op == "*"
            ):
                raise UnsupportedConstruct(t.loc, "assignment to non-lvalue")
            op = self.next().text
            rhs = self.parse_assign_expr()
            return A.Assign(op, lhs, rhs, t.loc, t.pos)
        return lhs

    def parse_cond(self) -> A.Expr:
        e = self.parse_binary(0)
        q = self.accept("?")
        if q:
            a = self.parse_assign_expr()
            self.expect(":")
            b = self.parse_cond()
            return A.Cond(e, a, b, q.loc, q.pos)
        return e

    def parse_binary(self, level: int) -> A.Expr:
        if level >= len(BIN_LEVELS):
            return self.parse_unary()
        left = self.parse_binary(level + 1)
        while True:
            t = self.peek()
            if t.kind == "punct" and t.text in BIN_LEVELS[level]:
                self.next()
                right = self.parse_binary(level + 1)
                left = A.Bin(t.text, left, right, t.loc, t.pos)
            else:
                return left

    def parse_unary(self) -> A.Expr:
        t = self.peek()
        if t.kind == "punct":
            if t.text in ("-", "+", "!", "~"):
                self.next()
                return A.Unary(t.text, self.parse_unary(), t.loc, t.pos)
            if t.text == "*":
                self.next()
                return A.Unary("*", self.parse_unary(), t.loc, t.pos)
            if t.text in ("++", "--"):
                self.next()
                tgt = self.parse_unary()
                return A.IncDec(t.text, tgt, True, t.loc, t.pos)
            if t.text == "&":
                raise UnsupportedConstruct(t.loc, "address-of operator")
            if t.text == "(" and self.is_type_start(1):
                self.next()
                ty = self.parse_pointers(self.parse_base_type())
                self.expect(")")
                return A.Cast(ty, self.parse_unary(), t.loc, t.pos)
        return self.parse_postfix()

    def parse_postfix(self) -> A.Expr:
        e = self.parse_primary()
        while True:
            t = self.peek()
            if self.at("["):
                self.next()
                idx = self.parse_assign_expr()
                self.expect("]")
                e = A.Index(e, idx, t.loc, t.pos)
            elif self.at("("):
                self.next()
                args: list[A.Expr] = []
                if not self.at(")"):
                    args.append(self.parse_assign_expr())
                    while self.accept(","):
                        args.append(self.parse_assign_expr())
                self.expect(")")
                e = A.Call(e, args, t.loc, t.pos)
            elif t.kind == "punct" and t.text in ("++", "--"):
                self.next()
                e = A.IncDec(t.text, e, False, t.loc, t.pos)
            elif t.kind == "punct" and t.text in (".", "->"):
                raise UnsupportedConstruct(t.loc, f"member access {t.text!r}")
            else:
                return e

    def parse_primary(self) -> A.Expr:
        t = self.peek()
        if t.kind == "num":
            self.next()
            return A.Num(int(t.value), t.loc, t.pos)
        if t.kind == "str":
            self.next()
            return A.Str(str(t.value), t.loc, t.pos)
        if t.kind == "id":
            if t.text in UNSUPPORTED_STMT_KEYWORDS:
                raise UnsupportedConstruct(t.loc, f"keyword {t.text!r} in expression")
            self.next()
            return A.Name(t.text, t.loc, t.pos)
        if self.at("("):
            self.next()
            e = self.parse_assign_expr()
            self.expect(")")
            return e
        raise ParseError(t.loc, f"unexpected token {t.text!r} in expression")

    # -- statements -----------------------------------------------------------

    def parse_stmt(self) -> A.Stmt:
        t = self.peek()
        if self.at("{"):
            return self.parse_block()
        if self.at(";"):
            self.next()
            return A.Empty(t.loc, t.pos, t.pos + 1)
        if t.kind == "id":
            if t.text == "if":
                return self.parse_if()
            if t.text == "while":
                return self.parse_while()
            if t.text == "for":
                return self.parse_for()
            if t.text == "return":
                return self.parse_return()
            if t.text in ("break", "continue"):
                self.next()
                semi = self.expect(";")
                cls = A.Break if t.text == "break" else A.Continue
                return cls(t.loc, t.pos, semi.pos + 1)
            if t.text in UNSUPPORTED_STMT_KEYWORDS:
                raise UnsupportedConstruct(t.loc, f"{t.text!r} statement")
            if self.is_type_start() or t.text in STORAGE:
                return self.parse_decl()
        expr = self.parse_assign_expr()
        semi = self.expect(";")
        return A.ExprStmt(expr, t.loc, t.pos, semi.pos + 1)

    def parse_block(self) -> A.Block:
        lb = self.expect("{")
        stmts: list[A.Stmt] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise ParseError(self.peek().loc, "unterminated block")
            stmts.append(self.parse_stmt())
        rb = self.expect("}")
        return A.Block(stmts, lb.loc, lb.pos, rb.pos + 1)

    def parse_if(self) -> A.If:
        kw = self.expect("if")
        self.expect("(")
        test = self.parse_assign_expr()
        self.expect(")")
        then = self.parse_stmt()
        other = None
        if self.at("else"):
            self.next()
            other = self.parse_stmt()
        end = (other or then).end
        return A.If(test, then, other, kw.loc, kw.pos, end)

    def parse_while(self) -> A.While:
        kw = self.expect("while")
        self.expect("(")
        test = self.parse_assign_expr()
        self.expect(")")
        body = self.parse_stmt()
        return A.While(test, body, kw.loc, kw.pos, body.end)

    def parse_for(self) -> A.For:
        kw = self.expect("for")
        self.expect("(")
        init: A.Stmt | None = None
        if not self.at(";"):
            if self.is_type_start():
                init = self.parse_decl()
            else:
                init = self._comma_exprs_stmt()
                self.expect(";")
        else:
            self.next()
        test = None
        if not self.at(";"):
            test = self.parse_assign_expr()
        self.expect(";")
        update: list[A.Expr] = []
        if not self.at(")"):
            update.append(self.parse_assign_expr())
            while self.accept(","):
                update.append(self.parse_assign_expr())
        self.expect(")")
        body = self.parse_stmt()
        return A.For(init, test, update, body, kw.loc, kw.pos, body.end)

    def _comma_exprs_stmt(self) -> A.ExprStmt:
        t = self.peek()
        items = [self.parse_assign_expr()]
        while self.accept(","):
            items.append(self.parse_assign_expr())
        expr = items[0] if len(items) == 1 else A.Comma(items, t.loc, t.pos)
        return A.ExprStmt(expr, t.loc, t.pos, self.peek().pos)

    def parse_return(self) -> A.Return:
        kw = self.expect("return")
        value = None
        vpos = self.peek().pos
        if not self.at(";"):
            value = self.parse_assign_expr()
        semi = self.expect(";")
        return A.Return(value, kw.loc, kw.pos, semi.pos + 1, vpos, semi.pos)

    def parse_decl(self) -> A.Decl:
        start = self.peek()
        while self.peek().kind == "id" and self.peek().text in STORAGE:
            self.next()
        base = self.parse_base_type()
        items: list[A.Declarator] = []
        while True:
            ty = self.parse_pointers(base)
            nt = self.peek()
            if nt.kind != "id":
                raise ParseError(nt.loc, f"expected declarator name, found {nt.text!r}")
            self.next()
            ty = self.parse_array_suffix(ty)
            init = None
            if self.accept("="):
                if self.at("{"):
                    raise UnsupportedConstruct(self.peek().loc, "brace initializer")
                init = self.parse_assign_expr()
            items.append(A.Declarator(nt.text, ty, init, nt.loc, nt.pos))
            if not self.accept(","):
                break
        semi = self.expect(";")
        return A.Decl(items, start.loc, start.pos, semi.pos + 1)

    # -- top level -------------------------------------------------------------

    def parse_unit(self) -> A.SourceUnit:
        unit = A.SourceUnit(self.path, self.text, defines=dict(self.defines))
        while self.peek().kind != "eof":
            self.parse_top_level(unit)
        names = [f.name for f in unit.functions]
        if len(names) != len(set(names)):
            dup = next(n for n in names if names.count(n) > 1)
            raise ParseError((0, 0), f"duplicate function definition {dup!r}")
        unit.typedefs = dict(self.typedefs)
        self._check_typedef_cycles()
        return unit

    def _check_typedef_cycles(self) -> None:
        from .types import resolve_type_expr  # local import to avoid a cycle

        for name, expr in self.typedefs.items():
            resolve_type_expr(expr, self.typedefs)  # raises TypedefCycle

    def parse_top_level(self, unit: A.SourceUnit) -> None:
        t = self.peek()
        if t.kind == "id" and t.text == "typedef":
            self.parse_typedef()
            return
        if t.kind == "id" and t.text in ("struct", "union", "enum"):
            self._skip_balanced_to_semi()
            return
        storage = None
        while self.peek().kind == "id" and self.peek().text in STORAGE:
            storage = self.next().text
        base = self.parse_base_type()
        first = True
        while True:
            ty = self.parse_pointers(base)
            nt = self.peek()
            if nt.kind != "id":
                raise ParseError(nt.loc, f"expected declarator name, found {nt.text!r}")
            name_tok = self.next()
            if first and self.at("("):
                self.parse_function_or_proto(unit, ty, name_tok, storage, t.pos)
                return
            first = False
            ty = self.parse_array_suffix(ty)
            init = None
            if self.accept("="):
                init = self.parse_assign_expr()
            unit.globals.append(A.GlobalVar(name_tok.text, ty, init, name_tok.loc))
            if not self.accept(","):
                break
        self.expect(";")

    def parse_typedef(self) -> None:
        self.expect("typedef")
        t = self.peek()
        if t.kind == "id" and t.text in ("struct", "union", "enum"):
            self.next()
            if self.peek().kind == "id":
                self.next()  # tag
            if self.at("{"):
                self._skip_braces()
            ty: A.TypeExpr = OPAQUE_TYPE
            ty = self.parse_pointers(ty)
        else:
            ty = self.parse_pointers(self.parse_base_type())
        nt = self.peek()
        if nt.kind != "id":
            raise ParseError(nt.loc, "expected typedef name")
        self.next()
        ty = self.parse_array_suffix(ty)
        self.expect(";")
        self.typedefs[nt.text] = ty

    def parse_function_or_proto(
        self,
        unit: A.SourceUnit,
        ret: A.TypeExpr,
        name_tok: Token,
        storage: str | None,
        start_pos: int,
    ) -> None:
        self.expect("(")
        params: list[A.Param] = []
        if self.at("void") and self.peek(1).text == ")":
            self.next()
        elif not self.at(")"):
            params.append(self.parse_param())
            while self.accept(","):
                params.append(self.parse_param())
        self.expect(")")
        if self.accept(";"):
            unit.prototypes.add(name_tok.text)
            return
        body_tok = self.peek()
        if not self.at("{"):
            raise ParseError(body_tok.loc, "expected function body")
        body_idx = self.i
        try:
            body: A.Block | None = self.parse_block()
            opaque, reason = False, None
        except UnsupportedConstruct as e:
            self.i = body_idx
            end_idx = self._skip_braces_tokens()
            body = None
            opaque, reason = True, e.what
        fn = A.FunctionDef(
            name_tok.text,
            ret,
            params,
            body,
            name_tok.loc,
            start_pos,
            body_tok.pos,
            (body.end if body else self.toks[self.i - 1].pos + 1),
            storage,
            opaque,
            reason,
        )
        unit.functions.append(fn)

    def parse_param(self) -> A.Param:
        t = self.peek()
        if t.kind == "id" and t.text in ("struct", "union", "enum"):
            self.next()
            tag = self.next().text if self.peek().kind == "id" else "?"
            ty: A.TypeExpr = A.TBase((f"struct {tag}",))
            ty = self.parse_pointers(ty)
        else:
            ty = self.parse_pointers(self.parse_base_type())
        name = None
        if self.peek().kind == "id":
            name = self.next().text
        ty = self.parse_array_suffix(ty)
        return A.Param(name, ty, t.loc)

    # -- recovery helpers -------------------------------------------------------

    def _skip_braces(self) -> None:
        self._skip_braces_tokens()

    def _skip_braces_tokens(self) -> int:
        self.expect("{")
        depth = 1
        while depth > 0:
            t = self.next()
            if t.kind == "eof":
                raise ParseError(t.loc, "unterminated block")
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1
        return self.i

    def _skip_balanced_to_semi(self) -> None:
        while not self.at(";"):
            if self.at("{"):
                self._skip_braces()
                continue
            if self.next().kind == "eof":
                raise ParseError(self.peek().loc, "unexpected end of file")
        self.next()


def parse_unit(
    source_text: str, path: str = "<memory>", defines: dict[str, int] | None = None
) -> A.SourceUnit:
    """Parse one translation unit of the supported C subset."""
    return Parser(source_text, path, defines).parse_unit()
