"""Render expression trees back to C source text."""

from __future__ import annotations

from . import cast as A


def render_expr(e: A.Expr) -> str:
    if isinstance(e, A.Num):
        return str(e.value)
    if isinstance(e, A.Str):
        return '"' + e.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.Unary):
        return f"{e.op}({render_expr(e.operand)})"
    if isinstance(e, A.Bin):
        return f"({render_expr(e.left)} {e.op} {render_expr(e.right)})"
    if isinstance(e, A.Cond):
        return f"({render_expr(e.test)} ? {render_expr(e.then)} : {render_expr(e.other)})"
    if isinstance(e, A.Assign):
        return f"({render_expr(e.target)} {e.op} {render_expr(e.value)})"
    if isinstance(e, A.IncDec):
        t = render_expr(e.target)
        return f"{e.op}{t}" if e.prefix else f"{t}{e.op}"
    if isinstance(e, A.Index):
        return f"{render_expr(e.base)}[{render_expr(e.index)}]"
    if isinstance(e, A.Call):
        return f"{render_expr(e.func)}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, A.Cast):
        return f"({A.type_expr_text(e.to)})({render_expr(e.operand)})"
    if isinstance(e, A.Comma):
        return ", ".join(render_expr(x) for x in e.items)
    raise TypeError(f"cannot render {type(e).__name__}")
