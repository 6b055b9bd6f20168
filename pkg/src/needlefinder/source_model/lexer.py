"""Tokenizer for the C subset, with `#define` constant collection.

Preprocessor handling is deliberately thin: object-like defines of integer
constants are collected and substituted token-wise; every other directive
line is skipped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

PUNCTS_3 = ("<<=", ">>=")
PUNCTS_2 = (
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "++", "--", "->",
)
PUNCTS_1 = "+-*/%<>=!&|^~?:;,.()[]{}#"

_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = re.compile(r"0[xX][0-9a-fA-F]+|\d+")
_DEFINE = re.compile(
    r"#\s*define\s+([A-Za-z_][A-Za-z0-9_]*)(?!\()\s+(.+?)\s*$", re.MULTILINE
)
_INT_CONST = re.compile(r"^\(?\s*(-?\s*(?:0[xX][0-9a-fA-F]+|\d+))\s*\)?\s*$")


@dataclass
class Token:
    kind: str  # 'id', 'num', 'str', 'punct', 'eof'
    text: str
    value: int | str | None
    line: int
    col: int
    pos: int

    @property
    def loc(self) -> tuple[int, int]:
        return (self.line, self.col)


def collect_defines(text: str, extra: dict[str, int] | None = None) -> dict[str, int]:
    """Gather integer-constant object defines; non-constant defines are ignored."""
    out: dict[str, int] = dict(extra or {})
    for m in _DEFINE.finditer(text):
        name, body = m.group(1), m.group(2)
        cm = _INT_CONST.match(body)
        if cm:
            out[name] = int(cm.group(1).replace(" ", ""), 0)
        elif body in out:
            out[name] = out[body]
    return out


def tokenize(text: str, defines: dict[str, int] | None = None) -> list[Token]:
    defines = defines if defines is not None else {}
    toks: list[Token] = []
    i, n = 0, len(text)
    line, bol = 1, 0  # bol = offset of start of current line

    def loc(pos: int) -> tuple[int, int, int]:
        return line, pos - bol + 1, pos

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            bol = i
            continue
        if c in " \t\r\f\v":
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ParseError((line, i - bol + 1), "unterminated comment")
            line += text.count("\n", i, j)
            nl = text.rfind("\n", i, j)
            if nl >= 0:
                bol = nl + 1
            i = j + 2
            continue
        if c == "#":
            # directive: consume through end of line, honoring backslash splices
            while True:
                j = text.find("\n", i)
                if j < 0:
                    i = n
                    break
                if text[j - 1] == "\\":
                    line += 1
                    i = j + 1
                    bol = i
                    continue
                i = j
                break
            continue
        ln, col, pos = loc(i)
        if c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append({"n": "\n", "t": "\t", "0": "\0"}.get(text[j + 1], text[j + 1]))
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError((ln, col), "unterminated string literal")
            toks.append(Token("str", text[i : j + 1], "".join(buf), ln, col, pos))
            i = j + 1
            continue
        if c == "'":
            j = i + 1
            if j < n and text[j] == "\\":
                val = {"n": 10, "t": 9, "0": 0, "\\": 92, "'": 39}.get(text[j + 1])
                if val is None:
                    raise ParseError((ln, col), "unsupported escape in char literal")
                j += 2
            else:
                val = ord(text[j])
                j += 1
            if j >= n or text[j] != "'":
                raise ParseError((ln, col), "unterminated char literal")
            toks.append(Token("num", text[i : j + 1], val, ln, col, pos))
            i = j + 1
            continue
        m = _NUM.match(text, i)
        if m:
            lit = m.group(0)
            j = m.end()
            while j < n and text[j] in "uUlL":  # integer suffixes
                j += 1
            toks.append(Token("num", text[i:j], int(lit, 0), ln, col, pos))
            i = j
            continue
        m = _ID.match(text, i)
        if m:
            word = m.group(0)
            if word in defines:
                toks.append(Token("num", word, defines[word], ln, col, pos))
            else:
                toks.append(Token("id", word, word, ln, col, pos))
            i = m.end()
            continue
        for group in (PUNCTS_3, PUNCTS_2):
            p = next((p for p in group if text.startswith(p, i)), None)
            if p:
                toks.append(Token("punct", p, p, ln, col, pos))
                i += len(p)
                break
        else:
            if c in PUNCTS_1:
                toks.append(Token("punct", c, c, ln, col, pos))
                i += 1
            else:
                raise ParseError((ln, col), f"unexpected character {c!r}")
    toks.append(Token("eof", "", None, line, n - bol + 1, n))
    return toks
