"""Tokenizer for MiniCpp.

Ghost material lives inside `/*@ ... @*/` and `//@ ...` comments; the
lexer emits those tokens inline, flagged with `ghost=True`, so the parser
sees one uniform stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .diagnostics import Category, Diagnostic, Loc

PUNCTUATORS = [
    "&*&", "|->", "::", "->", "==", "!=", "<=", ">=", "&&", "||",
    "{", "}", "(", ")", "[", "]", ";", ":", ",", ".", "*", "&",
    "+", "-", "<", ">", "=", "?", "!", "~", "/",
]

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


@dataclass(frozen=True)
class Token:
    kind: str   # 'id' | 'int' | 'punct' | 'eof'
    text: str
    loc: Loc
    ghost: bool = False


class LexError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


def tokenize(text: str, path: str) -> List[Token]:
    toks: List[Token] = []
    i = 0
    line, col = 1, 1
    n = len(text)
    ghost = False          # inside /*@ ... @*/
    ghost_line = False     # inside //@ ... (until newline)

    def loc() -> Loc:
        return Loc(path, line, col)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c == "\n" and ghost_line:
            ghost_line = False
            advance(1)
            continue
        if c in " \t\r\n":
            advance(1)
            continue
        in_ghost = ghost or ghost_line
        if not in_ghost:
            if text.startswith("/*@", i):
                ghost = True
                advance(3)
                continue
            if text.startswith("//@", i):
                ghost_line = True
                advance(3)
                continue
            if text.startswith("/*", i):
                end = text.find("*/", i + 2)
                if end < 0:
                    raise LexError(Diagnostic(Category.SYNTAX_ERROR,
                                              "unterminated comment", loc()))
                advance(end + 2 - i)
                continue
            if text.startswith("//", i):
                while i < n and text[i] != "\n":
                    advance(1)
                continue
        else:
            if ghost and text.startswith("@*/", i):
                ghost = False
                advance(3)
                continue
            if text.startswith("//", i) and not text.startswith("//@", i):
                while i < n and text[i] != "\n":
                    advance(1)
                continue
        if c in _IDENT_START:
            start, startloc = i, loc()
            while i < n and text[i] in _IDENT_CONT:
                advance(1)
            toks.append(Token("id", text[start:i], startloc, in_ghost))
            continue
        if c.isdigit():
            start, startloc = i, loc()
            while i < n and text[i].isdigit():
                advance(1)
            toks.append(Token("int", text[start:i], startloc, in_ghost))
            continue
        for p in PUNCTUATORS:
            if text.startswith(p, i):
                toks.append(Token("punct", p, loc(), in_ghost))
                advance(len(p))
                break
        else:
            raise LexError(Diagnostic(Category.SYNTAX_ERROR,
                                      f"unexpected character {c!r}", loc()))
    toks.append(Token("eof", "", loc(), False))
    return toks
