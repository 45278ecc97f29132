"""Symbolic terms and formulas.

Terms are immutable and hashable. Formulas are terms of boolean shape
(comparisons, connectives, boolean literals/symbols).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple, Union


@dataclass(frozen=True)
class Sym:
    uid: int
    hint: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class TypeInfo:
    """The unique std::type_info constant of a class."""
    cls: str


@dataclass(frozen=True)
class FieldPtr:
    """Base-subobject address: base term shifted by the (derived, base)
    offset symbol."""
    base: "Term"
    derived: str
    cls: str


@dataclass(frozen=True)
class FieldAddr:
    """Address of a class-typed data member."""
    obj: "Term"
    cls: str
    field: str


@dataclass(frozen=True)
class App:
    op: str
    args: Tuple["Term", ...]


Term = Union[Sym, IntLit, BoolLit, TypeInfo, FieldPtr, FieldAddr, App]

TRUE = BoolLit(True)
FALSE = BoolLit(False)
ZERO = IntLit(0)

ARITH_OPS = {"+", "-", "*", "neg"}
CMP_OPS = {"==", "!=", "<", "<="}
BOOL_OPS = {"&&", "||", "!"}


def eq(a: Term, b: Term) -> Term:
    return App("==", (a, b))


def ne(a: Term, b: Term) -> Term:
    return App("!=", (a, b))


def conj(*fs: Term) -> Term:
    out = TRUE
    for f in fs:
        out = f if out == TRUE else App("&&", (out, f))
    return out


def negate(f: Term) -> Term:
    if isinstance(f, BoolLit):
        return BoolLit(not f.value)
    if isinstance(f, App) and f.op == "!":
        return f.args[0]
    return App("!", (f,))


def children(t: Term) -> Tuple[Term, ...]:
    if isinstance(t, App):
        return t.args
    if isinstance(t, FieldPtr):
        return (t.base,)
    if isinstance(t, FieldAddr):
        return (t.obj,)
    return ()


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for c in children(t):
        yield from subterms(c)


def rebuild(t: Term, new_children: Tuple[Term, ...]) -> Term:
    if isinstance(t, App):
        return App(t.op, new_children)
    if isinstance(t, FieldPtr):
        return FieldPtr(new_children[0], t.derived, t.cls)
    if isinstance(t, FieldAddr):
        return FieldAddr(new_children[0], t.cls, t.field)
    return t


def fmt(t: Term) -> str:
    if isinstance(t, Sym):
        return f"{t.hint}#{t.uid}"
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, BoolLit):
        return "true" if t.value else "false"
    if isinstance(t, TypeInfo):
        return f"{t.cls}_type_info"
    if isinstance(t, FieldPtr):
        return f"field_ptr({fmt(t.base)}, {t.derived}_{t.cls}_offset)"
    if isinstance(t, FieldAddr):
        return f"field_addr({fmt(t.obj)}, {t.cls}::{t.field})"
    if isinstance(t, App):
        if t.op == "!":
            return f"!{fmt(t.args[0])}"
        if t.op == "neg":
            return f"-{fmt(t.args[0])}"
        return f"({fmt(t.args[0])} {t.op} {fmt(t.args[1])})"
    raise TypeError(f"unknown term {t!r}")
