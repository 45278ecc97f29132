"""Untyped syntax tree for MiniCpp source and ghost annotations.

Locations never participate in structural equality so that
parse(pretty_print(p)) == p holds for accepted programs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Union

from .diagnostics import Loc


@dataclass(frozen=True)
class TypeExpr:
    name: str          # 'int', 'bool', 'void' or a class name
    ptr: int = 0       # pointer depth
    ref: bool = False

    def __str__(self) -> str:
        return self.name + "*" * self.ptr + ("&" if self.ref else "")

    @property
    def is_class_value(self) -> bool:
        return self.ptr == 0 and not self.ref and self.name not in PRIMITIVES

    @property
    def is_class_ptr(self) -> bool:
        return self.ptr == 1 and self.name not in PRIMITIVES


PRIMITIVES = {"int", "bool", "void"}
TYPEINFO_T = TypeExpr("@type_info")


def _loc():
    return field(compare=False, default=None)


# --- expressions ---

@dataclass(frozen=True)
class IntLitE:
    value: int
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class BoolLitE:
    value: bool
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class NullLitE:
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class NameE:
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ThisE:
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class FieldAccessE:
    target: "Expr"
    arrow: bool
    field: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class UnaryE:
    op: str  # '-', '!', '*', '&'
    operand: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class BinaryE:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class CastE:
    type: TypeExpr
    operand: "Expr"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class TypeidE:
    """The ghost construct `&typeid(S)`."""
    cls: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class QualifiedE:
    cls: str
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class CallE:
    callee: "Expr"
    args: tuple
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class NewE:
    cls: str
    args: tuple
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class DtorCallE:
    """Explicit destructor call `p.~P()` / `p->~P()`; always rejected."""
    target: "Expr"
    arrow: bool
    cls: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PatternE:
    """`?name` binder or `_` wildcard; only legal in consumed positions."""
    name: Optional[str]
    loc: Optional[Loc] = _loc()


Expr = Union[IntLitE, BoolLitE, NullLitE, NameE, ThisE, FieldAccessE, UnaryE,
             BinaryE, CastE, TypeidE, QualifiedE, CallE, NewE, DtorCallE,
             PatternE]


# --- coefficient patterns ---

@dataclass(frozen=True)
class CoeffExact:
    value: Fraction


@dataclass(frozen=True)
class CoeffBind:
    name: str


@dataclass(frozen=True)
class CoeffWild:
    pass


@dataclass(frozen=True)
class CoeffName:
    """Reference to a coefficient bound earlier by `[?name]`."""
    name: str


CoeffPat = Union[CoeffExact, CoeffBind, CoeffWild, CoeffName]


# --- assertions ---

@dataclass(frozen=True)
class ChunkA:
    name: str
    args: tuple
    coeff: Optional[CoeffPat] = None
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PointsToA:
    target: Expr  # a field lvalue, possibly through an explicit cast
    value: Expr
    coeff: Optional[CoeffPat] = None
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class InstPredA:
    target: Optional[Expr]   # None = implicit `this`
    index: Optional[Expr]
    name: str
    args: tuple
    coeff: Optional[CoeffPat] = None
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class SepA:
    left: "Assertion"
    right: "Assertion"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PureA:
    expr: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class CondA:
    cond: Expr
    then: "Assertion"
    els: "Assertion"
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class EmpA:
    loc: Optional[Loc] = _loc()


Assertion = Union[ChunkA, PointsToA, InstPredA, SepA, PureA, CondA, EmpA]


def sep_conjuncts(a: Assertion) -> List[Assertion]:
    if isinstance(a, SepA):
        return sep_conjuncts(a.left) + sep_conjuncts(a.right)
    return [a]


# --- statements ---

@dataclass(frozen=True)
class BlockS:
    stmts: tuple
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class VarDeclS:
    type: TypeExpr
    name: str
    init: Optional[Expr] = None       # `T x = e;`
    ctor_args: Optional[tuple] = None  # `T x(args);` (class types)
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class AssignS:
    lvalue: Expr
    expr: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ExprS:
    expr: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ReturnS:
    expr: Optional[Expr]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class IfS:
    cond: Expr
    then: BlockS
    els: Optional[BlockS]
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class DeleteS:
    expr: Expr
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class GhostS:
    kind: str  # 'open' | 'close' | 'leak' | 'assert'
    payload: Assertion
    loc: Optional[Loc] = _loc()


Stmt = Union[BlockS, VarDeclS, AssignS, ExprS, ReturnS, IfS, DeleteS, GhostS]


# --- declarations ---

@dataclass(frozen=True)
class Param:
    type: TypeExpr
    name: str
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class Contract:
    requires: Assertion
    ensures: Assertion
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class FieldDecl:
    type: TypeExpr
    name: str
    default: Optional[Expr] = None
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class InitEntry:
    name: str  # field, direct base, or the class itself (delegation)
    args: tuple
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class CtorDecl:
    cls: str
    params: tuple
    inits: tuple
    contract: Contract
    body: BlockS
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class DtorDecl:
    cls: str
    contract: Contract
    body: BlockS
    loc: Optional[Loc] = _loc()
    virtual: bool = False
    override: bool = False


@dataclass(frozen=True)
class MethodDecl:
    name: str
    ret: TypeExpr
    params: tuple
    virtual: bool
    override: bool
    contract: Contract
    body: Optional[BlockS]  # None = pure virtual
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple
    body: Optional[Assertion]
    precise: bool = False  # `;` parameter separator, recorded but inert
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    bases: tuple
    fields: tuple
    ctors: tuple
    dtor: Optional[DtorDecl]
    methods: tuple
    predicates: tuple
    loc: Optional[Loc] = _loc()


@dataclass(frozen=True)
class FuncDecl:
    name: str
    ret: TypeExpr
    params: tuple
    contract: Contract
    body: BlockS
    loc: Optional[Loc] = _loc()


Decl = Union[ClassDecl, FuncDecl, PredicateDecl]


@dataclass(frozen=True)
class Program:
    path: str
    decls: tuple

    @property
    def classes(self) -> List[ClassDecl]:
        return [d for d in self.decls if isinstance(d, ClassDecl)]
