"""Pretty printer; parse(format_program(p)) is structurally equal to p."""

from __future__ import annotations

from fractions import Fraction

from .syntax import (
    AssignS, BinaryE, BlockS, BoolLitE, CastE, ChunkA, ClassDecl, CoeffBind,
    CoeffExact, CoeffName, CoeffWild, CondA, CtorDecl, CallE, DeleteS,
    DtorCallE,
    DtorDecl, EmpA, ExprS, FieldAccessE, FieldDecl, FuncDecl, GhostS, IfS,
    InstPredA, IntLitE, MethodDecl, NameE, NewE, NullLitE, PatternE,
    PointsToA, PredicateDecl, Program, PureA, QualifiedE, ReturnS, SepA,
    ThisE, TypeidE, UnaryE, VarDeclS,
)

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4,
         ">=": 4, "+": 5, "-": 5, "*": 6}


def format_expr(e, prec: int = 0) -> str:
    if isinstance(e, IntLitE):
        return str(e.value)
    if isinstance(e, BoolLitE):
        return "true" if e.value else "false"
    if isinstance(e, NullLitE):
        return "nullptr"
    if isinstance(e, NameE):
        return e.name
    if isinstance(e, ThisE):
        return "this"
    if isinstance(e, FieldAccessE):
        return f"{format_expr(e.target, 8)}{'->' if e.arrow else '.'}{e.field}"
    if isinstance(e, UnaryE):
        return f"{e.op}{format_expr(e.operand, 7)}"
    if isinstance(e, BinaryE):
        p = _PREC[e.op]
        s = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, CastE):
        return f"({e.type}){format_expr(e.operand, 7)}"
    if isinstance(e, TypeidE):
        return f"&typeid({e.cls})"
    if isinstance(e, QualifiedE):
        return f"{e.cls}::{e.name}"
    if isinstance(e, CallE):
        args = ", ".join(format_expr(a) for a in e.args)
        return f"{format_expr(e.callee, 8)}({args})"
    if isinstance(e, NewE):
        return f"new {e.cls}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, DtorCallE):
        return f"{format_expr(e.target, 8)}{'->' if e.arrow else '.'}~{e.cls}()"
    if isinstance(e, PatternE):
        return "_" if e.name is None else f"?{e.name}"
    raise TypeError(f"unknown expression {e!r}")


def format_coeff(c) -> str:
    if isinstance(c, CoeffExact):
        v: Fraction = c.value
        return f"[{v.numerator}]" if v.denominator == 1 else \
            f"[{v.numerator}/{v.denominator}]"
    if isinstance(c, CoeffBind):
        return f"[?{c.name}]"
    if isinstance(c, CoeffWild):
        return "[_]"
    if isinstance(c, CoeffName):
        return f"[{c.name}]"
    raise TypeError(f"unknown coefficient {c!r}")


def format_assertion(a) -> str:
    if isinstance(a, SepA):
        return f"{format_assertion(a.left)} &*& {format_assertion(a.right)}"
    if isinstance(a, CondA):
        return (f"{format_expr(a.cond)} ? {format_assertion(a.then)} : "
                f"{format_assertion(a.els)}")
    if isinstance(a, ChunkA):
        coeff = format_coeff(a.coeff) if a.coeff else ""
        args = ", ".join(format_expr(x) for x in a.args)
        return f"{coeff}{a.name}({args})"
    if isinstance(a, PointsToA):
        return f"{format_expr(a.target, 8)} |-> {format_expr(a.value)}"
    if isinstance(a, InstPredA):
        coeff = format_coeff(a.coeff) if a.coeff else ""
        tgt = f"{format_expr(a.target, 8)}->" if a.target is not None else ""
        idx = f"({format_expr(a.index)})" if a.index is not None else ""
        args = ", ".join(format_expr(x) for x in a.args)
        return f"{coeff}{tgt}{a.name}{idx}({args})"
    if isinstance(a, PureA):
        return format_expr(a.expr)
    if isinstance(a, EmpA):
        return "emp"
    raise TypeError(f"unknown assertion {a!r}")


def _contract(c, ind: str) -> str:
    return (f"{ind}//@ requires {format_assertion(c.requires)};\n"
            f"{ind}//@ ensures {format_assertion(c.ensures)};\n")


def format_stmt(s, ind: str = "  ") -> str:
    if isinstance(s, BlockS):
        inner = "".join(format_stmt(x, ind + "  ") for x in s.stmts)
        return f"{ind}{{\n{inner}{ind}}}\n"
    if isinstance(s, VarDeclS):
        if s.ctor_args is not None:
            args = ", ".join(format_expr(a) for a in s.ctor_args)
            tail = f"({args})" if s.ctor_args else ""
            return f"{ind}{s.type} {s.name}{tail};\n"
        if s.init is not None:
            return f"{ind}{s.type} {s.name} = {format_expr(s.init)};\n"
        return f"{ind}{s.type} {s.name};\n"
    if isinstance(s, AssignS):
        return f"{ind}{format_expr(s.lvalue)} = {format_expr(s.expr)};\n"
    if isinstance(s, ExprS):
        return f"{ind}{format_expr(s.expr)};\n"
    if isinstance(s, ReturnS):
        return f"{ind}return;\n" if s.expr is None else \
            f"{ind}return {format_expr(s.expr)};\n"
    if isinstance(s, IfS):
        out = f"{ind}if ({format_expr(s.cond)})\n"
        out += format_stmt(s.then, ind)
        if s.els is not None:
            out += f"{ind}else\n" + format_stmt(s.els, ind)
        return out
    if isinstance(s, DeleteS):
        return f"{ind}delete {format_expr(s.expr)};\n"
    if isinstance(s, GhostS):
        return f"{ind}//@ {s.kind} {format_assertion(s.payload)};\n"
    raise TypeError(f"unknown statement {s!r}")


def _params(params) -> str:
    return ", ".join(f"{p.type} {p.name}" for p in params)


def format_predicate(p, ind: str = "") -> str:
    if p.precise and p.params:
        # precise separator sits before the last parameter
        head = ", ".join(f"{q.type} {q.name}" for q in p.params[:-1])
        last = f"{p.params[-1].type} {p.params[-1].name}"
        ps = f"{head}; {last}" if head else f"; {last}"
    else:
        ps = _params(p.params)
    body = f" = {format_assertion(p.body)}" if p.body is not None else ""
    return f"{ind}/*@ predicate {p.name}({ps}){body}; @*/\n"


def format_class(c: ClassDecl) -> str:
    bases = f" : {', '.join(c.bases)}" if c.bases else ""
    out = f"class {c.name}{bases} {{\n public:\n"
    for f in c.fields:
        dflt = f" = {format_expr(f.default)}" if f.default is not None else ""
        out += f"  {f.type} {f.name}{dflt};\n"
    for p in c.predicates:
        out += format_predicate(p, "  ")
    for ct in c.ctors:
        inits = ""
        if ct.inits:
            parts = [f"{i.name}({', '.join(format_expr(a) for a in i.args)})"
                     for i in ct.inits]
            inits = f" : {', '.join(parts)}"
        out += f"  {c.name}({_params(ct.params)}){inits}\n"
        out += _contract(ct.contract, "  ")
        out += format_stmt(ct.body, "  ")
    if c.dtor is not None:
        dvirt = "virtual " if c.dtor.virtual else ""
        dover = " override" if c.dtor.override else ""
        out += f"  {dvirt}~{c.name}(){dover}\n"
        out += _contract(c.dtor.contract, "  ")
        out += format_stmt(c.dtor.body, "  ")
    for m in c.methods:
        virt = "virtual " if m.virtual else ""
        over = " override" if m.override else ""
        out += f"  {virt}{m.ret} {m.name}({_params(m.params)}){over}\n"
        out += _contract(m.contract, "  ")
        if m.body is None:
            out += "  = 0;\n"
        else:
            out += format_stmt(m.body, "  ")
    out += "};\n"
    return out


def format_program(p: Program) -> str:
    parts = []
    for d in p.decls:
        if isinstance(d, ClassDecl):
            parts.append(format_class(d))
        elif isinstance(d, FuncDecl):
            out = f"{d.ret} {d.name}({_params(d.params)})\n"
            out += _contract(d.contract, "")
            out += format_stmt(d.body, "")
            parts.append(out)
        elif isinstance(d, PredicateDecl):
            parts.append(format_predicate(d))
        else:
            raise TypeError(f"unknown declaration {d!r}")
    return "\n".join(parts)
