"""Recursive descent parser for MiniCpp plus its ghost annotation language.

The grammar is a fixed LL-style C++ subset: types are int, bool, void,
class names and single-level pointers/references to them. Ghost material
(contracts, predicates, open/close/leak/assert) is only accepted inside
annotation comments. Parsing is deterministic and aborts at the first
error.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional

from .diagnostics import Category, Diagnostic, Loc
from .lexer import LexError, Token, tokenize
from .syntax import (
    AssignS, Assertion, BinaryE, BlockS, BoolLitE, CastE, ChunkA, ClassDecl,
    CoeffBind, CoeffExact, CoeffName, CoeffWild, CondA, Contract, CtorDecl,
    CallE,
    DeleteS, DtorCallE, DtorDecl, EmpA, Expr, ExprS, FieldAccessE, FieldDecl,
    FuncDecl, GhostS, IfS, InitEntry, InstPredA, IntLitE, MethodDecl, NameE,
    NewE, NullLitE, Param, PatternE, PointsToA, PredicateDecl, Program,
    PureA, QualifiedE, ReturnS, SepA, Stmt, ThisE, TypeExpr, TypeidE,
    UnaryE, VarDeclS,
)

GHOST_STMT_KEYWORDS = {"open", "close", "leak", "assert"}
RESERVED = {"class", "virtual", "override", "new", "delete", "return", "if",
            "else", "this", "true", "false", "nullptr", "int", "bool",
            "void", "public", "private", "typeid"}


class ParseError(Exception):
    def __init__(self, diagnostics: List[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class _Parser:
    def __init__(self, tokens: List[Token], path: str):
        self.toks = tokens
        self.pos = 0
        self.path = path

    # --- token helpers ---

    def peek(self, off: int = 0) -> Token:
        i = min(self.pos + off, len(self.toks) - 1)
        return self.toks[i]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str, off: int = 0) -> bool:
        return self.peek(off).text == text and self.peek(off).kind != "eof"

    def at_id(self, text: str, off: int = 0) -> bool:
        t = self.peek(off)
        return t.kind == "id" and t.text == text

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            self.fail(f"expected {text!r}, found {t.text!r}" if t.kind != "eof"
                      else f"expected {text!r}, found end of input")
        return self.next()

    def expect_id(self) -> Token:
        t = self.peek()
        if t.kind != "id" or t.text in RESERVED:
            self.fail(f"expected identifier, found {t.text!r}")
        return self.next()

    def fail(self, message: str, loc: Optional[Loc] = None):
        raise ParseError([Diagnostic(Category.SYNTAX_ERROR, message,
                                     loc or self.peek().loc)])

    # --- types ---

    def at_type_start(self) -> bool:
        t = self.peek()
        if t.kind != "id":
            return False
        if t.text in ("int", "bool", "void"):
            return True
        return t.text not in RESERVED

    def parse_type(self) -> TypeExpr:
        t = self.peek()
        if t.kind != "id" or (t.text in RESERVED and
                              t.text not in ("int", "bool", "void")):
            self.fail(f"expected type, found {t.text!r}")
        name = self.next().text
        ptr = 0
        while self.accept("*"):
            ptr += 1
        ref = bool(self.accept("&"))
        return TypeExpr(name, ptr, ref)

    # --- program ---

    def parse_program(self) -> Program:
        decls = []
        while self.peek().kind != "eof":
            t = self.peek()
            if t.ghost and self.at_id("predicate"):
                decls.append(self.parse_predicate())
            elif self.at_id("class"):
                decls.append(self.parse_class())
            else:
                decls.append(self.parse_function())
        return Program(self.path, tuple(decls))

    def parse_class(self) -> ClassDecl:
        loc = self.expect("class").loc
        name = self.expect_id().text
        bases = []
        if self.accept(":"):
            while True:
                if self.at_id("public") or self.at_id("private"):
                    self.next()
                bases.append(self.expect_id().text)
                if not self.accept(","):
                    break
        self.expect("{")
        fields, ctors, methods, preds = [], [], [], []
        dtor = None
        while not self.at("}"):
            if (self.at_id("public") or self.at_id("private")) and \
                    self.at(":", 1):
                self.next()
                self.next()
                continue
            t = self.peek()
            if t.ghost and self.at_id("predicate"):
                preds.append(self.parse_predicate())
                continue
            if self.at("~"):
                if dtor is not None:
                    self.fail(f"duplicate destructor in class {name}", t.loc)
                dtor = self.parse_dtor(name, virtual=False)
                continue
            if self.at_id("virtual"):
                if self.at("~", 1):
                    if dtor is not None:
                        self.fail(f"duplicate destructor in class {name}",
                                  t.loc)
                    self.next()
                    dtor = self.parse_dtor(name, virtual=True)
                    continue
                methods.append(self.parse_method(virtual=True))
                continue
            if self.at_id(name) and self.at("(", 1):
                ctors.append(self.parse_ctor(name))
                continue
            mloc = self.peek().loc
            mtype = self.parse_type()
            mname = self.expect_id().text
            if self.at("("):
                methods.append(self.parse_method_tail(mname, mtype, False,
                                                      mloc))
            else:
                default = None
                if self.accept("="):
                    default = self.parse_expr()
                self.expect(";")
                fields.append(FieldDecl(mtype, mname, default, mloc))
        self.expect("}")
        self.expect(";")
        return ClassDecl(name, tuple(bases), tuple(fields), tuple(ctors),
                         dtor, tuple(methods), tuple(preds), loc)

    def parse_ctor(self, cls: str) -> CtorDecl:
        loc = self.next().loc  # class name
        params = self.parse_params()
        inits = []
        if self.accept(":"):
            while True:
                eloc = self.peek().loc
                ename = self.expect_id().text
                self.expect("(")
                args = self.parse_args(patterns=False)
                self.expect(")")
                inits.append(InitEntry(ename, tuple(args), eloc))
                if not self.accept(","):
                    break
        contract = self.parse_contract()
        body = self.parse_block()
        return CtorDecl(cls, tuple(params), tuple(inits), contract, body, loc)

    def parse_dtor(self, cls: str, virtual: bool) -> DtorDecl:
        loc = self.expect("~").loc
        got = self.expect_id().text
        if got != cls:
            self.fail(f"destructor name ~{got} does not match class {cls}",
                      loc)
        self.expect("(")
        self.expect(")")
        override = bool(self.at_id("override") and self.next())
        contract = self.parse_contract()
        body = self.parse_block()
        return DtorDecl(cls, contract, body, loc, virtual, override)

    def parse_method(self, virtual: bool) -> MethodDecl:
        loc = self.expect("virtual").loc
        ret = self.parse_type()
        name = self.expect_id().text
        return self.parse_method_tail(name, ret, virtual, loc)

    def parse_method_tail(self, name: str, ret: TypeExpr, virtual: bool,
                          loc: Loc) -> MethodDecl:
        params = self.parse_params()
        override = bool(self.at_id("override") and self.next())
        contract = self.parse_contract()
        if self.accept("="):
            zero = self.next()
            if zero.text != "0":
                self.fail("expected '0' in pure-virtual declaration",
                          zero.loc)
            self.expect(";")
            if not virtual:
                self.fail("only virtual member functions can be pure", loc)
            return MethodDecl(name, ret, tuple(params), virtual, override,
                              contract, None, loc)
        body = self.parse_block()
        return MethodDecl(name, ret, tuple(params), virtual, override,
                          contract, body, loc)

    def parse_function(self) -> FuncDecl:
        loc = self.peek().loc
        ret = self.parse_type()
        name = self.expect_id().text
        params = self.parse_params()
        contract = self.parse_contract()
        body = self.parse_block()
        return FuncDecl(name, ret, tuple(params), contract, body, loc)

    def parse_params(self) -> List[Param]:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                loc = self.peek().loc
                ptype = self.parse_type()
                pname = self.expect_id().text
                params.append(Param(ptype, pname, loc))
                if not self.accept(","):
                    break
        self.expect(")")
        return params

    def parse_contract(self) -> Contract:
        t = self.peek()
        if not (t.ghost and self.at_id("requires")):
            self.fail("expected //@ requires ... contract")
        loc = self.next().loc
        pre = self.parse_assertion()
        self.expect(";")
        if not (self.peek().ghost and self.at_id("ensures")):
            self.fail("expected //@ ensures ... after requires")
        self.next()
        post = self.parse_assertion()
        self.expect(";")
        return Contract(pre, post, loc)

    def parse_predicate(self) -> PredicateDecl:
        loc = self.next().loc  # 'predicate'
        name = self.expect_id().text
        self.expect("(")
        params: List[Param] = []
        precise = False
        if not self.at(")"):
            while True:
                ploc = self.peek().loc
                ptype = self.parse_type()
                pname = self.expect_id().text
                params.append(Param(ptype, pname, ploc))
                if self.accept(","):
                    continue
                if self.accept(";"):
                    if precise:
                        self.fail("at most one ';' separator in predicate "
                                  "parameters")
                    precise = True
                    if self.at(")"):
                        break
                    continue
                break
        self.expect(")")
        body = None
        if self.accept("="):
            body = self.parse_assertion()
        self.expect(";")
        return PredicateDecl(name, tuple(params), body, precise, loc)

    # --- statements ---

    def parse_block(self) -> BlockS:
        loc = self.expect("{").loc
        stmts = []
        while not self.at("}"):
            stmts.append(self.parse_stmt())
        self.expect("}")
        return BlockS(tuple(stmts), loc)

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if t.ghost and t.kind == "id" and t.text in GHOST_STMT_KEYWORDS:
            self.next()
            payload = self.parse_assertion()
            self.expect(";")
            if t.text in ("open", "close") and not isinstance(
                    payload, (ChunkA, InstPredA)):
                self.fail(f"{t.text} expects a single predicate assertion",
                          t.loc)
            return GhostS(t.text, payload, t.loc)
        if self.at("{"):
            return self.parse_block()
        if self.at_id("if"):
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            els = None
            if self.at_id("else"):
                self.next()
                els = self.parse_block()
            return IfS(cond, then, els, t.loc)
        if self.at_id("return"):
            self.next()
            expr = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return ReturnS(expr, t.loc)
        if self.at_id("delete"):
            self.next()
            expr = self.parse_expr()
            self.expect(";")
            return DeleteS(expr, t.loc)
        if self.looks_like_decl():
            return self.parse_vardecl()
        expr = self.parse_expr()
        if self.accept("="):
            rhs = self.parse_expr()
            self.expect(";")
            return AssignS(expr, rhs, t.loc)
        self.expect(";")
        return ExprS(expr, t.loc)

    def looks_like_decl(self) -> bool:
        t = self.peek()
        if t.kind != "id":
            return False
        if t.text in ("int", "bool", "void"):
            return True
        if t.text in RESERVED:
            return False
        off = 1
        while self.peek(off).text in ("*", "&"):
            off += 1
        nxt = self.peek(off)
        if nxt.kind != "id" or nxt.text in RESERVED:
            return False
        after = self.peek(off + 1).text
        return after in ("=", ";", "(") if off == 1 else True

    def parse_vardecl(self) -> VarDeclS:
        loc = self.peek().loc
        vtype = self.parse_type()
        name = self.expect_id().text
        if self.accept("="):
            init = self.parse_expr()
            self.expect(";")
            return VarDeclS(vtype, name, init, None, loc)
        if self.at("("):
            self.next()
            args = self.parse_args(patterns=False)
            self.expect(")")
            self.expect(";")
            return VarDeclS(vtype, name, None, tuple(args), loc)
        self.expect(";")
        if vtype.ptr == 0 and not vtype.ref and \
                vtype.name not in ("int", "bool", "void"):
            return VarDeclS(vtype, name, None, (), loc)  # default ctor
        return VarDeclS(vtype, name, None, None, loc)

    # --- expressions ---

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.at("||"):
            loc = self.next().loc
            e = BinaryE("||", e, self.parse_and(), loc)
        return e

    def parse_and(self) -> Expr:
        e = self.parse_cmp()
        while self.at("&&"):
            loc = self.next().loc
            e = BinaryE("&&", e, self.parse_cmp(), loc)
        return e

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        while self.peek().text in ("==", "!=", "<", "<=", ">", ">="):
            op = self.next()
            e = BinaryE(op.text, e, self.parse_add(), op.loc)
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.peek().text in ("+", "-"):
            op = self.next()
            e = BinaryE(op.text, e, self.parse_mul(), op.loc)
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.at("*"):
            loc = self.next().loc
            e = BinaryE("*", e, self.parse_unary(), loc)
        return e

    def at_cast(self) -> bool:
        if not self.at("("):
            return False
        t = self.peek(1)
        if t.kind != "id" or (t.text in RESERVED and
                              t.text not in ("int", "bool")):
            return False
        off = 2
        stars = 0
        while self.peek(off).text == "*":
            stars += 1
            off += 1
        return stars >= 1 and self.peek(off).text == ")"

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.text in ("-", "!", "*"):
            self.next()
            return UnaryE(t.text, self.parse_unary(), t.loc)
        if t.text == "&":
            self.next()
            if self.at_id("typeid"):
                self.next()
                self.expect("(")
                cls = self.expect_id().text
                self.expect(")")
                return TypeidE(cls, t.loc)
            return UnaryE("&", self.parse_unary(), t.loc)
        if self.at_cast():
            loc = self.next().loc  # '('
            ctype = self.parse_type()
            self.expect(")")
            return CastE(ctype, self.parse_unary(), loc)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            t = self.peek()
            if t.text in ("->", "."):
                self.next()
                arrow = t.text == "->"
                if self.accept("~"):
                    cls = self.expect_id().text
                    self.expect("(")
                    self.expect(")")
                    e = DtorCallE(e, arrow, cls, t.loc)
                    continue
                fname = self.expect_id().text
                e = FieldAccessE(e, arrow, fname, t.loc)
            elif t.text == "(":
                self.next()
                args = self.parse_args(patterns=True)
                self.expect(")")
                e = CallE(e, tuple(args), t.loc)
            else:
                return e

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLitE(int(t.text), t.loc)
        if self.at_id("true") or self.at_id("false"):
            self.next()
            return BoolLitE(t.text == "true", t.loc)
        if self.at_id("nullptr"):
            self.next()
            return NullLitE(t.loc)
        if self.at_id("this"):
            self.next()
            return ThisE(t.loc)
        if self.at_id("new"):
            self.next()
            cls = self.expect_id().text
            self.expect("(")
            args = self.parse_args(patterns=False)
            self.expect(")")
            return NewE(cls, tuple(args), t.loc)
        if self.at_id("result"):
            self.next()
            return NameE("result", t.loc)
        if t.kind == "id" and t.text not in RESERVED:
            self.next()
            if self.at("::"):
                self.next()
                name = self.expect_id().text
                return QualifiedE(t.text, name, t.loc)
            return NameE(t.text, t.loc)
        if self.at("("):
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        self.fail(f"unexpected token {t.text!r} in expression")

    def parse_args(self, patterns: bool) -> List[Expr]:
        args: List[Expr] = []
        if self.at(")"):
            return args
        while True:
            args.append(self.parse_arg(patterns))
            if not self.accept(","):
                break
        return args

    def parse_arg(self, patterns: bool) -> Expr:
        t = self.peek()
        if patterns and t.text == "?":
            self.next()
            name = self.expect_id().text
            return PatternE(name, t.loc)
        if patterns and t.kind == "id" and t.text == "_":
            self.next()
            return PatternE(None, t.loc)
        return self.parse_expr()

    # --- assertions ---

    def parse_assertion(self) -> Assertion:
        first = self.parse_conjunct()
        if self.at("?") and isinstance(first, PureA):
            loc = self.next().loc
            then = self.parse_assertion()
            self.expect(":")
            els = self.parse_assertion()
            return CondA(first.expr, then, els, loc)
        if self.at("&*&"):
            loc = self.next().loc
            return SepA(first, self.parse_assertion(), loc)
        return first

    def parse_coeff(self):
        t = self.peek()
        if t.text == "?":
            self.next()
            return CoeffBind(self.expect_id().text)
        if t.kind == "id" and t.text == "_":
            self.next()
            return CoeffWild()
        if t.kind == "id" and t.text not in RESERVED:
            return CoeffName(self.next().text)
        if t.kind == "int":
            num = int(self.next().text)
            den = 1
            if self.accept("/"):
                den = int(self.next().text)
            frac = Fraction(num, den)
            if not 0 < frac <= 1:
                self.fail("coefficient must lie in (0, 1]", t.loc)
            return CoeffExact(frac)
        self.fail(f"expected coefficient, found {t.text!r}")

    def parse_conjunct(self) -> Assertion:
        t = self.peek()
        if self.at("["):
            self.next()
            coeff = self.parse_coeff()
            self.expect("]")
            e = self.parse_postfix()
            a = self.classify_assertion(e, coeff, t.loc)
            if isinstance(a, PureA):
                self.fail("coefficient requires a chunk or predicate "
                          "assertion", t.loc)
            return a
        if self.at_id("emp"):
            self.next()
            return EmpA(t.loc)
        e = self.parse_expr()
        if self.at("|->"):
            loc = self.next().loc
            rhs = self.parse_arg(patterns=True)
            if not isinstance(e, FieldAccessE):
                self.fail("points-to target must be a field lvalue", loc)
            return PointsToA(e, rhs, None, loc)
        return self.classify_assertion(e, None, t.loc)

    def classify_assertion(self, e: Expr, coeff, loc: Loc) -> Assertion:
        if isinstance(e, CallE):
            callee = e.callee
            if isinstance(callee, NameE):
                return ChunkA(callee.name, e.args, coeff, loc)
            if isinstance(callee, FieldAccessE):
                return InstPredA(callee.target, None, callee.field, e.args,
                                 coeff, loc)
            if isinstance(callee, CallE) and len(callee.args) == 1:
                inner = callee.callee
                if isinstance(inner, NameE):
                    return InstPredA(None, callee.args[0], inner.name,
                                     e.args, coeff, loc)
                if isinstance(inner, FieldAccessE):
                    return InstPredA(inner.target, callee.args[0],
                                     inner.field, e.args, coeff, loc)
        return PureA(e, loc)


def parse_program(text: str, path: str = "<input>") -> Program:
    """Parse a MiniCpp source string; raises ParseError on failure."""
    try:
        toks = tokenize(text, path)
    except LexError as err:
        raise ParseError([err.diagnostic]) from None
    return _Parser(toks, path).parse_program()


def parse_assertion(text: str, path: str = "<assertion>") -> Assertion:
    """Parse a single ghost assertion string."""
    try:
        toks = tokenize("/*@ " + text + " @*/", path)
    except LexError as err:
        raise ParseError([err.diagnostic]) from None
    p = _Parser(toks, path)
    a = p.parse_assertion()
    if p.peek().kind != "eof":
        p.fail(f"trailing input after assertion: {p.peek().text!r}")
    return a
