"""Assertion semantics: evaluating ghost expressions, producing and
consuming assertions against the chunk heap, and opening/closing
predicates (static, vtype and instance predicates)."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Tuple

from .classmodel import ClassTable, UpcastAmbiguous, UpcastNotABase
from .diagnostics import Category, CheckError, Loc, TraceEvent
from .heap import (
    Bind, Binding, Chunk, Fixed, FracLit, SymState, Wild, find_chunk,
    match_chunk,
)
from .syntax import (
    BinaryE, BoolLitE, CallE, CastE, ChunkA, CoeffBind, CoeffExact,
    CoeffName, CoeffWild, CondA, DtorCallE, EmpA, Expr, FieldAccessE,
    GhostS, InstPredA, IntLitE, NameE, NewE, NullLitE, PatternE, PointsToA,
    PredicateDecl, PureA, QualifiedE, SepA, ThisE, TypeExpr, TypeidE,
    TYPEINFO_T, UnaryE, PRIMITIVES,
)
from .terms import (
    App, BoolLit, FieldPtr, IntLit, Sym, Term, TypeInfo, ZERO, eq, negate,
)

ONE = Fraction(1)

_NULL_T = TypeExpr("@null", 1)
_INT = TypeExpr("int")
_BOOL = TypeExpr("bool")

_FLIP = {">": "<", ">=": "<="}


class _Shape:
    """Resolved meaning of a chunk-form assertion name."""

    def __init__(self, kind: str, family: str, cls: Optional[str],
                 arg_types: List[Optional[TypeExpr]]):
        self.kind = kind          # static | vtype | bases | newblock | field
        self.family = family
        self.cls = cls
        self.arg_types = arg_types


class SymbolicChecker:
    """Evaluates ghost expressions and transfers assertions in and out of
    the symbolic heap."""

    def __init__(self, table: ClassTable, trace: bool = False):
        self.table = table
        self._uid = 0
        self.trace: Optional[List[TraceEvent]] = [] if trace else None
        self.ctx_cls: Optional[str] = None

    def fresh(self, hint: str) -> Sym:
        self._uid += 1
        return Sym(self._uid, hint)

    def note(self, kind: str, detail: str, loc: Optional[Loc],
             state: SymState) -> None:
        if self.trace is not None:
            self.trace.append(TraceEvent(kind, detail, loc,
                                         len(state.heap)))

    # --- expression evaluation ---

    def eval_call(self, state: SymState, e: Expr) -> Tuple[Term, TypeExpr]:
        raise CheckError(Category.MALFORMED_ASSERTION,
                         "function calls are not allowed in this context",
                         e.loc)

    def eval_expr(self, state: SymState, e: Expr) -> Tuple[Term, TypeExpr]:
        if isinstance(e, IntLitE):
            return IntLit(e.value), _INT
        if isinstance(e, BoolLitE):
            return BoolLit(e.value), _BOOL
        if isinstance(e, NullLitE):
            return ZERO, _NULL_T
        if isinstance(e, NameE):
            b = state.lookup(e.name)
            if b is None:
                fa = self._implicit_this_field(state, e.name, e.loc)
                if fa is not None:
                    return self.read_field(state, fa)
                raise CheckError(Category.UNKNOWN_NAME,
                                 f"unknown name {e.name}", e.loc)
            return b.term, b.type or _INT
        if isinstance(e, ThisE):
            b = state.lookup("this")
            if b is None:
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 "'this' outside of a member context", e.loc)
            return b.term, b.type or _INT
        if isinstance(e, FieldAccessE):
            return self.read_field(state, e)
        if isinstance(e, UnaryE):
            if e.op == "-":
                t, _ = self.eval_expr(state, e.operand)
                return App("neg", (t,)), _INT
            if e.op == "!":
                t, _ = self.eval_expr(state, e.operand)
                return negate(t), _BOOL
            raise CheckError(Category.MALFORMED_ASSERTION,
                             f"unsupported unary operator {e.op}", e.loc)
        if isinstance(e, BinaryE):
            lt, _ = self.eval_expr(state, e.left)
            rt, _ = self.eval_expr(state, e.right)
            op = e.op
            if op in _FLIP:
                op = _FLIP[op]
                lt, rt = rt, lt
            ty = _INT if op in ("+", "-", "*") else _BOOL
            return App(op, (lt, rt)), ty
        if isinstance(e, CastE):
            return self.eval_cast(state, e)
        if isinstance(e, TypeidE):
            if not self.table.has_class(e.cls):
                raise CheckError(Category.UNKNOWN_NAME,
                                 f"unknown class {e.cls}", e.loc)
            return TypeInfo(e.cls), TYPEINFO_T
        if isinstance(e, (CallE, NewE)):
            return self.eval_call(state, e)
        if isinstance(e, DtorCallE):
            raise CheckError(Category.EXPLICIT_DTOR_CALL,
                             "explicit destructor calls are not allowed",
                             e.loc)
        if isinstance(e, QualifiedE):
            raise CheckError(Category.MALFORMED_ASSERTION,
                             f"{e.cls}::{e.name} is not a value", e.loc)
        if isinstance(e, PatternE):
            raise CheckError(Category.MALFORMED_ASSERTION,
                             "pattern not allowed in this position", e.loc)
        raise CheckError(Category.MALFORMED_ASSERTION,
                         f"cannot evaluate expression {e!r}", e.loc)

    def _implicit_this_field(self, state: SymState, name: str,
                             loc) -> Optional[FieldAccessE]:
        """A bare name in a member context that resolves to a field is
        shorthand for this->name."""
        if self.ctx_cls is None or state.lookup("this") is None:
            return None
        try:
            if self.table.lookup_field(self.ctx_cls, name) is None:
                return None
        except UpcastAmbiguous:
            pass
        return FieldAccessE(ThisE(loc), True, name, loc)

    def eval_cast(self, state: SymState, e: CastE) -> Tuple[Term, TypeExpr]:
        t, ty = self.eval_expr(state, e.operand)
        target = e.type
        if not target.is_class_ptr or not self.table.has_class(target.name):
            raise CheckError(Category.MALFORMED_ASSERTION,
                             f"unsupported cast to {target}", e.loc)
        if ty == _NULL_T:
            return ZERO, target
        if not ty.is_class_ptr:
            raise CheckError(Category.MALFORMED_ASSERTION,
                             f"cannot cast {ty} to {target}", e.loc)
        if ty.name == target.name:
            return t, target
        return self.adjust(t, ty.name, target.name, e.loc), target

    def adjust(self, term: Term, from_cls: str, to_cls: str,
               loc: Optional[Loc]) -> Term:
        """Shift a pointer to its unique to_cls base subobject."""
        if from_cls == to_cls:
            return term
        try:
            hops = self.table.upcast_path(from_cls, to_cls)
        except UpcastNotABase as err:
            raise CheckError(Category.NOT_A_BASE, str(err), loc) from None
        except UpcastAmbiguous as err:
            raise CheckError(Category.AMBIGUOUS_UPCAST, str(err),
                             loc) from None
        for d, b in hops:
            term = FieldPtr(term, d, b)
        return term

    def _target_class(self, e: FieldAccessE, ty: TypeExpr) -> str:
        if e.arrow:
            if not ty.is_class_ptr or not self.table.has_class(ty.name):
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 f"-> on non-pointer type {ty}", e.loc)
        else:
            if ty.ptr or not self.table.has_class(ty.name):
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 f". on non-class type {ty}", e.loc)
        return ty.name

    def read_field(self, state: SymState,
                   e: FieldAccessE) -> Tuple[Term, TypeExpr]:
        """Field read: peeks at any fraction of the field chunk."""
        t, ty = self.eval_expr(state, e.target)
        scls = self._target_class(e, ty)
        try:
            found = self.table.lookup_field(scls, e.field)
        except UpcastAmbiguous as err:
            raise CheckError(Category.AMBIGUOUS_UPCAST, str(err),
                             e.loc) from None
        if found is None:
            raise CheckError(Category.UNKNOWN_NAME,
                             f"class {scls} has no field {e.field}", e.loc)
        declcls, fd = found
        addr = self.adjust(t, scls, declcls, e.loc)
        family = f"{declcls}_{fd.name}"
        c = find_chunk(state, family, addr)
        if c is None:
            raise CheckError(Category.MISSING_CHUNK,
                             f"no {family} chunk for this object", e.loc)
        return c.args[1], fd.type

    # --- chunk-name resolution ---

    def resolve_chunk(self, name: str, nargs: int,
                      loc: Optional[Loc]) -> _Shape:
        table = self.table
        if name in table.predicates:
            p = table.predicates[name]
            shape = _Shape("static", name, None,
                           [q.type for q in p.params])
        else:
            shape = None
            for cname in table.classes:
                if name == f"{cname}_vtype":
                    shape = _Shape("vtype", name, cname,
                                   [TypeExpr(cname, 1), TYPEINFO_T])
                    break
                if name == f"{cname}_bases_constructed":
                    shape = _Shape("bases", name, cname,
                                   [TypeExpr(cname, 1)])
                    break
                if name == f"new_block_{cname}":
                    shape = _Shape("newblock", name, cname,
                                   [TypeExpr(cname, 1)])
                    break
            if shape is None:
                hits = []
                for cname, info in table.classes.items():
                    for f in info.fields:
                        if name == f"{cname}_{f.name}":
                            hits.append((cname, f))
                if len(hits) > 1:
                    raise CheckError(
                        Category.MALFORMED_ASSERTION,
                        f"chunk name {name} is ambiguous", loc)
                if hits:
                    cname, f = hits[0]
                    shape = _Shape("field", name, cname,
                                   [TypeExpr(cname, 1), f.type])
        if shape is None:
            raise CheckError(Category.UNKNOWN_PREDICATE,
                             f"unknown predicate or chunk name {name}", loc)
        if nargs != len(shape.arg_types):
            raise CheckError(Category.MALFORMED_ASSERTION,
                             f"{name} expects {len(shape.arg_types)} "
                             f"argument(s), got {nargs}", loc)
        return shape

    def _convert(self, state: SymState, term: Term, actual: TypeExpr,
                 expected: Optional[TypeExpr], loc: Optional[Loc]) -> Term:
        """Implicit derived-to-base pointer conversion toward the
        expected argument type."""
        if expected is None or actual is None:
            return term
        if actual == _NULL_T:
            return term
        if actual.is_class_ptr and expected.is_class_ptr and \
                actual.name != expected.name and \
                self.table.has_class(actual.name) and \
                self.table.has_class(expected.name):
            return self.adjust(term, actual.name, expected.name, loc)
        return term

    def _coeff_to_produce(self, state: SymState, coeff,
                          scale: Fraction, loc) -> Fraction:
        if coeff is None or isinstance(coeff, CoeffWild):
            return scale
        if isinstance(coeff, CoeffExact):
            return coeff.value * scale
        if isinstance(coeff, CoeffBind):
            state.bind(coeff.name, FracLit(scale))
            return scale
        if isinstance(coeff, CoeffName):
            b = state.lookup(coeff.name)
            if b is None or not isinstance(b.term, FracLit):
                raise CheckError(Category.UNKNOWN_NAME,
                                 f"unknown coefficient {coeff.name}", loc)
            return b.term.value * scale
        raise CheckError(Category.MALFORMED_ASSERTION,
                         "bad coefficient", loc)

    def _coeff_to_consume(self, state: SymState, coeff,
                          scale: Fraction, loc):
        if coeff is None:
            return scale
        if isinstance(coeff, CoeffExact):
            return coeff.value * scale
        if isinstance(coeff, CoeffBind):
            return Bind(coeff.name, None)
        if isinstance(coeff, CoeffWild):
            return Wild()
        if isinstance(coeff, CoeffName):
            b = state.lookup(coeff.name)
            if b is None or not isinstance(b.term, FracLit):
                raise CheckError(Category.UNKNOWN_NAME,
                                 f"unknown coefficient {coeff.name}", loc)
            return b.term.value * scale
        raise CheckError(Category.MALFORMED_ASSERTION,
                         "bad coefficient", loc)

    # --- produce ---

    def produce(self, state: SymState, a, cls: Optional[str],
                scale: Fraction = ONE) -> List[SymState]:
        if isinstance(a, SepA):
            out = []
            for s in self.produce(state, a.left, cls, scale):
                out.extend(self.produce(s, a.right, cls, scale))
            return out
        if isinstance(a, EmpA):
            return [state]
        if isinstance(a, PureA):
            t, _ = self.eval_expr(state, a.expr)
            state.assume(t)
            self.note("assume", f"{a.expr}", a.loc, state)
            return [state]
        if isinstance(a, CondA):
            return self._branch(state, a, cls, scale, self.produce)
        if isinstance(a, PointsToA):
            return self._produce_points_to(state, a, scale)
        if isinstance(a, InstPredA):
            return self._produce_instpred(state, a, cls, scale)
        if isinstance(a, ChunkA):
            if cls is not None and self._visible_instpred(cls, a.name):
                ip = InstPredA(None, None, a.name, a.args, a.coeff, a.loc)
                return self._produce_instpred(state, ip, cls, scale)
            shape = self.resolve_chunk(a.name, len(a.args), a.loc)
            args = self._produce_args(state, a.args, shape.arg_types, a.loc)
            coeff = self._coeff_to_produce(state, a.coeff, scale, a.loc)
            state.add_chunk(Chunk(shape.family, coeff, tuple(args)))
            self.note("produce", str(state.heap[-1]), a.loc, state)
            return [state]
        raise CheckError(Category.MALFORMED_ASSERTION,
                         f"cannot produce assertion {a!r}", None)

    def _visible_instpred(self, cls: str, name: str) -> bool:
        try:
            return self.table.has_class(cls) and \
                self.table.instpred_root(cls, name) is not None
        except UpcastAmbiguous:
            return True

    def _produce_args(self, state: SymState, args, arg_types,
                      loc) -> List[Term]:
        out = []
        for x, ty in zip(args, arg_types):
            if isinstance(x, PatternE):
                s = self.fresh(x.name or "v")
                if x.name is not None:
                    state.bind(x.name, s, ty)
                out.append(s)
            else:
                t, aty = self.eval_expr(state, x)
                out.append(self._convert(state, t, aty, ty, loc))
        return out

    def _produce_points_to(self, state: SymState, a: PointsToA,
                           scale: Fraction) -> List[SymState]:
        family, addr, fd = self._points_to_parts(state, a)
        vals = self._produce_args(state, [a.value], [fd.type], a.loc)
        coeff = self._coeff_to_produce(state, a.coeff, scale, a.loc)
        state.add_chunk(Chunk(family, coeff, (addr, vals[0])))
        self.note("produce", str(state.heap[-1]), a.loc, state)
        return [state]

    def _points_to_parts(self, state: SymState, a: PointsToA):
        e = a.target
        t, ty = self.eval_expr(state, e.target)
        scls = self._target_class(e, ty)
        info = self.table.cls(scls)
        fd = next((f for f in info.fields if f.name == e.field), None)
        if fd is None:
            raise CheckError(
                Category.UNKNOWN_NAME,
                f"class {scls} does not itself declare field {e.field}; "
                f"fields of bases need an explicit cast", a.loc)
        return f"{scls}_{e.field}", t, fd

    def _produce_instpred(self, state: SymState, a: InstPredA,
                          cls: Optional[str],
                          scale: Fraction) -> List[SymState]:
        family, target, index, ptypes = \
            self._desugar_instance(state, a, cls, consume=False)
        args = self._produce_args(state, a.args, ptypes, a.loc)
        coeff = self._coeff_to_produce(state, a.coeff, scale, a.loc)
        state.add_chunk(Chunk(family, coeff, tuple([target] + args), index))
        self.note("produce", str(state.heap[-1]), a.loc, state)
        return [state]

    # --- consume ---

    def consume(self, state: SymState, a, cls: Optional[str],
                scale: Fraction = ONE) -> List[SymState]:
        if isinstance(a, SepA):
            out = []
            for s in self.consume(state, a.left, cls, scale):
                out.extend(self.consume(s, a.right, cls, scale))
            return out
        if isinstance(a, EmpA):
            return [state]
        if isinstance(a, PureA):
            t, _ = self.eval_expr(state, a.expr)
            if not state.entails(t):
                raise CheckError(Category.MISSING_CHUNK,
                                 f"cannot prove {a.expr}", a.loc)
            self.note("prove", f"{a.expr}", a.loc, state)
            return [state]
        if isinstance(a, CondA):
            return self._branch(state, a, cls, scale, self.consume)
        if isinstance(a, PointsToA):
            family, addr, fd = self._points_to_parts(state, a)
            pats = self._consume_pats(state, [a.value], [fd.type], a.loc)
            coeff = self._coeff_to_consume(state, a.coeff, scale, a.loc)
            self._do_match(state, family, None, coeff, [Fixed(addr)] + pats,
                           a.loc, family)
            return [state]
        if isinstance(a, InstPredA):
            return self._consume_instpred(state, a, cls, scale)
        if isinstance(a, ChunkA):
            if cls is not None and self._visible_instpred(cls, a.name):
                ip = InstPredA(None, None, a.name, a.args, a.coeff, a.loc)
                return self._consume_instpred(state, ip, cls, scale)
            shape = self.resolve_chunk(a.name, len(a.args), a.loc)
            pats = self._consume_pats(state, a.args, shape.arg_types, a.loc)
            coeff = self._coeff_to_consume(state, a.coeff, scale, a.loc)
            self._do_match(state, shape.family, None, coeff, pats, a.loc,
                           a.name)
            return [state]
        raise CheckError(Category.MALFORMED_ASSERTION,
                         f"cannot consume assertion {a!r}", None)

    def _consume_pats(self, state: SymState, args, arg_types, loc):
        pats = []
        for x, ty in zip(args, arg_types):
            if isinstance(x, PatternE):
                pats.append(Wild() if x.name is None else Bind(x.name, ty))
            else:
                t, aty = self.eval_expr(state, x)
                pats.append(Fixed(self._convert(state, t, aty, ty, loc)))
        return pats

    def _do_match(self, state: SymState, family: str, index_pat, coeff_pat,
                  arg_pats, loc, desc: str):
        index = Fixed(index_pat) if isinstance(index_pat, Term) else index_pat
        m = match_chunk(state, family, index, coeff_pat, arg_pats)
        if m is None:
            raise CheckError(Category.MISSING_CHUNK,
                             f"no matching {desc} chunk in the heap "
                             f"(heap: {state.heap_str()})", loc)
        for name, b in m.bindings.items():
            state.env[name] = b
        self.note("consume", str(m.chunk), loc, state)
        return m

    def _consume_instpred(self, state: SymState, a: InstPredA,
                          cls: Optional[str],
                          scale: Fraction) -> List[SymState]:
        family, target, index, ptypes = \
            self._desugar_instance(state, a, cls, consume=True)
        pats = self._consume_pats(state, a.args, ptypes, a.loc)
        coeff = self._coeff_to_consume(state, a.coeff, scale, a.loc)
        self._do_match(state, family, index, coeff,
                       [Fixed(target)] + pats, a.loc, a.name)
        return [state]

    def _branch(self, state: SymState, a: CondA, cls, scale,
                action) -> List[SymState]:
        t, _ = self.eval_expr(state, a.cond)
        if state.entails(t):
            return action(state, a.then, cls, scale)
        if state.entails(negate(t)):
            return action(state, a.els, cls, scale)
        s2 = state.copy()
        state.assume(t)
        s2.assume(negate(t))
        out = action(state, a.then, cls, scale)
        out.extend(action(s2, a.els, cls, scale))
        return out

    # --- instance predicates ---

    def _desugar_instance(self, state: SymState, a: InstPredA,
                          cls: Optional[str], consume: bool):
        """Resolve an instance-predicate assertion to its chunk family,
        canonical target (the subobject of the base-most declaring class),
        index pattern/term and parameter types."""
        if a.target is None:
            b = state.lookup("this")
            if b is None or cls is None:
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 f"instance predicate {a.name} used outside "
                                 f"a member context", a.loc)
            t, scls = b.term, cls
        else:
            t, ty = self.eval_expr(state, a.target)
            if not (ty.is_class_ptr and self.table.has_class(ty.name)):
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 f"instance predicate target has non-class "
                                 f"type {ty}", a.loc)
            scls = ty.name
        try:
            root = self.table.instpred_root(scls, a.name)
        except UpcastAmbiguous as err:
            raise CheckError(Category.AMBIGUOUS_UPCAST, str(err),
                             a.loc) from None
        if root is None:
            raise CheckError(Category.UNKNOWN_PREDICATE,
                             f"class {scls} has no instance predicate "
                             f"{a.name}", a.loc)
        family = f"{root}#{a.name}"
        decl = self.table.predicate_def(root, a.name)
        ptypes = [q.type for q in decl.params]
        if len(a.args) != len(ptypes):
            raise CheckError(Category.MALFORMED_ASSERTION,
                             f"{a.name} expects {len(ptypes)} argument(s), "
                             f"got {len(a.args)}", a.loc)
        target = self.adjust(t, scls, root, a.loc)

        if a.index is not None:
            if isinstance(a.index, PatternE):
                if consume:
                    index = Wild() if a.index.name is None else \
                        Bind(a.index.name, TYPEINFO_T)
                else:
                    s = self.fresh(a.index.name or "ti")
                    if a.index.name is not None:
                        state.bind(a.index.name, s, TYPEINFO_T)
                    index = s
            else:
                index, _ = self.eval_expr(state, a.index)
        elif a.target is None:
            b = state.lookup("thisType")
            if b is None:
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 "no dynamic type in scope for instance "
                                 f"predicate {a.name}", a.loc)
            index = b.term
        elif not self.table.is_polymorphic(scls):
            index = TypeInfo(scls)
        else:
            c = find_chunk(state, f"{scls}_vtype", t)
            if c is None:
                raise CheckError(Category.MISSING_CHUNK,
                                 f"no {scls}_vtype chunk to determine the "
                                 f"dynamic type of the target", a.loc)
            index = c.args[1]
        return family, target, index, ptypes

    # --- open / close ---

    def open_close(self, state: SymState, g: GhostS,
                   cls: Optional[str]) -> List[SymState]:
        a = g.payload
        opening = g.kind == "open"
        if isinstance(a, ChunkA):
            if cls is not None and self._visible_instpred(cls, a.name):
                ip = InstPredA(None, None, a.name, a.args, a.coeff, a.loc)
                return self._open_close_instpred(state, ip, cls, opening)
            shape = self.resolve_chunk(a.name, len(a.args), a.loc)
            if shape.kind == "vtype":
                return self._open_close_vtype(state, a, shape, opening)
            if shape.kind == "static":
                return self._open_close_static(state, a, shape, opening)
            raise CheckError(Category.OPAQUE_PREDICATE,
                             f"{a.name} is a built-in chunk and cannot be "
                             f"opened or closed", a.loc)
        if isinstance(a, InstPredA):
            return self._open_close_instpred(state, a, cls, opening)
        raise CheckError(Category.MALFORMED_ASSERTION,
                         f"{g.kind} expects a predicate assertion", g.loc)

    def _open_close_vtype(self, state: SymState, a: ChunkA, shape: _Shape,
                          opening: bool) -> List[SymState]:
        c = shape.cls
        defn = self.table.vtype_definition(c)
        if defn is None:
            raise CheckError(Category.OPAQUE_PREDICATE,
                             f"{c}_vtype is opaque: {c} has no polymorphic "
                             f"direct bases", a.loc)
        if opening:
            pats = self._consume_pats(state, a.args, shape.arg_types, a.loc)
            coeff = self._coeff_to_consume(state, a.coeff, ONE, a.loc)
            m = self._do_match(state, shape.family, None, coeff, pats,
                               a.loc, a.name)
            addr, info = m.chunk.args
            for b in defn:
                piece = self.adjust(addr, c, b, a.loc)
                state.add_chunk(Chunk(f"{b}_vtype", m.taken, (piece, info)))
                self.note("produce", str(state.heap[-1]), a.loc, state)
            return [state]
        # close: pattern-free arguments
        args = self._close_args(state, a.args, shape.arg_types, a.loc)
        addr, info = args
        coeff = self._coeff_to_consume(state, a.coeff, ONE, a.loc)
        taken = coeff if isinstance(coeff, Fraction) else None
        got = None
        for b in defn:
            piece = self.adjust(addr, c, b, a.loc)
            m = self._do_match(state, f"{b}_vtype", None,
                               coeff if taken is None else taken,
                               [Fixed(piece), Fixed(info)], a.loc,
                               f"{b}_vtype")
            taken = m.taken
            got = m.taken
        state.add_chunk(Chunk(shape.family, got if got is not None else ONE,
                              tuple(args)))
        self.note("produce", str(state.heap[-1]), a.loc, state)
        return [state]

    def _close_args(self, state: SymState, args, arg_types,
                    loc) -> List[Term]:
        out = []
        for x, ty in zip(args, arg_types):
            if isinstance(x, PatternE):
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 "close requires concrete arguments", loc)
            t, aty = self.eval_expr(state, x)
            out.append(self._convert(state, t, aty, ty, loc))
        return out

    def _open_close_static(self, state: SymState, a: ChunkA, shape: _Shape,
                           opening: bool) -> List[SymState]:
        decl = self.table.predicates[a.name]
        if decl.body is None:
            raise CheckError(Category.OPAQUE_PREDICATE,
                             f"predicate {a.name} has no definition", a.loc)
        if opening:
            pats = self._consume_pats(state, a.args, shape.arg_types, a.loc)
            coeff = self._coeff_to_consume(state, a.coeff, ONE, a.loc)
            m = self._do_match(state, shape.family, None, coeff, pats,
                               a.loc, a.name)
            return self._with_body_env(
                state, decl, list(m.chunk.args), None, None,
                lambda s: self.produce(s, decl.body, None, m.taken))
        args = self._close_args(state, a.args, shape.arg_types, a.loc)
        coeff = self._coeff_to_consume(state, a.coeff, ONE, a.loc)
        if not isinstance(coeff, Fraction):
            coeff = ONE
        out = []
        for s in self._with_body_env(
                state, decl, args, None, None,
                lambda s: self.consume(s, decl.body, None, coeff)):
            s.add_chunk(Chunk(shape.family, coeff, tuple(args)))
            self.note("produce", str(s.heap[-1]), a.loc, s)
            out.append(s)
        return out

    def _with_body_env(self, state: SymState, decl: PredicateDecl,
                       args: List[Term], this: Optional[Tuple[Term, str]],
                       this_type: Optional[Term], action) -> List[SymState]:
        """Run action with the environment of a predicate body, then
        restore the caller's bindings (keeping nothing from the body)."""
        saved = state.env
        env = {}
        if this is not None:
            env["this"] = Binding(this[0], TypeExpr(this[1], 1))
        if this_type is not None:
            env["thisType"] = Binding(this_type, TYPEINFO_T)
        for q, t in zip(decl.params, args):
            env[q.name] = Binding(t, q.type)
        state.env = env
        out = action(state)
        for s in out:
            s.env = saved
        return out

    def _open_close_instpred(self, state: SymState, a: InstPredA,
                             cls: Optional[str],
                             opening: bool) -> List[SymState]:
        family, target, index, ptypes = \
            self._desugar_instance(state, a, cls, consume=opening)
        # the definition is selected by the index, which must be provably
        # a known class constant
        idx_term = index if isinstance(index, Term) else None
        root = family.split("#")[0]
        name = family.split("#")[1]
        if idx_term is None:
            raise CheckError(Category.MALFORMED_ASSERTION,
                             "open/close requires a concrete index", a.loc)
        kcls = None
        for cname in self.table.classes:
            if state.entails(eq(idx_term, TypeInfo(cname))):
                kcls = cname
                break
        if kcls is None:
            raise CheckError(Category.UNKNOWN_INDEX,
                             f"index of {name} is not provably a known "
                             f"class constant", a.loc)
        decl = None
        declcls = None
        for cname in [kcls] + self.table.ancestors(kcls):
            decl = self.table.predicate_def(cname, name)
            if decl is not None:
                declcls = cname
                break
        if decl is None or decl.body is None:
            raise CheckError(Category.OPAQUE_PREDICATE,
                             f"instance predicate {name} has no definition "
                             f"for class {kcls}", a.loc)
        # `this` inside the body is the subobject of the declaring class,
        # reached from the original target
        if a.target is None:
            b = state.lookup("this")
            src_term, src_cls = b.term, cls
        else:
            src_term, sty = self.eval_expr(state, a.target)
            src_cls = sty.name
        body_this = self.adjust(src_term, src_cls, declcls, a.loc)

        if opening:
            pats = self._consume_pats(state, a.args, ptypes, a.loc)
            coeff = self._coeff_to_consume(state, a.coeff, ONE, a.loc)
            m = self._do_match(state, family, idx_term, coeff,
                               [Fixed(target)] + pats, a.loc, name)
            return self._with_body_env(
                state, decl, list(m.chunk.args[1:]), (body_this, declcls),
                idx_term,
                lambda s: self.produce(s, decl.body, declcls, m.taken))
        args = self._close_args(state, a.args, ptypes, a.loc)
        coeff = self._coeff_to_consume(state, a.coeff, ONE, a.loc)
        if not isinstance(coeff, Fraction):
            coeff = ONE
        out = []
        for s in self._with_body_env(
                state, decl, args, (body_this, declcls), idx_term,
                lambda s: self.consume(s, decl.body, declcls, coeff)):
            s.add_chunk(Chunk(family, coeff, tuple([target] + args),
                              idx_term))
            self.note("produce", str(s.heap[-1]), a.loc, s)
            out.append(s)
        return out

    # --- ghost statements ---

    def ghost_stmt(self, state: SymState, g: GhostS,
                   cls: Optional[str]) -> List[SymState]:
        if g.kind in ("open", "close"):
            return self.open_close(state, g, cls)
        if g.kind == "leak":
            self.note("leak", "", g.loc, state)
            return self.consume(state, g.payload, cls)
        if g.kind == "assert":
            scratch = state.copy()
            out = []
            for s in self.consume(scratch, g.payload, cls):
                kept = state.copy()
                kept.env = s.env
                for f in s.path[len(state.path):]:
                    kept.assume(f)
                out.append(kept)
            self.note("assert", "", g.loc, state)
            return out
        raise CheckError(Category.MALFORMED_ASSERTION,
                         f"unknown ghost statement {g.kind}", g.loc)

    # --- leak checking ---

    def leak_check(self, state: SymState, loc: Optional[Loc],
                   what: str) -> None:
        if state.inconsistent:
            return
        if state.heap:
            raise CheckError(Category.LEAK,
                             f"{what} leaks {len(state.heap)} chunk(s): "
                             f"{state.heap_str()}", loc)
