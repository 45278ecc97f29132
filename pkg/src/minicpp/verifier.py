"""Symbolic execution of function, constructor and destructor bodies,
call rules, object lifetime bookkeeping and the behavioral subtyping
obligation for overrides."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .assertions import SymbolicChecker, _NULL_T
from .classmodel import (
    ClassTable, CtorInfo, UpcastAmbiguous, UpcastNotABase, signature,
)
from .diagnostics import Category, CheckError, Diagnostic, Loc
from .heap import Binding, Chunk, Fixed, SymState, find_chunk
from .syntax import (
    AssignS, BlockS, CallE, ClassDecl, CtorDecl, DeleteS, DtorCallE,
    DtorDecl, Expr, ExprS, FieldAccessE, FuncDecl, GhostS, IfS, MethodDecl,
    NameE, NewE, PatternE, Program, QualifiedE, ReturnS, ThisE, TypeExpr,
    TYPEINFO_T, VarDeclS, PRIMITIVES,
)
from .terms import FieldAddr, FieldPtr, Sym, Term, TypeInfo, ZERO, eq, ne, negate

ONE = Fraction(1)


@dataclass
class Result:
    subject: str
    loc: Loc
    diagnostic: Optional[Diagnostic] = None

    @property
    def ok(self) -> bool:
        return self.diagnostic is None


class Executor(SymbolicChecker):
    """Statement-level symbolic execution on top of the assertion engine."""

    def __init__(self, table: ClassTable, trace: bool = False):
        super().__init__(table, trace)
        self.ctx_cls: Optional[str] = None

    # --- engine-maintained chunk groups ---

    def bases_closure(self, cls: str, addr: Term) -> List[Chunk]:
        """bases_constructed chunks of cls and, recursively, of every base
        subobject."""
        out: List[Chunk] = []
        info = self.table.cls(cls)
        if info.direct_bases:
            out.append(Chunk(f"{cls}_bases_constructed", ONE, (addr,)))
            for b in info.direct_bases:
                out.extend(self.bases_closure(b, FieldPtr(addr, cls, b)))
        return out

    def engine_tail(self, cls: str, addr: Term) -> List[Chunk]:
        """Chunks the engine adds after construction and removes before
        destruction: the object's vtype plus the bases_constructed
        closure."""
        out: List[Chunk] = []
        if self.table.is_polymorphic(cls):
            out.append(Chunk(f"{cls}_vtype", ONE, (addr, TypeInfo(cls))))
        out.extend(self.bases_closure(cls, addr))
        return out

    def _consume_chunks(self, state: SymState, chunks: List[Chunk],
                        loc: Optional[Loc]) -> None:
        for c in chunks:
            self._do_match(state, c.family, c.index, c.coeff,
                           [Fixed(a) for a in c.args], loc, c.family)

    def _produce_chunks(self, state: SymState, chunks: List[Chunk]) -> None:
        for c in chunks:
            state.add_chunk(c)
            self.note("produce", str(c), None, state)

    # --- overload resolution ---

    def _conv_cost(self, actual: TypeExpr, param: TypeExpr) -> Optional[int]:
        if param.ref:
            # class-type references bind only to same-class lvalues
            if not actual.ptr and actual.name == param.name:
                return 0
            return None
        if actual == _NULL_T:
            return 1 if param.ptr else None
        if actual.name == param.name and actual.ptr == param.ptr:
            return 0
        if actual.is_class_ptr and param.is_class_ptr and \
                self.table.has_class(actual.name) and \
                self.table.has_class(param.name) and \
                self.table.derives_from(actual.name, param.name):
            return 1
        return None

    def resolve_overload(self, candidates, argtys: List[TypeExpr],
                         loc: Optional[Loc], what: str):
        """candidates: list of (item, params). Returns the unique best
        viable item by conversion cost."""
        viable = []
        for item, params in candidates:
            if len(params) != len(argtys):
                continue
            cost = 0
            for p, aty in zip(params, argtys):
                c = self._conv_cost(aty, p.type)
                if c is None:
                    cost = None
                    break
                cost += c
            if cost is not None:
                viable.append((cost, item, params))
        if not viable:
            raise CheckError(Category.NO_VIABLE_OVERLOAD,
                             f"no viable overload of {what} for argument "
                             f"types ({', '.join(str(t) for t in argtys)})",
                             loc)
        best = min(v[0] for v in viable)
        bests = [v for v in viable if v[0] == best]
        if len(bests) > 1:
            raise CheckError(Category.AMBIGUOUS_OVERLOAD,
                             f"call of {what} is ambiguous", loc)
        return bests[0][1], bests[0][2]

    def _eval_args(self, state: SymState,
                   args) -> List[Tuple[Term, TypeExpr]]:
        return [self.eval_expr(state, a) for a in args]

    def _convert_args(self, state: SymState, pairs, params,
                      loc) -> List[Term]:
        out = []
        for (t, aty), p in zip(pairs, params):
            out.append(self._convert(state, t, aty, p.type, loc))
        return out

    # --- call rules ---

    def _apply_contract(self, state: SymState, contract, env: Dict,
                        ctx: Optional[str], loc: Optional[Loc],
                        consume_extra: List[Chunk] = (),
                        produce_extra: List[Chunk] = ()) -> None:
        """Call-site rule: consume the precondition (plus extra chunks),
        produce the postcondition (plus extra chunks) under the callee
        environment."""
        saved = state.env
        state.env = env
        try:
            sts = self.consume(state, contract.requires, ctx)
            if len(sts) != 1:
                raise CheckError(
                    Category.MALFORMED_ASSERTION,
                    "conditional assertion in a call contract could not be "
                    "decided at the call site", loc)
            st = sts[0]
            self._consume_chunks(st, list(consume_extra), loc)
            sts = self.produce(st, contract.ensures, ctx)
            if len(sts) != 1:
                raise CheckError(
                    Category.MALFORMED_ASSERTION,
                    "conditional assertion in a call contract could not be "
                    "decided at the call site", loc)
            st = sts[0]
            self._produce_chunks(st, list(produce_extra))
        finally:
            pass
        st.env = saved
        if st is not state:
            state.path = st.path
            state.heap = st.heap
            state.env = saved
            state.inconsistent = st.inconsistent
            state._closure = st._closure

    def verify_ctor_call(self, state: SymState, cls: str, addr: Term,
                         args, loc: Optional[Loc],
                         produce_tail: bool = True) -> None:
        info = self.table.cls(cls)
        pairs = self._eval_args(state, args)
        item, params = self.resolve_overload(
            [(c, c.decl.params) for c in info.ctors],
            [p[1] for p in pairs], loc, f"constructor {cls}")
        terms = self._convert_args(state, pairs, params, loc)
        env = {p.name: Binding(t, p.type) for p, t in zip(params, terms)}
        env["this"] = Binding(addr, TypeExpr(cls, 1))
        env["thisType"] = Binding(TypeInfo(cls), TYPEINFO_T)
        extra = self.engine_tail(cls, addr) if produce_tail else []
        self._apply_contract(state, item.decl.contract, env, cls, loc,
                             produce_extra=extra)

    def verify_dtor_call(self, state: SymState, cls: str, addr: Term,
                         loc: Optional[Loc]) -> None:
        info = self.table.cls(cls)
        if info.dtor is None:
            raise CheckError(Category.UNKNOWN_NAME,
                             f"class {cls} has no destructor", loc)
        env = {"this": Binding(addr, TypeExpr(cls, 1)),
               "thisType": Binding(TypeInfo(cls), TYPEINFO_T)}
        self._apply_contract(state, info.dtor.decl.contract, env, cls, loc,
                             consume_extra=self.engine_tail(cls, addr))

    def verify_member_call(self, state: SymState, target: Term,
                           tcls: str, name: str, args,
                           loc: Optional[Loc],
                           qualified: Optional[str] = None
                           ) -> Tuple[Term, TypeExpr]:
        lookup_from = qualified or tcls
        entries = self.table.lookup_methods(lookup_from, name)
        if not entries:
            raise CheckError(Category.UNKNOWN_NAME,
                             f"class {lookup_from} has no member function "
                             f"{name}", loc)
        declaring = {c for c, _ in entries}
        if len(declaring) > 1:
            raise CheckError(Category.AMBIGUOUS_OVERLOAD,
                             f"member {name} is ambiguous in "
                             f"{lookup_from}", loc)
        pairs = self._eval_args(state, args)
        (scls, m), params = self.resolve_overload(
            [((c, meth), meth.params) for c, meth in entries],
            [p[1] for p in pairs], loc, f"{lookup_from}::{name}")
        # implicit upcast of the target to the declaring class
        t = self.adjust(target, tcls, scls, loc)
        if not state.entails(ne(t, ZERO)):
            raise CheckError(Category.NULL_TARGET,
                             f"target of call to {scls}::{name} may be "
                             f"null", loc)
        if self.table.cls(scls).direct_bases:
            if find_chunk(state, f"{scls}_bases_constructed", t) is None:
                raise CheckError(Category.MISSING_CHUNK,
                                 f"no {scls}_bases_constructed chunk for "
                                 f"the call target", loc)
        dynamic = qualified is None and self.table.effective_virtual(scls, m)
        if dynamic:
            c = find_chunk(state, f"{scls}_vtype", t)
            if c is None:
                raise CheckError(Category.MISSING_CHUNK,
                                 f"no {scls}_vtype chunk for the virtual "
                                 f"call target", loc)
            this_type = c.args[1]
        else:
            this_type = TypeInfo(scls)
        terms = self._convert_args(state, pairs, params, loc)
        env = {p.name: Binding(tm, p.type) for p, tm in zip(params, terms)}
        env["this"] = Binding(t, TypeExpr(scls, 1))
        env["thisType"] = Binding(this_type, TYPEINFO_T)
        r = self.fresh("result")
        if m.ret.name != "void" or m.ret.ptr:
            env["result"] = Binding(r, m.ret)
        self._apply_contract(state, m.contract, env, scls, loc)
        return r, m.ret

    def verify_free_call(self, state: SymState, name: str, args,
                         loc: Optional[Loc]) -> Tuple[Term, TypeExpr]:
        if name not in self.table.functions:
            raise CheckError(Category.UNKNOWN_NAME,
                             f"unknown function {name}", loc)
        f = self.table.functions[name]
        pairs = self._eval_args(state, args)
        _, params = self.resolve_overload([(f, f.params)],
                                          [p[1] for p in pairs], loc, name)
        terms = self._convert_args(state, pairs, params, loc)
        env = {p.name: Binding(t, p.type) for p, t in zip(params, terms)}
        r = self.fresh("result")
        if f.ret.name != "void" or f.ret.ptr:
            env["result"] = Binding(r, f.ret)
        self._apply_contract(state, f.contract, env, None, loc)
        return r, f.ret

    def verify_new(self, state: SymState,
                   e: NewE) -> Tuple[Term, TypeExpr]:
        if not self.table.has_class(e.cls):
            raise CheckError(Category.UNKNOWN_NAME,
                             f"unknown class {e.cls}", e.loc)
        addr = self.fresh(e.cls.lower())
        state.assume(ne(addr, ZERO))
        self.verify_ctor_call(state, e.cls, addr, e.args, e.loc)
        state.add_chunk(Chunk(f"new_block_{e.cls}", ONE, (addr,)))
        self.note("produce", str(state.heap[-1]), e.loc, state)
        return addr, TypeExpr(e.cls, 1)

    def verify_delete(self, state: SymState, s: DeleteS) -> None:
        t, ty = self.eval_expr(state, s.expr)
        if ty == _NULL_T or state.entails(eq(t, ZERO)):
            return
        if not (ty.is_class_ptr and self.table.has_class(ty.name)):
            raise CheckError(Category.MALFORMED_ASSERTION,
                             f"delete of non-class-pointer type {ty}",
                             s.loc)
        cls = ty.name
        self._do_match(state, f"new_block_{cls}", None, ONE, [Fixed(t)],
                       s.loc, f"new_block_{cls}")
        self.verify_dtor_call(state, cls, t, s.loc)

    # --- expression evaluation with calls ---

    def eval_call(self, state: SymState, e: Expr) -> Tuple[Term, TypeExpr]:
        if isinstance(e, NewE):
            return self.verify_new(state, e)
        callee = e.callee
        if isinstance(callee, NameE):
            if callee.name in self.table.functions:
                return self.verify_free_call(state, callee.name, e.args,
                                             e.loc)
            if self.ctx_cls is not None and \
                    self.table.lookup_methods(self.ctx_cls, callee.name):
                b = state.lookup("this")
                return self.verify_member_call(state, b.term, self.ctx_cls,
                                               callee.name, e.args, e.loc)
            raise CheckError(Category.UNKNOWN_NAME,
                             f"unknown function {callee.name}", e.loc)
        if isinstance(callee, FieldAccessE):
            t, ty = self.eval_expr(state, callee.target)
            if callee.arrow:
                if not (ty.is_class_ptr and self.table.has_class(ty.name)):
                    raise CheckError(Category.MALFORMED_ASSERTION,
                                     f"-> call on non-class-pointer type "
                                     f"{ty}", e.loc)
            elif ty.ptr or not self.table.has_class(ty.name):
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 f". call on non-class type {ty}", e.loc)
            return self.verify_member_call(state, t, ty.name, callee.field,
                                           e.args, e.loc)
        if isinstance(callee, QualifiedE):
            b = state.lookup("this")
            if b is None or self.ctx_cls is None:
                raise CheckError(Category.MALFORMED_ASSERTION,
                                 f"{callee.cls}::{callee.name} call outside "
                                 f"a member context", e.loc)
            return self.verify_member_call(state, b.term, self.ctx_cls,
                                           callee.name, e.args, e.loc,
                                           qualified=callee.cls)
        raise CheckError(Category.MALFORMED_ASSERTION,
                         "unsupported call expression", e.loc)

    # --- statements ---

    def exec_block(self, states: List[SymState],
                   block: BlockS) -> List[SymState]:
        for s in states:
            if not (s.returned or s.inconsistent):
                s.scopes.append([])
        for stmt in block.stmts:
            nxt: List[SymState] = []
            for s in states:
                if s.returned or s.inconsistent:
                    nxt.append(s)
                else:
                    nxt.extend(self.exec_stmt(s, stmt))
            states = nxt
        for s in states:
            if s.returned or s.inconsistent or not s.scopes:
                continue
            frame = s.scopes.pop()
            for name, addr, cls in reversed(frame):
                self.verify_dtor_call(s, cls, addr, block.loc)
        return states

    def _destruct_all(self, state: SymState, loc: Optional[Loc]) -> None:
        while state.scopes:
            frame = state.scopes.pop()
            for name, addr, cls in reversed(frame):
                self.verify_dtor_call(state, cls, addr, loc)

    def exec_stmt(self, state: SymState, stmt) -> List[SymState]:
        if isinstance(stmt, BlockS):
            return self.exec_block([state], stmt)
        if isinstance(stmt, GhostS):
            return self.ghost_stmt(state, stmt, self.ctx_cls)
        if isinstance(stmt, VarDeclS):
            return self._exec_vardecl(state, stmt)
        if isinstance(stmt, AssignS):
            return self._exec_assign(state, stmt)
        if isinstance(stmt, ExprS):
            self.eval_expr(state, stmt.expr)
            return [state]
        if isinstance(stmt, ReturnS):
            if stmt.expr is not None:
                state.result, _ = self.eval_expr(state, stmt.expr)
            self._destruct_all(state, stmt.loc)
            state.returned = True
            return [state]
        if isinstance(stmt, IfS):
            return self._exec_if(state, stmt)
        if isinstance(stmt, DeleteS):
            self.verify_delete(state, stmt)
            return [state]
        raise CheckError(Category.MALFORMED_ASSERTION,
                         f"unsupported statement {stmt!r}", stmt.loc)

    def _exec_vardecl(self, state: SymState,
                      s: VarDeclS) -> List[SymState]:
        if s.ctor_args is not None:
            if not self.table.has_class(s.type.name) or s.type.ptr:
                raise CheckError(Category.UNKNOWN_NAME,
                                 f"unknown class type {s.type}", s.loc)
            addr = self.fresh(s.name)
            state.assume(ne(addr, ZERO))
            self.verify_ctor_call(state, s.type.name, addr, s.ctor_args,
                                  s.loc)
            state.bind(s.name, addr, TypeExpr(s.type.name))
            if state.scopes:
                state.scopes[-1].append((s.name, addr, s.type.name))
            return [state]
        if s.init is not None:
            t, ty = self.eval_expr(state, s.init)
            t = self._convert(state, t, ty, s.type, s.loc)
            state.bind(s.name, t, s.type)
            return [state]
        state.bind(s.name, self.fresh(s.name), s.type)
        return [state]

    def _exec_assign(self, state: SymState, s: AssignS) -> List[SymState]:
        rhs, rty = self.eval_expr(state, s.expr)
        lv = s.lvalue
        if isinstance(lv, NameE):
            b = state.lookup(lv.name)
            if b is None:
                lv = self._implicit_this_field(state, lv.name, s.loc)
                if lv is None:
                    raise CheckError(Category.UNKNOWN_NAME,
                                     f"unknown name {s.lvalue.name}", s.loc)
            else:
                state.bind(lv.name, self._convert(state, rhs, rty, b.type,
                                                  s.loc), b.type)
                return [state]
        if isinstance(lv, FieldAccessE):
            t, ty = self.eval_expr(state, lv.target)
            scls = self._target_class(lv, ty)
            try:
                found = self.table.lookup_field(scls, lv.field)
            except UpcastAmbiguous as err:
                raise CheckError(Category.AMBIGUOUS_UPCAST, str(err),
                                 s.loc) from None
            if found is None:
                raise CheckError(Category.UNKNOWN_NAME,
                                 f"class {scls} has no field {lv.field}",
                                 s.loc)
            declcls, fd = found
            addr = self.adjust(t, scls, declcls, s.loc)
            family = f"{declcls}_{fd.name}"
            # writes need the full coefficient
            from .heap import Wild
            self._do_match(state, family, None, ONE, [Fixed(addr), Wild()],
                           s.loc, family)
            val = self._convert(state, rhs, rty, fd.type, s.loc)
            state.add_chunk(Chunk(family, ONE, (addr, val)))
            self.note("produce", str(state.heap[-1]), s.loc, state)
            return [state]
        raise CheckError(Category.MALFORMED_ASSERTION,
                         "unsupported assignment target", s.loc)

    def _exec_if(self, state: SymState, s: IfS) -> List[SymState]:
        t, _ = self.eval_expr(state, s.cond)
        if state.entails(t):
            return self.exec_block([state], s.then)
        if state.entails(negate(t)):
            return self.exec_block([state], s.els) if s.els else [state]
        other = state.copy()
        state.assume(t)
        other.assume(negate(t))
        out = self.exec_block([state], s.then)
        if s.els is not None:
            out.extend(self.exec_block([other], s.els))
        else:
            out.append(other)
        return out

    # --- callee obligations ---

    def _init_state(self, params) -> SymState:
        state = SymState()
        for p in params:
            state.bind(p.name, self.fresh(p.name), p.type)
        return state

    def verify_function(self, func: FuncDecl) -> None:
        self.ctx_cls = None
        state = self._init_state(func.params)
        states = self.produce(state, func.contract.requires, None)
        states = self._run_body(states, func.body, func.loc)
        self._finish(states, func.contract.ensures, None, [], func.loc,
                     func.ret)

    def verify_method(self, cls: str, m: MethodDecl) -> None:
        self.ctx_cls = cls
        state = self._init_state(m.params)
        this = self.fresh("this")
        state.assume(ne(this, ZERO))
        state.bind("this", this, TypeExpr(cls, 1))
        state.bind("thisType", TypeInfo(cls), TYPEINFO_T)
        states = self.produce(state, m.contract.requires, cls)
        frame = self.bases_closure(cls, this)
        for s in states:
            self._produce_chunks(s, [Chunk(c.family, c.coeff, c.args,
                                           c.index) for c in frame])
        states = self._run_body(states, m.body, m.loc)
        self._finish(states, m.contract.ensures, cls, frame, m.loc, m.ret)

    def _run_body(self, states: List[SymState], body: BlockS,
                  loc: Loc) -> List[SymState]:
        return self.exec_block(states, body)

    def _finish(self, states: List[SymState], post, ctx: Optional[str],
                frame: List[Chunk], loc: Loc,
                ret: Optional[TypeExpr]) -> None:
        for s in states:
            if s.inconsistent:
                continue
            if ret is not None and (ret.name != "void" or ret.ptr):
                r = s.result if s.result is not None else self.fresh("result")
                s.bind("result", r, ret)
            for out in self.consume(s, post, ctx):
                self._consume_chunks(out, frame, loc)
                self.leak_check(out, loc, "execution path")

    def verify_constructor(self, cls: str, ctor: CtorDecl) -> None:
        self.ctx_cls = cls
        info = self.table.cls(cls)
        state = self._init_state(ctor.params)
        this = self.fresh("this")
        state.assume(ne(this, ZERO))
        state.bind("this", this, TypeExpr(cls, 1))
        state.bind("thisType", TypeInfo(cls), TYPEINFO_T)
        states = self.produce(state, ctor.contract.requires, cls)

        inits = {e.name: e for e in ctor.inits}
        for e in ctor.inits:
            if e.name != cls and e.name not in info.direct_bases and \
                    not any(f.name == e.name for f in info.fields):
                raise CheckError(Category.UNKNOWN_NAME,
                                 f"initializer {e.name} is neither a "
                                 f"direct base nor a field of {cls}", e.loc)
        delegating = len(ctor.inits) == 1 and ctor.inits[0].name == cls
        out: List[SymState] = []
        for s in states:
            if delegating:
                self.verify_ctor_call(s, cls, this, ctor.inits[0].args,
                                      ctor.inits[0].loc)
            else:
                self._construct_subobjects(s, cls, this, info, inits,
                                           ctor.loc)
            out.append(s)
        states = self._run_body(out, ctor.body, ctor.loc)
        tail = self.engine_tail(cls, this)
        self._finish_ctor(states, ctor, cls, tail)

    def _construct_subobjects(self, s: SymState, cls: str, this: Term,
                              info, inits: Dict, loc: Loc) -> None:
        # direct bases, in derivation order
        for b in info.direct_bases:
            sub = FieldPtr(this, cls, b)
            entry = inits.get(b)
            args = entry.args if entry is not None else ()
            eloc = entry.loc if entry is not None else loc
            self.verify_ctor_call(s, b, sub, args, eloc)
            if self.table.is_polymorphic(b):
                # the derived object is still under construction: the
                # base's dynamic-type chunk is revoked
                self._do_match(s, f"{b}_vtype", None, ONE,
                               [Fixed(sub), Fixed(TypeInfo(b))], eloc,
                               f"{b}_vtype")
        if self.table.is_polymorphic(cls):
            s.add_chunk(Chunk(f"{cls}_vtype", ONE, (this, TypeInfo(cls))))
            self.note("produce", str(s.heap[-1]), loc, s)
        if info.direct_bases:
            s.add_chunk(Chunk(f"{cls}_bases_constructed", ONE, (this,)))
            self.note("produce", str(s.heap[-1]), loc, s)
        # fields, in declaration order
        for f in info.fields:
            entry = inits.get(f.name)
            if f.type.is_class_value:
                sub = FieldAddr(this, cls, f.name)
                args = entry.args if entry is not None else ()
                self.verify_ctor_call(s, f.type.name, sub,
                                      args, entry.loc if entry else loc)
                continue
            if entry is not None:
                if len(entry.args) != 1:
                    raise CheckError(Category.MALFORMED_ASSERTION,
                                     f"field initializer {f.name} takes "
                                     f"one value", entry.loc)
                val, vty = self.eval_expr(s, entry.args[0])
                val = self._convert(s, val, vty, f.type, entry.loc)
            elif f.default is not None:
                val, vty = self.eval_expr(s, f.default)
                val = self._convert(s, val, vty, f.type, loc)
            else:
                val = self.fresh(f.name)
            s.add_chunk(Chunk(f"{cls}_{f.name}", ONE, (this, val)))
            self.note("produce", str(s.heap[-1]), loc, s)

    def _finish_ctor(self, states: List[SymState], ctor: CtorDecl,
                     cls: str, tail: List[Chunk]) -> None:
        for s in states:
            if s.inconsistent:
                continue
            for out in self.consume(s, ctor.contract.ensures, cls):
                self._consume_chunks(out, tail, ctor.loc)
                self.leak_check(out, ctor.loc, "constructor")

    def verify_destructor(self, cls: str, dtor: DtorDecl) -> None:
        self.ctx_cls = cls
        info = self.table.cls(cls)
        state = SymState()
        this = self.fresh("this")
        state.assume(ne(this, ZERO))
        state.bind("this", this, TypeExpr(cls, 1))
        state.bind("thisType", TypeInfo(cls), TYPEINFO_T)
        states = self.produce(state, dtor.contract.requires, cls)
        tail = self.engine_tail(cls, this)
        for s in states:
            self._produce_chunks(s, [Chunk(c.family, c.coeff, c.args,
                                           c.index) for c in tail])
        states = self._run_body(states, dtor.body, dtor.loc)
        for s in states:
            if s.inconsistent:
                continue
            self._destruct_subobjects(s, cls, this, info, dtor.loc)
            for out in self.consume(s, dtor.contract.ensures, cls):
                self.leak_check(out, dtor.loc, "destructor")

    def _destruct_subobjects(self, s: SymState, cls: str, this: Term,
                             info, loc: Loc) -> None:
        from .heap import Wild
        # fields, in reverse declaration order
        for f in reversed(info.fields):
            if f.type.is_class_value:
                self.verify_dtor_call(s, f.type.name,
                                      FieldAddr(this, cls, f.name), loc)
            else:
                self._do_match(s, f"{cls}_{f.name}", None, ONE,
                               [Fixed(this), Wild()], loc,
                               f"{cls}_{f.name}")
        if self.table.is_polymorphic(cls):
            self._do_match(s, f"{cls}_vtype", None, ONE,
                           [Fixed(this), Fixed(TypeInfo(cls))], loc,
                           f"{cls}_vtype")
        if info.direct_bases:
            self._do_match(s, f"{cls}_bases_constructed", None, ONE,
                           [Fixed(this)], loc, f"{cls}_bases_constructed")
        for b in reversed(info.direct_bases):
            sub = FieldPtr(this, cls, b)
            if self.table.is_polymorphic(b):
                # the object reverts to being a b before ~b runs
                s.add_chunk(Chunk(f"{b}_vtype", ONE, (sub, TypeInfo(b))))
                self.note("produce", str(s.heap[-1]), loc, s)
            self.verify_dtor_call(s, b, sub, loc)

    # --- behavioral subtyping ---

    def check_override(self, dcls: str, m: MethodDecl, bcls: str,
                       bm: MethodDecl) -> None:
        """An overriding contract must be weaker in its precondition and
        stronger in its postcondition than the overridden one."""
        self.ctx_cls = None
        state = SymState()
        d = self.fresh("d")
        state.assume(ne(d, ZERO))
        b_this = self.adjust(d, dcls, bcls, m.loc)
        tau = self.fresh("thisType")
        shared = [self.fresh(p.name) for p in m.params]
        r = self.fresh("result")

        def env_for(cls: str, this: Term, meth: MethodDecl) -> Dict:
            env = {"this": Binding(this, TypeExpr(cls, 1)),
                   "thisType": Binding(tau, TYPEINFO_T)}
            for p, t in zip(meth.params, shared):
                env[p.name] = Binding(t, p.type)
            if meth.ret.name != "void" or meth.ret.ptr:
                env["result"] = Binding(r, meth.ret)
            return env

        env_d = env_for(dcls, d, m)
        env_b = env_for(bcls, b_this, bm)

        def run(st: SymState, action, env, ctx, a) -> List[SymState]:
            outs = []
            saved = st.env
            st.env = env
            for out in action(st, a, ctx):
                out.env = saved
                outs.append(out)
            return outs

        try:
            states = run(state, self.produce, env_b, bcls, bm.contract.requires)
            nxt = []
            for s in states:
                nxt.extend(run(s, self.consume, env_d, dcls,
                               m.contract.requires))
            states = nxt
            nxt = []
            for s in states:
                nxt.extend(run(s, self.produce, env_d, dcls,
                               m.contract.ensures))
            states = nxt
            nxt = []
            for s in states:
                nxt.extend(run(s, self.consume, env_b, bcls,
                               bm.contract.ensures))
            states = nxt
            for s in states:
                self.leak_check(s, m.loc, "override check")
        except CheckError as err:
            if err.category in (Category.MISSING_CHUNK, Category.LEAK):
                raise CheckError(
                    Category.SUBTYPING_VIOLATION,
                    f"{dcls}::{m.name} does not refine "
                    f"{bcls}::{bm.name}: {err.message}",
                    err.loc or m.loc) from None
            raise


def _method_subject(cls: str, m: MethodDecl) -> str:
    return f"{cls}::{m.name}"


def verify_program(table: ClassTable, trace: bool = False
                   ) -> Tuple[List[Result], Optional[list]]:
    """Check every proof obligation of the resolved program. Returns the
    per-obligation results (and the trace when enabled)."""
    ex = Executor(table, trace)
    results: List[Result] = []

    for diag in table.check_override_completeness():
        results.append(Result(f"override completeness", diag.loc, diag))

    for dcls, m, bcls, bm in table.override_pairs():
        subject = f"{_method_subject(dcls, m)} overrides " \
                  f"{_method_subject(bcls, bm)}"
        try:
            ex.check_override(dcls, m, bcls, bm)
            results.append(Result(subject, m.loc))
        except CheckError as err:
            results.append(Result(subject, m.loc, err.diagnostic(m.loc)))

    def attempt(subject: str, loc: Loc, thunk) -> None:
        try:
            thunk()
            results.append(Result(subject, loc))
        except CheckError as err:
            results.append(Result(subject, loc, err.diagnostic(loc)))

    for name, func in table.functions.items():
        attempt(name, func.loc, lambda f=func: ex.verify_function(f))

    for cname, info in table.classes.items():
        for c in info.ctors:
            loc = c.decl.loc or info.loc
            attempt(f"{cname}::{cname}", loc,
                    lambda cn=cname, d=c.decl: ex.verify_constructor(cn, d))
        if info.dtor is not None:
            loc = info.dtor.decl.loc or info.loc
            attempt(f"{cname}::~{cname}", loc,
                    lambda cn=cname, d=info.dtor.decl:
                    ex.verify_destructor(cn, d))
        for m in info.methods:
            if m.body is None:
                continue
            attempt(_method_subject(cname, m), m.loc,
                    lambda cn=cname, mm=m: ex.verify_method(cn, mm))

    results.sort(key=lambda r: (r.loc.path, r.loc.line, r.loc.col))
    return results, ex.trace
