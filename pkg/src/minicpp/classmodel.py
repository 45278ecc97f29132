"""Resolved class table: derivation graph, upcast paths, overriders,
polymorphism flags and the static well-formedness checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .diagnostics import Category, Diagnostic, Loc
from .syntax import (
    BlockS, BoolLitE, ChunkA, ClassDecl, Contract, CtorDecl, DtorDecl,
    FieldDecl, FuncDecl, MethodDecl, PatternE, PredicateDecl, Program,
    PureA, SepA, ThisE, TypeExpr, PRIMITIVES,
)

Signature = Tuple[str, Tuple[Tuple[str, int, bool], ...]]


def signature(name: str, params) -> Signature:
    return (name, tuple((p.type.name, p.type.ptr, p.type.ref)
                        for p in params))


class ResolveError(Exception):
    def __init__(self, diagnostics: List[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class UpcastNotABase(Exception):
    pass


class UpcastAmbiguous(Exception):
    pass


@dataclass
class CtorInfo:
    decl: CtorDecl
    implicit: bool = False


@dataclass
class DtorInfo:
    decl: DtorDecl
    implicit: bool = False


@dataclass
class ClassInfo:
    name: str
    decl: ClassDecl
    direct_bases: List[str]
    fields: List[FieldDecl]
    ctors: List[CtorInfo]
    dtor: Optional[DtorInfo]
    methods: List[MethodDecl]
    predicates: List[PredicateDecl]
    polymorphic: bool = False

    @property
    def loc(self) -> Loc:
        return self.decl.loc


class ClassTable:
    def __init__(self) -> None:
        self.classes: Dict[str, ClassInfo] = {}
        self.predicates: Dict[str, PredicateDecl] = {}
        self.functions: Dict[str, FuncDecl] = {}
        self.programs: List[Program] = []

    # --- basic queries ---

    def cls(self, name: str) -> ClassInfo:
        return self.classes[name]

    def has_class(self, name: str) -> bool:
        return name in self.classes

    def is_polymorphic(self, name: str) -> bool:
        return self.classes[name].polymorphic

    def ancestors(self, name: str) -> List[str]:
        """All proper ancestors, BFS over derivation order, deduplicated."""
        out: List[str] = []
        queue = list(self.classes[name].direct_bases)
        while queue:
            b = queue.pop(0)
            if b not in out:
                out.append(b)
                queue.extend(self.classes[b].direct_bases)
        return out

    def derives_from(self, derived: str, base: str) -> bool:
        return base in self.ancestors(derived)

    # --- upcast paths ---

    def count_paths(self, derived: str, base: str) -> int:
        if derived == base:
            return 1
        memo: Dict[str, int] = {}

        def n(c: str) -> int:
            if c == base:
                return 1
            if c in memo:
                return memo[c]
            memo[c] = sum(n(b) for b in self.classes[c].direct_bases)
            return memo[c]

        return n(derived)

    def upcast_path(self, derived: str, base: str) -> List[Tuple[str, str]]:
        """The unique hop sequence from derived to base.

        Raises UpcastNotABase when no derivation path exists and
        UpcastAmbiguous when more than one does.
        """
        total = self.count_paths(derived, base)
        if total == 0:
            raise UpcastNotABase(f"{base} is not a base of {derived}")
        if total > 1:
            raise UpcastAmbiguous(
                f"upcast from {derived} to {base} is ambiguous "
                f"({total} derivation paths)")
        hops: List[Tuple[str, str]] = []
        cur = derived
        while cur != base:
            nxt = [b for b in self.classes[cur].direct_bases
                   if self.count_paths(b, base) == 1]
            hops.append((cur, nxt[0]))
            cur = nxt[0]
        return hops

    # --- members ---

    def lookup_methods(self, cls: str, name: str) \
            -> List[Tuple[str, MethodDecl]]:
        """Visible overload set of `name` from class `cls`: declarations in
        cls hide inherited ones; otherwise results are merged from all
        direct bases (deduplicated per declaring class)."""
        info = self.classes[cls]
        own = [(cls, m) for m in info.methods if m.name == name]
        if own:
            return own
        merged: List[Tuple[str, MethodDecl]] = []
        for b in info.direct_bases:
            for entry in self.lookup_methods(b, name):
                if entry not in merged:
                    merged.append(entry)
        return merged

    def lookup_field(self, cls: str, fname: str) \
            -> Optional[Tuple[str, FieldDecl]]:
        """Declaring class of field `fname` as seen from `cls`; None if
        absent, UpcastAmbiguous if distinct declaring classes collide."""
        info = self.classes[cls]
        for f in info.fields:
            if f.name == fname:
                return (cls, f)
        found: List[Tuple[str, FieldDecl]] = []
        for b in info.direct_bases:
            got = self.lookup_field(b, fname)
            if got is not None and got not in found:
                found.append(got)
        if not found:
            return None
        if len(found) > 1:
            raise UpcastAmbiguous(
                f"field {fname} is ambiguous from {cls}: declared in "
                + " and ".join(sorted(c for c, _ in found)))
        return found[0]

    def effective_virtual(self, cls: str, m: MethodDecl) -> bool:
        if m.virtual:
            return True
        sig = signature(m.name, m.params)
        for a in self.ancestors(cls):
            for bm in self.classes[a].methods:
                if bm.virtual and signature(bm.name, bm.params) == sig:
                    return True
        return False

    def virtual_signatures(self, cls: str) -> List[Signature]:
        """All effectively-virtual member function signatures visible in
        the hierarchy of cls (including cls itself)."""
        sigs: List[Signature] = []
        for c in [cls] + self.ancestors(cls):
            for m in self.classes[c].methods:
                s = signature(m.name, m.params)
                if self.effective_virtual(c, m) and s not in sigs:
                    sigs.append(s)
        return sigs

    def final_overrider(self, cls: str, name: str,
                        param_types) -> Tuple[str, MethodDecl]:
        """Most-derived declaration of the signature at or above cls."""
        sig = (name, tuple(param_types))
        cands: List[Tuple[str, MethodDecl]] = []
        for c in [cls] + self.ancestors(cls):
            for m in self.classes[c].methods:
                if signature(m.name, m.params) == sig:
                    cands.append((c, m))
        if not cands:
            raise KeyError(f"no member {name} with that signature in the "
                           f"hierarchy of {cls}")
        most = [e for e in cands
                if not any(o != e and e[0] in self.ancestors(o[0])
                           for o in cands)]
        if len(most) != 1:
            raise UpcastAmbiguous(
                f"final overrider of {name} ambiguous from {cls}")
        return most[0]

    def override_pairs(self):
        """(derived class, method, base class, overridden method) for every
        override of a virtual member function."""
        pairs = []
        for cname, info in self.classes.items():
            for m in info.methods:
                sig = signature(m.name, m.params)
                for a in self.ancestors(cname):
                    for bm in self.classes[a].methods:
                        if signature(bm.name, bm.params) == sig and \
                                self.effective_virtual(a, bm):
                            pairs.append((cname, m, a, bm))
        return pairs

    def check_override_completeness(self) -> List[Diagnostic]:
        """A derived class must override every virtual member function of
        each of its polymorphic direct bases."""
        out: List[Diagnostic] = []
        for cname, info in self.classes.items():
            declared = {signature(m.name, m.params) for m in info.methods}
            for b in info.direct_bases:
                if not self.classes[b].polymorphic:
                    continue
                for sig in self.virtual_signatures(b):
                    if sig not in declared:
                        out.append(Diagnostic(
                            Category.OVERRIDE_INCOMPLETE,
                            f"class {cname} does not override virtual "
                            f"member function {sig[0]} of polymorphic "
                            f"base {b}",
                            info.loc))
        return out

    # --- vtype predicates ---

    def poly_direct_bases(self, cls: str) -> List[str]:
        return [b for b in self.classes[cls].direct_bases
                if self.classes[b].polymorphic]

    def vtype_definition(self, cls: str) -> Optional[List[str]]:
        """Polymorphic direct bases whose vtype chunks form the body, or
        None when the predicate is opaque."""
        if not self.classes[cls].polymorphic:
            raise ValueError(f"{cls} is not polymorphic")
        bases = self.poly_direct_bases(cls)
        return bases if bases else None

    # --- instance predicates ---

    def predicate_def(self, cls: str, name: str) -> Optional[PredicateDecl]:
        for p in self.classes[cls].predicates:
            if p.name == name:
                return p
        return None

    def instpred_root(self, cls: str, name: str) -> Optional[str]:
        """Base-most class declaring the instance predicate, as seen from
        cls; None if undeclared, UpcastAmbiguous if several roots."""
        declaring = [c for c in [cls] + self.ancestors(cls)
                     if self.predicate_def(c, name) is not None]
        if not declaring:
            return None
        roots = [c for c in declaring
                 if not any(o != c and o in self.ancestors(c)
                            for o in declaring)]
        if len(roots) != 1:
            raise UpcastAmbiguous(
                f"instance predicate {name} has multiple unrelated "
                f"declarations visible from {cls}")
        return roots[0]


def _implicit_special_members(info: ClassInfo) -> None:
    """Synthesize the trivial implicit constructor/destructor: only for
    classes with no bases, no virtual functions and only primitive fields.
    The contracts produce/consume all field chunks."""
    if info.direct_bases or info.polymorphic:
        return
    if any(f.type.name not in PRIMITIVES or f.type.ptr or f.type.ref
           for f in info.fields):
        return

    def chunk(f: FieldDecl, value) -> ChunkA:
        return ChunkA(f"{info.name}_{f.name}", (ThisE(info.decl.loc), value),
                      None, info.decl.loc)

    def sep(parts):
        if not parts:
            return PureA(BoolLitE(True, info.decl.loc), info.decl.loc)
        a = parts[0]
        for p in parts[1:]:
            a = SepA(a, p, info.decl.loc)
        return a

    true_a = PureA(BoolLitE(True, info.decl.loc), info.decl.loc)
    if not info.ctors:
        post = sep([chunk(f, f.default if f.default is not None
                          else PatternE(None, info.decl.loc))
                    for f in info.fields])
        ctor = CtorDecl(info.name, (), (), Contract(true_a, post,
                                                    info.decl.loc),
                        BlockS((), info.decl.loc), info.decl.loc)
        info.ctors.append(CtorInfo(ctor, implicit=True))
    if info.dtor is None:
        pre = sep([chunk(f, PatternE(None, info.decl.loc))
                   for f in info.fields])
        dtor = DtorDecl(info.name, Contract(pre, true_a, info.decl.loc),
                        BlockS((), info.decl.loc), info.decl.loc)
        info.dtor = DtorInfo(dtor, implicit=True)


def build_class_table(*programs: Program) -> ClassTable:
    """Resolve parsed programs into a ClassTable; raises ResolveError."""
    table = ClassTable()
    diags: List[Diagnostic] = []
    for prog in programs:
        table.programs.append(prog)
        for d in prog.decls:
            if isinstance(d, ClassDecl):
                if d.name in table.classes:
                    diags.append(Diagnostic(
                        Category.DUPLICATE_MEMBER,
                        f"duplicate class {d.name}", d.loc))
                    continue
                table.classes[d.name] = ClassInfo(
                    d.name, d, list(d.bases), list(d.fields),
                    [CtorInfo(c) for c in d.ctors],
                    DtorInfo(d.dtor) if d.dtor else None,
                    list(d.methods), list(d.predicates))
            elif isinstance(d, FuncDecl):
                if d.name in table.functions:
                    diags.append(Diagnostic(
                        Category.DUPLICATE_MEMBER,
                        f"duplicate function {d.name}", d.loc))
                else:
                    table.functions[d.name] = d
            elif isinstance(d, PredicateDecl):
                if d.name in table.predicates:
                    diags.append(Diagnostic(
                        Category.DUPLICATE_MEMBER,
                        f"duplicate predicate {d.name}", d.loc))
                else:
                    table.predicates[d.name] = d

    # base resolution and cycle detection
    for info in table.classes.values():
        for b in info.direct_bases:
            if b not in table.classes:
                diags.append(Diagnostic(Category.UNKNOWN_NAME,
                                        f"unknown base class {b} of "
                                        f"{info.name}", info.loc))
        info.direct_bases = [b for b in info.direct_bases
                             if b in table.classes]
    state: Dict[str, int] = {}

    def visit(c: str) -> bool:
        if state.get(c) == 1:
            return False
        if state.get(c) == 2:
            return True
        state[c] = 1
        ok = all(visit(b) for b in table.classes[c].direct_bases)
        state[c] = 2
        return ok

    for cname in table.classes:
        if not visit(cname):
            diags.append(Diagnostic(Category.CYCLIC_INHERITANCE,
                                    f"cyclic inheritance involving {cname}",
                                    table.classes[cname].loc))
            raise ResolveError(diags)

    # duplicate members
    for info in table.classes.values():
        seen_fields = set()
        for f in info.fields:
            if f.name in seen_fields:
                diags.append(Diagnostic(Category.DUPLICATE_MEMBER,
                                        f"duplicate field {f.name} in "
                                        f"{info.name}", f.loc))
            seen_fields.add(f.name)
        seen_sigs = set()
        for m in info.methods:
            s = signature(m.name, m.params)
            if s in seen_sigs:
                diags.append(Diagnostic(Category.DUPLICATE_MEMBER,
                                        f"duplicate member function "
                                        f"{m.name} in {info.name}", m.loc))
            seen_sigs.add(s)
        seen_ctor = set()
        for c in info.ctors:
            s = signature(info.name, c.decl.params)
            if s in seen_ctor:
                diags.append(Diagnostic(Category.DUPLICATE_MEMBER,
                                        f"duplicate constructor in "
                                        f"{info.name}", c.decl.loc))
            seen_ctor.add(s)
        seen_preds = set()
        for p in info.predicates:
            if p.name in seen_preds:
                diags.append(Diagnostic(Category.DUPLICATE_MEMBER,
                                        f"duplicate instance predicate "
                                        f"{p.name} in {info.name}", p.loc))
            seen_preds.add(p.name)
        for f in info.fields:
            if f.type.name not in PRIMITIVES and \
                    not f.type.ptr and not f.type.ref and \
                    f.type.name not in table.classes:
                diags.append(Diagnostic(Category.UNKNOWN_NAME,
                                        f"unknown field type {f.type} in "
                                        f"{info.name}", f.loc))

    if diags:
        raise ResolveError(diags)

    # polymorphism: least fixed point over the acyclic derivation graph
    memo: Dict[str, bool] = {}

    def poly(c: str) -> bool:
        if c in memo:
            return memo[c]
        info = table.classes[c]
        memo[c] = any(m.virtual for m in info.methods) or \
            (info.dtor is not None and info.dtor.decl.virtual) or \
            any(poly(b) for b in info.direct_bases)
        return memo[c]

    for cname, info in table.classes.items():
        info.polymorphic = poly(cname)

    for info in table.classes.values():
        _implicit_special_members(info)
    return table
