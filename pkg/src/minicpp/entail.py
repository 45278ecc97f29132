"""Path-condition reasoning: congruence closure over symbolic terms plus
literal-level arithmetic. Sound and incomplete; Unknown (False) is always
a safe answer.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Set, Tuple

from .terms import (
    ARITH_OPS, App, BoolLit, FieldAddr, FieldPtr, IntLit, Sym, Term,
    TypeInfo, ZERO, children, subterms,
)

_VALUE_KINDS = (IntLit, BoolLit, TypeInfo)


def _is_value(t: Term) -> bool:
    return isinstance(t, _VALUE_KINDS)


class Closure:
    """Decision structure for one path condition."""

    def __init__(self, formulas: Iterable[Term]):
        self.parent: Dict[Term, Term] = {}
        self.terms: Set[Term] = set()
        self.diseqs: List[Tuple[Term, Term]] = []
        self.lts: List[Tuple[Term, Term]] = []
        self.les: List[Tuple[Term, Term]] = []
        self.atoms: List[Term] = []
        self.neg_atoms: List[Term] = []
        self.contradiction = False
        for f in formulas:
            self._assume(f)
        self._close()

    # --- union-find ---

    def find(self, t: Term) -> Term:
        path = []
        while t in self.parent and self.parent[t] != t:
            path.append(t)
            t = self.parent[t]
        for p in path:
            self.parent[p] = t
        return t

    def _union(self, a: Term, b: Term) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if _is_value(ra) and _is_value(rb):
            self.contradiction = True  # two distinct interpreted constants
        # keep interpreted constants as class representatives
        if _is_value(ra):
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True

    # --- assuming formulas ---

    def _register(self, t: Term) -> None:
        for s in subterms(t):
            self.terms.add(s)

    def _assume(self, f: Term) -> None:
        if isinstance(f, BoolLit):
            if not f.value:
                self.contradiction = True
            return
        if isinstance(f, App):
            if f.op == "&&":
                self._assume(f.args[0])
                self._assume(f.args[1])
                return
            if f.op == "==":
                self._register(f)
                self._union(f.args[0], f.args[1])
                return
            if f.op == "!=":
                self._register(f)
                self.diseqs.append((f.args[0], f.args[1]))
                return
            if f.op == "<":
                self._register(f)
                self.lts.append((f.args[0], f.args[1]))
                return
            if f.op == "<=":
                self._register(f)
                self.les.append((f.args[0], f.args[1]))
                return
            if f.op == "!":
                self._assume_neg(f.args[0])
                return
        self._register(f)
        self.atoms.append(f)

    def _assume_neg(self, g: Term) -> None:
        if isinstance(g, BoolLit):
            if g.value:
                self.contradiction = True
            return
        if isinstance(g, App):
            if g.op == "==":
                self._register(g)
                self.diseqs.append((g.args[0], g.args[1]))
                return
            if g.op == "!=":
                self._register(g)
                self._union(g.args[0], g.args[1])
                return
            if g.op == "<":
                self._register(g)
                self.les.append((g.args[1], g.args[0]))
                return
            if g.op == "<=":
                self._register(g)
                self.lts.append((g.args[1], g.args[0]))
                return
            if g.op == "!":
                self._assume(g.args[0])
                return
            if g.op == "||":
                self._assume_neg(g.args[0])
                self._assume_neg(g.args[1])
                return
        self._register(g)
        self.neg_atoms.append(g)

    # --- closure ---

    def _close(self) -> None:
        changed = True
        while changed:
            changed = False
            # congruence
            sigs: Dict[tuple, Term] = {}
            for t in list(self.terms):
                kids = children(t)
                if not kids:
                    continue
                if isinstance(t, App):
                    key = ("app", t.op) + tuple(self.find(c) for c in kids)
                elif isinstance(t, FieldPtr):
                    key = ("fptr", t.derived, t.cls, self.find(t.base))
                else:
                    key = ("faddr", t.cls, t.field, self.find(t.obj))
                other = sigs.get(key)
                if other is None:
                    sigs[key] = t
                elif self._union(other, t):
                    changed = True
            # constructor injectivity (downward closure)
            by_rep: Dict[Term, List[Term]] = {}
            for t in self.terms:
                if isinstance(t, (FieldPtr, FieldAddr)):
                    by_rep.setdefault(self.find(t), []).append(t)
            for group in by_rep.values():
                for i, t in enumerate(group):
                    for u in group[i + 1:]:
                        if isinstance(t, FieldPtr) and isinstance(u, FieldPtr) \
                                and (t.derived, t.cls) == (u.derived, u.cls):
                            if self._union(t.base, u.base):
                                changed = True
                        if isinstance(t, FieldAddr) and \
                                isinstance(u, FieldAddr) and \
                                (t.cls, t.field) == (u.cls, u.field):
                            if self._union(t.obj, u.obj):
                                changed = True
            # literal arithmetic folding
            for t in list(self.terms):
                if isinstance(t, App) and t.op in ARITH_OPS:
                    vals = []
                    for c in t.args:
                        r = self.find(c)
                        if not isinstance(r, IntLit):
                            break
                        vals.append(r.value)
                    else:
                        v = self._fold(t.op, vals)
                        lit = IntLit(v)
                        self.terms.add(lit)
                        if self._union(t, lit):
                            changed = True
        self._check_consistency()

    @staticmethod
    def _fold(op: str, vals: List[int]) -> int:
        if op == "+":
            return vals[0] + vals[1]
        if op == "-":
            return vals[0] - vals[1]
        if op == "*":
            return vals[0] * vals[1]
        return -vals[0]  # neg

    def _check_consistency(self) -> None:
        if self.contradiction:
            return
        for a, b in self.diseqs:
            if self.find(a) == self.find(b):
                self.contradiction = True
                return
        for a, b in self.lts:
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                self.contradiction = True
                return
            if isinstance(ra, IntLit) and isinstance(rb, IntLit) and \
                    not ra.value < rb.value:
                self.contradiction = True
                return
        for a, b in self.les:
            ra, rb = self.find(a), self.find(b)
            if isinstance(ra, IntLit) and isinstance(rb, IntLit) and \
                    not ra.value <= rb.value:
                self.contradiction = True
                return
        neg_reps = {self.find(g) for g in self.neg_atoms}
        for f in self.atoms:
            r = self.find(f)
            if r == BoolLit(False) or r in neg_reps:
                self.contradiction = True
                return
        for g in self.neg_atoms:
            if self.find(g) == BoolLit(True):
                self.contradiction = True
                return

    # --- queries ---

    def _prepare(self, *ts: Term) -> None:
        grew = False
        for t in ts:
            if t not in self.terms:
                self._register(t)
                grew = True
        if grew:
            self._close()

    def valid(self, f: Term) -> bool:
        """True only if f holds in every model of the path condition."""
        if self.contradiction:
            return True
        if isinstance(f, BoolLit):
            return f.value
        if isinstance(f, App):
            if f.op == "&&":
                return self.valid(f.args[0]) and self.valid(f.args[1])
            if f.op == "||":
                return self.valid(f.args[0]) or self.valid(f.args[1])
            if f.op == "!":
                return self._valid_neg(f.args[0])
            if f.op == "==":
                return self.prove_eq(f.args[0], f.args[1])
            if f.op == "!=":
                return self.prove_ne(f.args[0], f.args[1])
            if f.op == "<":
                return self.prove_lt(f.args[0], f.args[1])
            if f.op == "<=":
                return self.prove_le(f.args[0], f.args[1])
        self._prepare(f)
        r = self.find(f)
        if r == BoolLit(True):
            return True
        return any(self.find(a) == r for a in self.atoms)

    def _valid_neg(self, g: Term) -> bool:
        if self.contradiction:
            return True
        if isinstance(g, BoolLit):
            return not g.value
        if isinstance(g, App):
            if g.op == "==":
                return self.prove_ne(g.args[0], g.args[1])
            if g.op == "!=":
                return self.prove_eq(g.args[0], g.args[1])
            if g.op == "<":
                return self.prove_le(g.args[1], g.args[0])
            if g.op == "<=":
                return self.prove_lt(g.args[1], g.args[0])
            if g.op == "!":
                return self.valid(g.args[0])
            if g.op == "&&":
                return self._valid_neg(g.args[0]) or self._valid_neg(g.args[1])
            if g.op == "||":
                return self._valid_neg(g.args[0]) and \
                    self._valid_neg(g.args[1])
        self._prepare(g)
        r = self.find(g)
        if r == BoolLit(False):
            return True
        return any(self.find(a) == r for a in self.neg_atoms)

    def prove_eq(self, a: Term, b: Term) -> bool:
        if self.contradiction:
            return True
        self._prepare(a, b)
        return self.find(a) == self.find(b)

    def prove_ne(self, a: Term, b: Term, _depth: int = 0) -> bool:
        if self.contradiction:
            return True
        self._prepare(a, b)
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if _is_value(ra) and _is_value(rb):
            return True
        for u, v in self.diseqs:
            if {self.find(u), self.find(v)} == {ra, rb}:
                return True
        for u, v in self.lts:
            if {self.find(u), self.find(v)} == {ra, rb}:
                return True
        if _depth < 8:
            if rb == ZERO and self._nonnull(ra, _depth):
                return True
            if ra == ZERO and self._nonnull(rb, _depth):
                return True
        return False

    def _nonnull(self, rep: Term, depth: int) -> bool:
        # a subobject or member address of a non-null object is non-null
        for t in list(self.terms):
            if self.find(t) != rep:
                continue
            if isinstance(t, FieldPtr) and \
                    self.prove_ne(t.base, ZERO, depth + 1):
                return True
            if isinstance(t, FieldAddr) and \
                    self.prove_ne(t.obj, ZERO, depth + 1):
                return True
        return False

    def prove_lt(self, a: Term, b: Term) -> bool:
        if self.contradiction:
            return True
        self._prepare(a, b)
        ra, rb = self.find(a), self.find(b)
        if isinstance(ra, IntLit) and isinstance(rb, IntLit):
            return ra.value < rb.value
        return any((self.find(u), self.find(v)) == (ra, rb)
                   for u, v in self.lts)

    def prove_le(self, a: Term, b: Term) -> bool:
        if self.contradiction:
            return True
        self._prepare(a, b)
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return True
        if isinstance(ra, IntLit) and isinstance(rb, IntLit):
            return ra.value <= rb.value
        return any((self.find(u), self.find(v)) == (ra, rb)
                   for u, v in self.lts + self.les)


def entails(path: Iterable[Term], f: Term) -> bool:
    return Closure(path).valid(f)


def consistent(path: Iterable[Term]) -> bool:
    return not Closure(path).contradiction
