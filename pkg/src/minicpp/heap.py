"""The symbolic machine state: chunk heap, path condition, environment."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import entail
from .syntax import TypeExpr
from .terms import Term, fmt

ONE = Fraction(1)


@dataclass(frozen=True)
class Chunk:
    family: str
    coeff: Fraction
    args: Tuple[Term, ...]
    index: Optional[Term] = None

    def __str__(self) -> str:
        coeff = "" if self.coeff == 1 else f"[{self.coeff}]"
        idx = f"<{fmt(self.index)}>" if self.index is not None else ""
        args = ", ".join(fmt(a) for a in self.args)
        return f"{coeff}{self.family}{idx}({args})"


# argument patterns for matching
@dataclass(frozen=True)
class Fixed:
    term: Term


@dataclass(frozen=True)
class Bind:
    name: str
    type: Optional[TypeExpr] = None


@dataclass(frozen=True)
class Wild:
    pass


# coefficient patterns: Fraction (exact), Bind (take all, bind) or Wild
@dataclass(frozen=True)
class Binding:
    term: Term
    type: Optional[TypeExpr] = None


@dataclass
class SymState:
    path: List[Term] = field(default_factory=list)
    heap: List[Chunk] = field(default_factory=list)
    env: Dict[str, Binding] = field(default_factory=dict)
    inconsistent: bool = False
    returned: bool = False
    result: Optional[Term] = None
    # lexical scopes of live stack objects: frames of (name, addr, class)
    scopes: List[list] = field(default_factory=list)

    def copy(self) -> "SymState":
        s = SymState(list(self.path), list(self.heap), dict(self.env),
                     self.inconsistent, self.returned, self.result,
                     [list(fr) for fr in self.scopes])
        s._closure = self._closure
        return s

    _closure: Optional[entail.Closure] = None

    def _get_closure(self) -> entail.Closure:
        if self._closure is None:
            self._closure = entail.Closure(self.path)
        return self._closure

    def assume(self, f: Term) -> None:
        self.path.append(f)
        self._closure = None
        if not self.inconsistent and not entail.consistent(self.path):
            self.inconsistent = True

    def entails(self, f: Term) -> bool:
        if self.inconsistent:
            return True
        return self._get_closure().valid(f)

    def add_chunk(self, c: Chunk) -> None:
        if not 0 < c.coeff <= 1:
            raise ValueError(f"coefficient {c.coeff} outside (0, 1]")
        self.heap.append(c)

    def bind(self, name: str, term: Term,
             type: Optional[TypeExpr] = None) -> None:
        self.env[name] = Binding(term, type)

    def lookup(self, name: str) -> Optional[Binding]:
        return self.env.get(name)

    def heap_str(self) -> str:
        return ", ".join(str(c) for c in self.heap) or "emp"


@dataclass
class Match:
    chunk: Chunk
    bindings: Dict[str, Binding]
    taken: Fraction


def _args_match(state: SymState, pats, args) -> bool:
    for pat, arg in zip(pats, args):
        if isinstance(pat, Fixed):
            if not state.entails(_eq(pat.term, arg)):
                return False
    return True


def _eq(a: Term, b: Term) -> Term:
    from .terms import eq
    return eq(a, b)


def _collect_bindings(pats, args) -> Dict[str, Binding]:
    out: Dict[str, Binding] = {}
    for pat, arg in zip(pats, args):
        if isinstance(pat, Bind):
            out[pat.name] = Binding(arg, pat.type)
    return out


def match_chunk(state: SymState, family: str, index_pat, coeff_pat,
                arg_pats) -> Optional[Match]:
    """Find and remove (or split) the first matching chunk.

    Scans the heap in insertion order; fixed arguments must be provably
    equal, an exact coefficient request splits the chunk leaving the
    remainder, `_`/binder coefficients take the whole chunk. First match
    wins; there is no backtracking across the chunk choice.
    """
    for i, c in enumerate(state.heap):
        if c.family != family:
            continue
        if len(c.args) != len(arg_pats):
            continue
        if isinstance(index_pat, Fixed):
            if c.index is None or \
                    not state.entails(_eq(index_pat.term, c.index)):
                continue
        if not _args_match(state, arg_pats, c.args):
            continue
        if isinstance(coeff_pat, Fraction):
            if coeff_pat > c.coeff:
                continue
            taken = coeff_pat
        else:
            taken = c.coeff
        bindings = _collect_bindings(arg_pats, c.args)
        if isinstance(index_pat, Bind):
            bindings[index_pat.name] = Binding(c.index, index_pat.type)
        if isinstance(coeff_pat, Bind):
            bindings[coeff_pat.name] = Binding(FracLit(taken), None)
        del state.heap[i]
        if taken < c.coeff:
            state.heap.insert(i, Chunk(c.family, c.coeff - taken, c.args,
                                       c.index))
        return Match(c, bindings, taken)
    return None


@dataclass(frozen=True)
class FracLit:
    """Coefficient value captured by a `[?f]` pattern."""
    value: Fraction


def find_chunk(state: SymState, family: str, arg0: Term,
               index_pat=None) -> Optional[Chunk]:
    """Peek: locate a chunk (any fraction) whose first argument is provably
    the given term, without removing it."""
    for c in state.heap:
        if c.family != family or not c.args:
            continue
        if not state.entails(_eq(arg0, c.args[0])):
            continue
        if isinstance(index_pat, Fixed) and (
                c.index is None or
                not state.entails(_eq(index_pat.term, c.index))):
            continue
        return c
    return None


def total_coefficients(state: SymState):
    """Total coefficient per (family, index, args) equivalence class,
    using syntactic term identity. Used by accounting checks."""
    totals: Dict[tuple, Fraction] = {}
    for c in state.heap:
        key = (c.family, c.index, c.args)
        totals[key] = totals.get(key, Fraction(0)) + c.coeff
    return totals
