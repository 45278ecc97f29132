"""Chunk heap and matching unit tests."""

from __future__ import annotations

from fractions import Fraction

import pytest

from minicpp.heap import (
    Bind, Chunk, Fixed, FracLit, SymState, Wild, find_chunk, match_chunk,
    total_coefficients,
)
from minicpp.terms import IntLit, Sym, eq

a, v = Sym(1, "a"), Sym(2, "v")
HALF = Fraction(1, 2)
ONE = Fraction(1)


def fresh_state() -> SymState:
    s = SymState()
    s.add_chunk(Chunk("C_x", ONE, (a, v)))
    return s


def test_exact_match_removes_chunk():
    s = fresh_state()
    m = match_chunk(s, "C_x", None, ONE, [Fixed(a), Fixed(v)])
    assert m is not None and m.taken == ONE
    assert s.heap == []


def test_fraction_split_leaves_remainder():
    s = fresh_state()
    m = match_chunk(s, "C_x", None, HALF, [Fixed(a), Wild()])
    assert m.taken == HALF
    assert len(s.heap) == 1 and s.heap[0].coeff == HALF


def test_bind_takes_all_and_binds():
    s = fresh_state()
    s.heap[0] = Chunk("C_x", HALF, (a, v))
    m = match_chunk(s, "C_x", None, Bind("f"), [Fixed(a), Bind("w")])
    assert m.taken == HALF
    assert m.bindings["f"].term == FracLit(HALF)
    assert m.bindings["w"].term == v
    assert s.heap == []


def test_requesting_more_than_available_fails():
    s = fresh_state()
    s.heap[0] = Chunk("C_x", HALF, (a, v))
    assert match_chunk(s, "C_x", None, ONE, [Fixed(a), Wild()]) is None


def test_first_match_in_insertion_order():
    s = SymState()
    v2 = Sym(3, "v2")
    s.add_chunk(Chunk("C_x", ONE, (a, v)))
    s.add_chunk(Chunk("C_x", ONE, (a, v2)))
    m = match_chunk(s, "C_x", None, ONE, [Fixed(a), Bind("w")])
    assert m.bindings["w"].term == v  # the first one wins
    assert s.heap[0].args[1] == v2


def test_fixed_args_use_provable_equality():
    s = SymState()
    b = Sym(4, "b")
    s.assume(eq(a, b))
    s.add_chunk(Chunk("C_x", ONE, (a, v)))
    m = match_chunk(s, "C_x", None, ONE, [Fixed(b), Wild()])
    assert m is not None


def test_index_matching():
    s = SymState()
    s.add_chunk(Chunk("A#valid", ONE, (a,), IntLit(7)))
    assert match_chunk(s, "A#valid", Fixed(IntLit(8)), ONE,
                       [Fixed(a)]) is None
    m = match_chunk(s, "A#valid", Fixed(IntLit(7)), ONE, [Fixed(a)])
    assert m is not None


def test_find_chunk_peeks_without_removing():
    s = fresh_state()
    c = find_chunk(s, "C_x", a)
    assert c is not None and len(s.heap) == 1


def test_coefficient_bounds_enforced():
    s = SymState()
    with pytest.raises(ValueError):
        s.add_chunk(Chunk("C_x", Fraction(3, 2), (a, v)))
    with pytest.raises(ValueError):
        s.add_chunk(Chunk("C_x", Fraction(0), (a, v)))


def test_total_coefficients():
    s = SymState()
    s.add_chunk(Chunk("C_x", HALF, (a, v)))
    s.add_chunk(Chunk("C_x", Fraction(1, 4), (a, v)))
    totals = total_coefficients(s)
    assert totals[("C_x", None, (a, v))] == Fraction(3, 4)
