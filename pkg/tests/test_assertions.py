"""Produce/consume and open/close semantics."""

from __future__ import annotations

from fractions import Fraction

import pytest

from minicpp import build_class_table, parse_program
from minicpp.assertions import SymbolicChecker
from minicpp.diagnostics import CheckError
from minicpp.heap import Binding, SymState
from minicpp.parser import parse_assertion
from minicpp.syntax import GhostS, TypeExpr, TYPEINFO_T
from minicpp.terms import IntLit, Sym, TypeInfo, ZERO, ne

SRC = """
class K {
 public:
  int x;
  int y;
};
class P {
 public:
  /*@ predicate valid() = P_n(this, _); @*/
  int n;
  P()
  //@ requires true;
  //@ ensures valid();
  {
    //@ close valid();
  }
  virtual int f()
  //@ requires valid();
  //@ ensures valid();
  {
    return 0;
  }
};
class Q : P {
 public:
  /*@ predicate valid() = this->valid(&typeid(P))(); @*/
  Q() : P()
  //@ requires true;
  //@ ensures valid();
  {
    //@ close valid();
  }
  virtual int f() override
  //@ requires valid();
  //@ ensures valid();
  {
    return 1;
  }
};
/*@ predicate pair(K* k; int a, int b) =
      K_x(k, a) &*& K_y(k, b); @*/
"""


@pytest.fixture()
def checker():
    table = build_class_table(parse_program(SRC, "t.mcpp"))
    return SymbolicChecker(table)


def member_state(checker, cls="K"):
    s = SymState()
    this = checker.fresh("this")
    s.assume(ne(this, ZERO))
    s.bind("this", this, TypeExpr(cls, 1))
    s.bind("thisType", TypeInfo(cls), TYPEINFO_T)
    return s, this


def test_produce_then_consume_chunk(checker):
    s, this = member_state(checker)
    a = parse_assertion("K_x(this, ?v) &*& K_y(this, 3)")
    [s] = checker.produce(s, a, "K")
    assert len(s.heap) == 2
    assert "v" in s.env
    b = parse_assertion("K_x(this, _) &*& K_y(this, ?w)")
    [s] = checker.consume(s, b, "K")
    assert s.heap == []
    assert s.env["w"].term == IntLit(3)


def test_consume_missing_chunk_fails(checker):
    s, this = member_state(checker)
    with pytest.raises(CheckError) as err:
        checker.consume(s, parse_assertion("K_x(this, _)"), "K")
    assert str(err.value.category) == "MissingChunk"


def test_pure_consume_requires_proof(checker):
    s, this = member_state(checker)
    s.bind("v", IntLit(2), TypeExpr("int"))
    [s] = checker.consume(s, parse_assertion("v == 2"), "K")
    with pytest.raises(CheckError):
        checker.consume(s, parse_assertion("v == 3"), "K")


def test_fraction_split_and_rejoin(checker):
    s, this = member_state(checker)
    [s] = checker.produce(s, parse_assertion("K_x(this, 1)"), "K")
    [s] = checker.consume(s, parse_assertion("[1/2]K_x(this, ?v)"), "K")
    assert len(s.heap) == 1 and s.heap[0].coeff == Fraction(1, 2)
    [s] = checker.produce(s, parse_assertion("[1/2]K_x(this, 1)"), "K")
    # two half chunks are not rejoined automatically; a full-coefficient
    # request cannot be satisfied by either one
    with pytest.raises(CheckError):
        checker.consume(s.copy(), parse_assertion("K_x(this, _)"), "K")
    [s] = checker.consume(s, parse_assertion("[1/2]K_x(this, _)"), "K")
    [s] = checker.consume(s, parse_assertion("[1/2]K_x(this, _)"), "K")
    assert s.heap == []


def test_static_predicate_open_close(checker):
    s, this = member_state(checker)
    k = checker.fresh("k")
    s.assume(ne(k, ZERO))
    s.bind("k", k, TypeExpr("K", 1))
    [s] = checker.produce(
        s, parse_assertion("K_x(k, 1) &*& K_y(k, 2)"), None)
    [s] = checker.open_close(
        s, GhostS("close", parse_assertion("pair(k, 1, 2)"), None), None)
    assert [c.family for c in s.heap] == ["pair"]
    [s] = checker.open_close(
        s, GhostS("open", parse_assertion("pair(k, ?a, ?b)"), None), None)
    assert sorted(c.family for c in s.heap) == ["K_x", "K_y"]
    assert s.env["a"].term == IntLit(1)


def test_instance_predicate_target_canonicalized(checker):
    # producing via the derived class and consuming via the base subobject
    # hits the same chunk
    s, this = member_state(checker, "Q")
    [s] = checker.produce(s, parse_assertion("valid()"), "Q")
    assert len(s.heap) == 1
    chunk = s.heap[0]
    assert chunk.family == "P#valid"
    assert chunk.index == TypeInfo("Q")
    [s] = checker.consume(
        s, parse_assertion("((P*)this)->valid(&typeid(Q))()"), "Q")
    assert s.heap == []


def test_instance_predicate_unknown(checker):
    s, this = member_state(checker, "P")
    with pytest.raises(CheckError) as err:
        checker.consume(s, parse_assertion("nosuch()"), "P")
    assert str(err.value.category) == "UnknownPredicate"


def test_vtype_opaque_without_poly_bases(checker):
    s, this = member_state(checker, "P")
    [s] = checker.produce(s, parse_assertion("P_vtype(this, ?t)"), None)
    with pytest.raises(CheckError) as err:
        checker.open_close(
            s, GhostS("open", parse_assertion("P_vtype(this, _)"), None),
            None)
    assert str(err.value.category) == "OpaquePredicate"


def test_vtype_open_close_with_poly_base(checker):
    s, this = member_state(checker, "Q")
    [s] = checker.produce(s, parse_assertion("Q_vtype(this, ?t)"), None)
    [s] = checker.open_close(
        s, GhostS("open", parse_assertion("Q_vtype(this, ?u)"), None), "Q")
    assert [c.family for c in s.heap] == ["P_vtype"]
    [s] = checker.open_close(
        s, GhostS("close", parse_assertion("Q_vtype(this, u)"), None), "Q")
    assert [c.family for c in s.heap] == ["Q_vtype"]


def test_points_to_requires_exact_class(checker):
    s, this = member_state(checker, "Q")
    s.bind("q", this, TypeExpr("Q", 1))
    with pytest.raises(CheckError):
        # n is declared in P, not Q: the points-to form insists on a cast
        checker.produce(s, parse_assertion("q->n |-> 3"), None)
    [s] = checker.produce(s, parse_assertion("((P*)q)->n |-> 3"), None)
    assert s.heap[0].family == "P_n"


def test_conditional_assertion_branches(checker):
    s, this = member_state(checker)
    s.bind("b", checker.fresh("b"), TypeExpr("bool"))
    a = parse_assertion("b ? K_x(this, 1) : K_y(this, 2)")
    out = checker.produce(s, a, "K")
    assert len(out) == 2
    fams = sorted(st.heap[0].family for st in out)
    assert fams == ["K_x", "K_y"]


def test_leak_check(checker):
    s, this = member_state(checker)
    checker.leak_check(s, None, "path")
    [s] = checker.produce(s, parse_assertion("K_x(this, 1)"), "K")
    with pytest.raises(CheckError) as err:
        checker.leak_check(s, None, "path")
    assert str(err.value.category) == "Leak"
