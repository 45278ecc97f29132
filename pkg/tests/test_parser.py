"""Frontend tests: lexing, parsing, pretty-print round trips."""

from __future__ import annotations

import glob
import os

import pytest

from helpers import CORPUS
from minicpp.parser import ParseError, parse_assertion, parse_program
from minicpp.printer import format_assertion, format_program
from minicpp.syntax import (
    ChunkA, ClassDecl, CondA, InstPredA, PatternE, PointsToA, PureA, SepA,
)


def roundtrip(src: str) -> None:
    p1 = parse_program(src, "a.mcpp")
    text = format_program(p1)
    p2 = parse_program(text, "a.mcpp")
    assert p1 == p2, f"round trip changed the tree:\n{text}"


def test_roundtrip_corpus_files():
    files = sorted(glob.glob(os.path.join(CORPUS, "*.mcpp")))
    assert files
    for f in files:
        if os.path.basename(f) == "bad_syntax.mcpp":
            continue
        with open(f, "r", encoding="utf-8") as fh:
            roundtrip(fh.read())


def test_ghost_material_only_in_annotations():
    with pytest.raises(ParseError):
        parse_program("predicate p() = true;", "a.mcpp")
    prog = parse_program("/*@ predicate p() = true; @*/", "a.mcpp")
    assert len(prog.decls) == 1


def test_contract_is_mandatory():
    with pytest.raises(ParseError):
        parse_program("int f() { return 0; }", "a.mcpp")


def test_assertion_classification():
    a = parse_assertion("C_x(this, ?v)")
    assert isinstance(a, ChunkA) and a.name == "C_x"
    assert isinstance(a.args[1], PatternE)

    a = parse_assertion("p->valid()")
    assert isinstance(a, InstPredA) and a.target is not None and \
        a.index is None

    a = parse_assertion("valid(&typeid(A))(x)")
    assert isinstance(a, InstPredA) and a.index is not None

    a = parse_assertion("this->f |-> ?v")
    assert isinstance(a, PointsToA)

    a = parse_assertion("x == 1 &*& C_x(this, x)")
    assert isinstance(a, SepA) and isinstance(a.left, PureA)

    a = parse_assertion("b ? emp : C_x(this, 1)")
    assert isinstance(a, CondA)


def test_coefficients():
    a = parse_assertion("[1/2]C_x(this, ?v)")
    assert isinstance(a, ChunkA)
    a = parse_assertion("[?f]A_vtype(this, ?t)")
    assert isinstance(a, ChunkA)
    a = parse_assertion("[f]A_vtype(this, t)")
    assert isinstance(a, ChunkA)
    with pytest.raises(ParseError):
        parse_assertion("[3/2]C_x(this, ?v)")
    with pytest.raises(ParseError):
        parse_assertion("[1/2](x == 1)")


def test_assertion_roundtrip():
    for text in [
        "C_x(this, ?v) &*& 0 <= v",
        "[1/2]A_vtype(p, ?t)",
        "p->valid(&typeid(A))(x, _)",
        "x == 1 ? emp : C_x(this, 1)",
        "this->f |-> ?v",
        "emp",
    ]:
        a1 = parse_assertion(text)
        a2 = parse_assertion(format_assertion(a1))
        assert a1 == a2


def test_locations_reported():
    try:
        parse_program("class X {\n  int y\n};", "loc.mcpp")
        assert False, "expected a syntax error"
    except ParseError as err:
        d = err.diagnostics[0]
        assert d.loc.path == "loc.mcpp" and d.loc.line == 3


def test_parse_is_deterministic():
    src = open(os.path.join(CORPUS, "shape_instance_pred.mcpp")).read()
    assert parse_program(src, "x") == parse_program(src, "x")


def test_virtual_destructor_parses():
    prog = parse_program(
        """
        class A {
         public:
          virtual ~A()
          //@ requires true;
          //@ ensures true;
          {
          }
        };
        """, "a.mcpp")
    cls = prog.decls[0]
    assert isinstance(cls, ClassDecl)
    assert cls.dtor is not None and cls.dtor.virtual
