"""Class table construction, derivation paths, overriders."""

from __future__ import annotations

import pytest

from minicpp import ResolveError, build_class_table, parse_program
from minicpp.classmodel import UpcastAmbiguous, UpcastNotABase


def table_of(src: str):
    return build_class_table(parse_program(src, "t.mcpp"))


TRIVIAL = "class %s %s { };\n"


def chain(*pairs) -> str:
    out = []
    for name, bases in pairs:
        out.append(TRIVIAL % (name, f": {', '.join(bases)}" if bases else ""))
    return "".join(out)


def test_cycle_detected():
    # a cycle can only be written via forward references, which resolve
    # to unknown bases first; simulate with mutual derivation
    src = chain(("A", ["B"]), ("B", ["A"]))
    with pytest.raises(ResolveError) as err:
        table_of(src)
    cats = {str(d.category) for d in err.value.diagnostics}
    assert "CyclicInheritance" in cats


def test_duplicate_class_and_member():
    with pytest.raises(ResolveError):
        table_of(chain(("A", []), ("A", [])))
    with pytest.raises(ResolveError):
        table_of("class A { int x; int x; };")


def test_unknown_base():
    with pytest.raises(ResolveError):
        table_of(chain(("A", ["Nope"])))


def test_upcast_paths_diamond():
    t = table_of(chain(("A", []), ("B", ["A"]), ("C", ["A"]),
                       ("D", ["B", "C"])))
    assert t.count_paths("D", "A") == 2
    assert t.count_paths("D", "B") == 1
    assert t.upcast_path("D", "B") == [("D", "B")]
    assert t.upcast_path("B", "A") == [("B", "A")]
    with pytest.raises(UpcastAmbiguous):
        t.upcast_path("D", "A")
    with pytest.raises(UpcastNotABase):
        t.upcast_path("A", "D")


def test_polymorphism_propagates():
    t = table_of(
        """
        class A {
         public:
          virtual int f()
          //@ requires true;
          //@ ensures true;
          {
            return 0;
          }
        };
        class B : A {
         public:
          virtual int f() override
          //@ requires true;
          //@ ensures true;
          {
            return 1;
          }
        };
        class C { };
        """)
    assert t.is_polymorphic("A")
    assert t.is_polymorphic("B")
    assert not t.is_polymorphic("C")
    assert t.vtype_definition("A") is None       # opaque: no poly bases
    assert t.vtype_definition("B") == ["A"]


def test_final_overrider_and_pairs():
    t = table_of(
        """
        class A {
         public:
          virtual int f()
          //@ requires true;
          //@ ensures true;
          {
            return 0;
          }
        };
        class B : A {
         public:
          virtual int f() override
          //@ requires true;
          //@ ensures true;
          {
            return 1;
          }
        };
        """)
    cls, m = t.final_overrider("B", "f", ())
    assert cls == "B"
    pairs = t.override_pairs()
    assert [(d, b) for d, _, b, _ in pairs] == [("B", "A")]


def test_override_completeness():
    t = table_of(
        """
        class A {
         public:
          virtual int f()
          //@ requires true;
          //@ ensures true;
          {
            return 0;
          }
          virtual int g()
          //@ requires true;
          //@ ensures true;
          {
            return 0;
          }
        };
        class B : A {
         public:
          virtual int f() override
          //@ requires true;
          //@ ensures true;
          {
            return 1;
          }
        };
        """)
    diags = t.check_override_completeness()
    assert len(diags) == 1
    assert "g" in diags[0].message and "B" in diags[0].message


def test_implicit_special_members():
    t = table_of("class P { int x; int y; };")
    info = t.cls("P")
    assert len(info.ctors) == 1 and info.ctors[0].implicit
    assert info.dtor is not None and info.dtor.implicit
    # classes with bases or virtuals get nothing implicit
    t2 = table_of(chain(("A", []), ("B", ["A"])))
    assert t2.cls("B").ctors == []


def test_instpred_root():
    t = table_of(
        """
        class A {
         public:
          /*@ predicate valid() = true; @*/
        };
        class B : A {
         public:
          /*@ predicate valid() = this->valid(&typeid(A))(); @*/
        };
        """)
    assert t.instpred_root("B", "valid") == "A"
    assert t.instpred_root("A", "valid") == "A"
    assert t.instpred_root("A", "nope") is None


def test_field_lookup_through_bases():
    t = table_of(
        """
        class A { int m; };
        class B : A { };
        """)
    cls, fd = t.lookup_field("B", "m")
    assert cls == "A" and fd.name == "m"
    assert t.lookup_field("B", "zz") is None
