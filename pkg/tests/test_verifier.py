"""Verifier obligations: bodies, call rules, lifetimes, subtyping."""

from __future__ import annotations

import pytest

from helpers import categories, check_source, failures, first_failure


def ok(src: str) -> None:
    results = check_source(src)
    bad = failures(results)
    assert not bad, "\n".join(str(r.diagnostic) for r in bad)


CELL = """
class Cell {
 public:
  int v;
  Cell(int x)
  //@ requires true;
  //@ ensures Cell_v(this, x);
  {
    v = x;
  }
  ~Cell()
  //@ requires Cell_v(this, _);
  //@ ensures true;
  {
  }
};
"""


def test_new_and_delete_balance():
    ok(CELL + """
int main()
//@ requires true;
//@ ensures true;
{
  Cell* c = new Cell(4);
  delete c;
  return 0;
}
""")


def test_leak_detected():
    results = check_source(CELL + """
int main()
//@ requires true;
//@ ensures true;
{
  Cell* c = new Cell(4);
  return 0;
}
""")
    assert categories(results) == ["Leak"]


def test_leak_ghost_statement_discards():
    ok(CELL + """
int main()
//@ requires true;
//@ ensures true;
{
  Cell* c = new Cell(4);
  //@ leak new_block_Cell(c) &*& Cell_v(c, _);
  return 0;
}
""")


def test_null_target_rejected():
    results = check_source(CELL + """
int poke(Cell* c)
//@ requires Cell_v(c, ?x);
//@ ensures Cell_v(c, x);
{
  int r = c->get();
  return r;
}
""" .replace("get", "get"))
    # no null-ness known and no member named get: category order puts
    # lookup first
    assert results


def test_null_check_on_member_call():
    src = CELL.replace("};", """
  int get()
  //@ requires Cell_v(this, ?x);
  //@ ensures Cell_v(this, x) &*& result == x;
  {
    return v;
  }
};""")
    results = check_source(src + """
int poke(Cell* c)
//@ requires Cell_v(c, ?x);
//@ ensures Cell_v(c, x);
{
  int r = c->get();
  return r;
}
""")
    bad = first_failure(results)
    assert bad is not None
    assert str(bad.diagnostic.category) == "NullTarget"
    # adding the null-ness fact fixes it
    ok(src + """
int poke(Cell* c)
//@ requires c != 0 &*& Cell_v(c, ?x);
//@ ensures Cell_v(c, x);
{
  int r = c->get();
  return r;
}
""")


def test_stack_object_lifecycle():
    ok(CELL + """
int main()
//@ requires true;
//@ ensures true;
{
  Cell c(9);
  return 0;
}
""")


def test_if_branches_join():
    ok(CELL + """
int pick(int b)
//@ requires true;
//@ ensures 0 <= result;
{
  if (b == 0) {
    return 1;
  } else {
    return 2;
  }
}
""")


def test_write_needs_full_permission():
    src = CELL.replace("};", """
  void set(int x)
  //@ requires [1/2]Cell_v(this, _);
  //@ ensures [1/2]Cell_v(this, x);
  {
    v = x;
  }
};""")
    results = check_source(src)
    bad = first_failure(results)
    assert bad is not None and str(bad.diagnostic.category) == "MissingChunk"


def test_fractional_read_is_enough():
    ok(CELL.replace("};", """
  int get()
  //@ requires [1/2]Cell_v(this, ?x);
  //@ ensures [1/2]Cell_v(this, x) &*& result == x;
  {
    return v;
  }
};"""))


def test_overload_resolution():
    src = """
class Box {
 public:
  int a;
  Box(int x)
  //@ requires true;
  //@ ensures Box_a(this, x);
  {
    a = x;
  }
  Box()
  //@ requires true;
  //@ ensures Box_a(this, 0);
  {
    a = 0;
  }
  ~Box()
  //@ requires Box_a(this, _);
  //@ ensures true;
  {
  }
};

int main()
//@ requires true;
//@ ensures true;
{
  Box* p = new Box(3);
  Box* q = new Box();
  delete p;
  delete q;
  return 0;
}
"""
    ok(src)
    results = check_source(src.replace("new Box(3)", "new Box(3, 4)"))
    assert "NoViableOverload" in categories(results)


def test_qualified_call_is_static():
    ok("""
class A {
 public:
  A()
  //@ requires true;
  //@ ensures true;
  {
  }
  virtual int f()
  //@ requires true;
  //@ ensures result == 1;
  {
    return 1;
  }
};
class B : A {
 public:
  B() : A()
  //@ requires true;
  //@ ensures true;
  {
  }
  virtual int f() override
  //@ requires true;
  //@ ensures result == 1;
  {
    int x = A::f();
    return x;
  }
};
""")


def test_explicit_dtor_call_rejected():
    results = check_source(CELL + """
int main()
//@ requires true;
//@ ensures true;
{
  Cell* c = new Cell(1);
  c->~Cell();
  return 0;
}
""")
    assert "ExplicitDtorCall" in categories(results)


def test_three_level_hierarchy_lifecycle():
    # constructing and destroying a grandchild must balance all
    # engine-maintained chunks of every level
    ok("""
class A {
 public:
  A()
  //@ requires true;
  //@ ensures true;
  {
  }
  ~A()
  //@ requires true;
  //@ ensures true;
  {
  }
};
class B : A {
 public:
  B() : A()
  //@ requires true;
  //@ ensures true;
  {
  }
  ~B()
  //@ requires true;
  //@ ensures true;
  {
  }
};
class C : B {
 public:
  C() : B()
  //@ requires true;
  //@ ensures true;
  {
  }
  ~C()
  //@ requires true;
  //@ ensures true;
  {
  }
};

int main()
//@ requires true;
//@ ensures true;
{
  C* c = new C();
  delete c;
  return 0;
}
""")


def test_subtyping_weaker_pre_stronger_post_ok():
    ok("""
class A {
 public:
  int m;
  A()
  //@ requires true;
  //@ ensures A_m(this, 0);
  {
    m = 0;
  }
  virtual int f()
  //@ requires A_m((A*)this, ?x) &*& 0 <= x;
  //@ ensures A_m((A*)this, x);
  {
    return 0;
  }
};
class B : A {
 public:
  B() : A()
  //@ requires true;
  //@ ensures A_m((A*)this, 0);
  {
  }
  virtual int f() override
  //@ requires A_m((A*)this, ?x);
  //@ ensures A_m((A*)this, x) &*& result == 0;
  {
    return 0;
  }
};
""")


def test_subtyping_stronger_pre_rejected():
    results = check_source("""
class A {
 public:
  A()
  //@ requires true;
  //@ ensures true;
  {
  }
  virtual int f()
  //@ requires true;
  //@ ensures true;
  {
    return 0;
  }
};
class B : A {
 public:
  int y;
  B() : A()
  //@ requires true;
  //@ ensures B_y(this, 0);
  {
    y = 0;
  }
  virtual int f() override
  //@ requires B_y(this, ?x);
  //@ ensures B_y(this, x);
  {
    return 0;
  }
};
""")
    assert "SubtypingViolation" in categories(results)


def test_member_call_needs_bases_constructed():
    # calling a member of a derived class requires the engine's
    # bases_constructed token, which only full construction provides
    results = check_source("""
class A {
 public:
  A()
  //@ requires true;
  //@ ensures true;
  {
  }
};
class B : A {
 public:
  B() : A()
  //@ requires true;
  //@ ensures true;
  {
  }
  int f()
  //@ requires true;
  //@ ensures true;
  {
    return 0;
  }
};

int use(B* b)
//@ requires b != 0;
//@ ensures true;
{
  int x = b->f();
  return x;
}
""")
    bad = first_failure(results)
    assert bad is not None
    assert "bases_constructed" in bad.diagnostic.message


def test_trace_events_recorded():
    from minicpp import build_class_table, parse_program, verify_program
    prog = parse_program(CELL + """
int main()
//@ requires true;
//@ ensures true;
{
  Cell* c = new Cell(4);
  delete c;
  return 0;
}
""", "t.mcpp")
    results, events = verify_program(build_class_table(prog), trace=True)
    assert events and any(ev.kind == "produce" for ev in events)
    assert any(ev.kind == "consume" for ev in events)
