"""Acceptance checks. Each test prints one pass/fail line for its
criterion before asserting, so a full run yields a readable scorecard."""

from __future__ import annotations

import io
import json

from helpers import CORPUS, check_file, check_source, corpus_path, failures
from minicpp.cli import run_files

import test_properties as props


def report(num: int, ok: bool, detail: str) -> None:
    mark = "PASS" if ok else "FAIL"
    print(f"criterion {num}: {mark} - {detail}")
    assert ok, detail


def test_criterion_1_instance_predicates_verify():
    results = check_file("shape_instance_pred.mcpp")
    bad = failures(results)
    report(1, not bad,
           "Shape/Square instance-predicate file verifies with zero "
           f"diagnostics ({len(results)} obligations)")


def test_criterion_2_strengthened_precondition_rejected():
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
  //@ requires B_y(this, ?v);
  //@ ensures B_y(this, v);
  {
    return 0;
  }
};
""")
    cats = [str(r.diagnostic.category) for r in failures(results)]
    report(2, cats == ["SubtypingViolation"],
           f"override that strengthens the precondition rejected: {cats}")


def test_criterion_3_instance_predicate_rephrasing_verifies():
    results = check_file("instance_pred_refine.mcpp")
    bad = failures(results)
    has_sub = any("override" in r.subject for r in results)
    report(3, not bad and has_sub,
           "derived class rephrasing its instance predicate verifies, "
           "including the behavioral subtyping obligation")


def test_criterion_4_ctor_virtual_call():
    results = check_file("ctor_virtual_call.mcpp")
    bad = failures(results)
    hit = [r for r in bad
           if str(r.diagnostic.category) == "MissingChunk"
           and "A_vtype" in r.diagnostic.message]
    ctor_ok = any(r.ok and r.subject == "C::C" for r in results)
    report(4, len(bad) == len(hit) == 1 and ctor_ok,
           "virtual call during construction lacks the A_vtype chunk "
           "while C's own constructor verifies")


def test_criterion_5_diamond_upcasts():
    amb = check_file("diamond_ambiguous.mcpp")
    cats = [str(r.diagnostic.category) for r in failures(amb)]
    expl = check_file("diamond_explicit.mcpp")
    report(5, "AmbiguousUpcast" in cats and not failures(expl),
           "implicit diamond upcast is ambiguous; the cast through B "
           f"verifies ({cats})")


def test_criterion_6_lifetime_misuse():
    checks = [
        ("double_delete.mcpp", "MissingChunk", "new_block"),
        ("delete_via_base.mcpp", "MissingChunk", None),
        ("new_leak.mcpp", "Leak", None),
        ("explicit_dtor.mcpp", "ExplicitDtorCall", None),
    ]
    problems = []
    for name, cat, needle in checks:
        bad = failures(check_file(name))
        if not any(str(r.diagnostic.category) == cat
                   and (needle is None or needle in r.diagnostic.message)
                   for r in bad):
            problems.append(name)
    report(6, not problems,
           "double delete, delete through a base pointer, a leaked new "
           f"and an explicit destructor call are all rejected {problems}")


def test_criterion_7_override_completeness():
    results = check_file("override_incomplete.mcpp")
    cats = [str(r.diagnostic.category) for r in failures(results)]
    report(7, cats == ["OverrideIncomplete"],
           f"missing override of a virtual method is rejected: {cats}")


def test_criterion_8_property_suites():
    props.test_entailment_sound_against_finite_models()
    props.test_produce_consume_roundtrip()
    props.test_upcast_paths_match_dfs_oracle()
    props.test_coefficient_accounting_bounded()
    report(8, props.N_CASES >= 200,
           f"four randomized property suites passed with >= "
           f"{props.N_CASES} cases each")


def test_criterion_9_structured_output_deterministic():
    files = [corpus_path(n) for n in
             ("point.mcpp", "shape_instance_pred.mcpp",
              "double_delete.mcpp", "new_leak.mcpp")]
    runs = []
    for _ in range(3):
        out = io.StringIO()
        run_files(files, "structured", False, False, out=out)
        runs.append(out.getvalue().encode("utf-8"))
    ok = runs[0] == runs[1] == runs[2] and json.loads(runs[0])
    report(9, bool(ok),
           "structured output is byte-identical across three runs")
