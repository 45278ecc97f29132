"""Shared helpers for the test suite."""

from __future__ import annotations

import os
from typing import List, Optional

from minicpp import build_class_table, parse_program, verify_program
from minicpp.verifier import Result

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "corpus")


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def check_source(src: str, path: str = "test.mcpp") -> List[Result]:
    prog = parse_program(src, path)
    table = build_class_table(prog)
    results, _ = verify_program(table)
    return results


def check_file(name: str) -> List[Result]:
    with open(corpus_path(name), "r", encoding="utf-8") as fh:
        return check_source(fh.read(), name)


def failures(results: List[Result]) -> List[Result]:
    return [r for r in results if not r.ok]


def categories(results: List[Result]) -> List[str]:
    return [str(r.diagnostic.category) for r in results if not r.ok]


def first_failure(results: List[Result]) -> Optional[Result]:
    bad = failures(results)
    return bad[0] if bad else None
