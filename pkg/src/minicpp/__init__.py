"""Modular separation-logic verifier for an annotated C++ subset."""

from .classmodel import ClassTable, ResolveError, build_class_table
from .diagnostics import Category, CheckError, Diagnostic, Loc
from .parser import ParseError, parse_assertion, parse_program
from .verifier import Executor, Result, verify_program

__all__ = [
    "Category", "CheckError", "ClassTable", "Diagnostic", "Executor",
    "Loc", "ParseError", "ResolveError", "Result", "build_class_table",
    "parse_assertion", "parse_program", "verify_program",
]

__version__ = "0.1.0"
