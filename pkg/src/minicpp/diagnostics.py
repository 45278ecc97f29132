"""Source locations, error categories, diagnostics and trace events."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional


@dataclass(frozen=True)
class Loc:
    path: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}"


class Category(str, Enum):
    SYNTAX_ERROR = "SyntaxError"
    UNKNOWN_NAME = "UnknownName"
    CYCLIC_INHERITANCE = "CyclicInheritance"
    DUPLICATE_MEMBER = "DuplicateMember"
    NULL_TARGET = "NullTarget"
    MISSING_CHUNK = "MissingChunk"
    LEAK = "Leak"
    AMBIGUOUS_UPCAST = "AmbiguousUpcast"
    NOT_A_BASE = "NotABase"
    EXPLICIT_DTOR_CALL = "ExplicitDtorCall"
    SUBTYPING_VIOLATION = "SubtypingViolation"
    OVERRIDE_INCOMPLETE = "OverrideIncomplete"
    OPAQUE_PREDICATE = "OpaquePredicate"
    NO_VIABLE_OVERLOAD = "NoViableOverload"
    AMBIGUOUS_OVERLOAD = "AmbiguousOverload"
    UNKNOWN_PREDICATE = "UnknownPredicate"
    UNKNOWN_INDEX = "UnknownIndex"
    MALFORMED_ASSERTION = "MalformedAssertion"
    UNREACHABLE = "Unreachable"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Diagnostic:
    category: Category
    message: str
    loc: Loc

    def __str__(self) -> str:
        return f"{self.loc}: {self.category}: {self.message}"


@dataclass(frozen=True)
class TraceEvent:
    kind: str
    detail: str
    loc: Optional[Loc]
    heap_size: int

    def __str__(self) -> str:
        where = f" @ {self.loc}" if self.loc else ""
        return f"{self.kind}: {self.detail} [heap={self.heap_size}]{where}"


class CheckError(Exception):
    """Raised when a proof obligation fails; carries the failure category."""

    def __init__(self, category: Category, message: str, loc: Optional[Loc]):
        super().__init__(message)
        self.category = category
        self.message = message
        self.loc = loc

    def diagnostic(self, fallback: Loc) -> Diagnostic:
        return Diagnostic(self.category, self.message, self.loc or fallback)
