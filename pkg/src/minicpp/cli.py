"""Batch verification driver.

Usage:
  minicpp [options] file.mcpp [file2.mcpp ...]
  minicpp --manifest corpus/manifest.txt

Exit codes: 0 all obligations verified (or all manifest expectations met),
1 verification failures, 2 frontend or usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Tuple

from .classmodel import ResolveError, build_class_table
from .diagnostics import Diagnostic, Loc
from .parser import ParseError, parse_program
from .verifier import Result, verify_program


def check_file(path: str, trace: bool = False
               ) -> Tuple[List[Result], Optional[list], int]:
    """Verify one source file. Returns (results, trace events, status)
    where status is 0 (verified), 1 (failed obligations) or 2 (frontend
    error)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        return ([Result(path, Loc(path, 0, 0),
                        _io_diag(path, str(err)))], None, 2)
    try:
        prog = parse_program(text, path)
        table = build_class_table(prog)
    except ParseError as err:
        return ([Result("parse", d.loc, d) for d in err.diagnostics],
                None, 2)
    except ResolveError as err:
        return ([Result("resolve", d.loc, d) for d in err.diagnostics],
                None, 2)
    results, events = verify_program(table, trace)
    status = 0 if all(r.ok for r in results) else 1
    return results, events, status


def _io_diag(path: str, message: str) -> Diagnostic:
    from .diagnostics import Category
    return Diagnostic(Category.SYNTAX_ERROR, message, Loc(path, 0, 0))


def _result_line(r: Result) -> str:
    if r.ok:
        return f"{r.loc}: Verified: {r.subject}"
    d = r.diagnostic
    return f"{d.loc}: {d.category}: {d.message}"


def _result_json(r: Result) -> dict:
    out = {
        "subject": r.subject,
        "loc": {"path": r.loc.path, "line": r.loc.line, "col": r.loc.col},
        "status": "verified" if r.ok else str(r.diagnostic.category),
    }
    if not r.ok:
        out["message"] = r.diagnostic.message
        out["loc"] = {"path": r.diagnostic.loc.path,
                      "line": r.diagnostic.loc.line,
                      "col": r.diagnostic.loc.col}
    return out


def run_files(paths: List[str], fmt: str, trace: bool,
              stop_on_first_error: bool, out=sys.stdout) -> int:
    exit_code = 0
    report = []
    for path in paths:
        results, events, status = check_file(path, trace)
        exit_code = max(exit_code, status)
        if fmt == "text":
            for r in results:
                print(_result_line(r), file=out)
            if trace and events:
                for ev in events:
                    print(f"trace: {ev}", file=out)
        else:
            entry = {"path": path,
                     "results": [_result_json(r) for r in results],
                     "status": status}
            if trace and events:
                entry["trace"] = [str(ev) for ev in events]
            report.append(entry)
        if stop_on_first_error and status != 0:
            break
    if fmt == "structured":
        print(json.dumps({"files": report, "exit": exit_code},
                         sort_keys=True, indent=2), file=out)
    return exit_code


def run_manifest(manifest: str, fmt: str, trace: bool,
                 out=sys.stdout) -> int:
    base = os.path.dirname(os.path.abspath(manifest))
    try:
        with open(manifest, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        print(f"error: cannot read manifest: {err}", file=sys.stderr)
        return 2
    failures = 0
    total = 0
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            print(f"error: bad manifest line: {line!r}", file=sys.stderr)
            return 2
        rel, expect = parts
        path = os.path.join(base, rel)
        total += 1
        results, _, status = check_file(path, trace)
        got = _summarize(results, status)
        if expect == "verify":
            ok = status == 0
        elif expect.startswith("reject:"):
            want = expect.split(":", 1)[1]
            ok = status != 0 and any(
                not r.ok and str(r.diagnostic.category) == want
                for r in results)
        else:
            print(f"error: bad expectation {expect!r}", file=sys.stderr)
            return 2
        mark = "PASS" if ok else "FAIL"
        print(f"{mark} {rel} expected={expect} got={got}", file=out)
        if not ok:
            failures += 1
    print(f"{total - failures}/{total} corpus expectations met", file=out)
    return 0 if failures == 0 else 1


def _summarize(results: List[Result], status: int) -> str:
    if status == 0:
        return "verify"
    cats = []
    for r in results:
        if not r.ok and str(r.diagnostic.category) not in cats:
            cats.append(str(r.diagnostic.category))
    return "reject:" + ",".join(cats)


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="minicpp",
        description="Separation-logic verifier for an annotated C++ "
                    "subset")
    ap.add_argument("files", nargs="*", help="source files to verify")
    ap.add_argument("--manifest", help="corpus manifest with expected "
                                       "outcomes")
    ap.add_argument("--format", choices=["text", "structured"],
                    default="text")
    ap.add_argument("--trace", action="store_true",
                    help="emit symbolic execution trace events")
    ap.add_argument("--stop-on-first-error", action="store_true")
    args = ap.parse_args(argv)
    if args.manifest:
        return run_manifest(args.manifest, args.format, args.trace)
    if not args.files:
        ap.print_usage(sys.stderr)
        return 2
    return run_files(args.files, args.format, args.trace,
                     args.stop_on_first_error)


if __name__ == "__main__":
    sys.exit(main())
