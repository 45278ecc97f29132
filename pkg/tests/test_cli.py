"""Command-line driver tests."""

from __future__ import annotations

import io
import json

import pytest

from helpers import CORPUS, corpus_path
from minicpp.cli import main, run_files, run_manifest


def capture(fn, *args, **kwargs):
    out = io.StringIO()
    code = fn(*args, out=out, **kwargs)
    return code, out.getvalue()


def test_exit_zero_on_verified_file():
    code, text = capture(run_files, [corpus_path("point.mcpp")],
                         "text", False, False)
    assert code == 0
    assert "Verified" in text and ": Verified: " in text


def test_exit_one_on_failed_obligation():
    code, text = capture(run_files, [corpus_path("new_leak.mcpp")],
                         "text", False, False)
    assert code == 1
    assert "Leak" in text


def test_exit_two_on_syntax_error():
    code, text = capture(run_files, [corpus_path("bad_syntax.mcpp")],
                         "text", False, False)
    assert code == 2
    assert "SyntaxError" in text


def test_exit_two_on_missing_file():
    code, _ = capture(run_files, ["no/such/file.mcpp"],
                      "text", False, False)
    assert code == 2


def test_text_lines_have_locations():
    _, text = capture(run_files, [corpus_path("double_delete.mcpp")],
                      "text", False, False)
    for line in text.strip().splitlines():
        assert line.split(":")[0].endswith(".mcpp")


def test_structured_output_is_json_and_deterministic():
    runs = []
    for _ in range(3):
        code, text = capture(
            run_files,
            [corpus_path("point.mcpp"), corpus_path("new_leak.mcpp")],
            "structured", False, False)
        runs.append(text)
    assert runs[0] == runs[1] == runs[2]
    doc = json.loads(runs[0])
    assert doc["exit"] == 1
    assert [f["status"] for f in doc["files"]] == [0, 1]
    statuses = [r["status"] for r in doc["files"][1]["results"]]
    assert "Leak" in statuses


def test_trace_flag_emits_events():
    _, plain = capture(run_files, [corpus_path("point.mcpp")],
                       "text", False, False)
    _, traced = capture(run_files, [corpus_path("point.mcpp")],
                        "text", True, False)
    assert "trace:" not in plain
    assert "trace:" in traced


def test_stop_on_first_error():
    files = [corpus_path("new_leak.mcpp"), corpus_path("point.mcpp")]
    code, text = capture(run_files, files, "text", False, True)
    assert code == 1
    assert "point.mcpp" not in text


def test_manifest_run_all_pass():
    import os
    code, text = capture(run_manifest,
                         os.path.join(CORPUS, "manifest.txt"),
                         "text", False)
    assert code == 0
    lines = text.strip().splitlines()
    assert all(l.startswith("PASS ") for l in lines[:-1])
    assert lines[-1].endswith("corpus expectations met")


def test_main_usage_error():
    assert main([]) == 2
