#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Golden corpus runner.

Every `name.cap` has a sidecar `name.expect`:

    flags: --scala-compat       (optional)
    input <line>                (optional, repeated: lines returned by readLine)
    ok                          positive case...
    output <text>               ...followed by the exact Output events of the run
    E_KILLED_USE 7              negative case: one "<code> <line>" per diagnostic, in order

Positive files defining `main` are also run; files without `main` are check-only.
"""

import os
import glob
import logging

from typing import List, Tuple

from pydantic import BaseModel

from capc.diagnostics import ANSI_COLOR_GREEN, ANSI_COLOR_RED, ANSI_COLOR_RESET, RuntimeFault
from capc.interp import run_program
from capc.pipeline import compile_file

logger = logging.getLogger(__name__)

CORPUS_FLAGS = {"--scala-compat"}

# Corpus Case --------------------------------------------------------------------------------------

class CorpusCase(BaseModel):
    """
    Parameters:
    - path (str)            : The .cap file.
    - kind (str)            : "positive" or "negative".
    - flags (list)          : Checker flags from the `flags:` line.
    - inputs (list)         : Scripted readLine input.
    - outputs (list)        : Expected Output events (positive cases).
    - expected (list)       : Expected (code, line) pairs (negative cases).
    """
    path     : str
    kind     : str
    flags    : List[str]             = []
    inputs   : List[str]             = []
    outputs  : List[str]             = []
    expected : List[Tuple[str, int]] = []

    @property
    def name(self):
        return os.path.splitext(os.path.basename(self.path))[0]

    @property
    def scala_compat(self):
        return "--scala-compat" in self.flags

class CaseResult(BaseModel):
    case     : CorpusCase
    problems : List[str] = []

    @property
    def passed(self):
        return not self.problems

class CorpusReport(BaseModel):
    results: List[CaseResult] = []

    @property
    def failures(self):
        return [r for r in self.results if not r.passed]

    @property
    def passed(self):
        return bool(self.results) and not self.failures

    def lines(self, color=True):
        def tag(ok):
            if not color:
                return "[PASS]" if ok else "[FAIL]"
            return f"{ANSI_COLOR_GREEN}[PASS]{ANSI_COLOR_RESET}" if ok else f"{ANSI_COLOR_RED}[FAIL]{ANSI_COLOR_RESET}"
        out = ["", "CAP CORPUS", "-"*40]
        for r in self.results:
            out.append(f"{r.case.name:<32} {r.case.kind:<9} {tag(r.passed)}")
            out += [f"\t{p}" for p in r.problems]
        out += ["-"*40, f"CAP CORPUS {tag(self.passed)} ({len(self.results) - len(self.failures)}/{len(self.results)})"]
        return out

# Expectation Parsing ------------------------------------------------------------------------------

class ExpectError(Exception):
    pass

def parse_expect(path, text):
    flags, inputs, outputs, expected = [], [], [], []
    kind = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("flags:"):
            flags = line[len("flags:"):].split()
            unknown = [f for f in flags if f not in CORPUS_FLAGS]
            if unknown:
                raise ExpectError(f"{path}:{n}: unknown flag {unknown[0]}")
        elif line == "input" or line.startswith("input "):
            inputs.append(raw.split("input", 1)[1][1:])
        elif line == "ok":
            kind = "positive"
        elif line == "output" or line.startswith("output "):
            if kind != "positive":
                raise ExpectError(f"{path}:{n}: output line outside a positive case")
            outputs.append(raw.split("output", 1)[1][1:])
        else:
            code, _, at = line.partition(" ")
            if not code.startswith("E_") or not at.strip().isdigit():
                raise ExpectError(f"{path}:{n}: cannot parse {line!r}")
            if kind == "positive":
                raise ExpectError(f"{path}:{n}: diagnostic in a positive case")
            kind = "negative"
            expected.append((code, int(at)))
    if kind is None:
        raise ExpectError(f"{path}: no expectation")
    return dict(kind=kind, flags=flags, inputs=inputs, outputs=outputs, expected=expected)

def load_case(cap_path):
    expect_path = os.path.splitext(cap_path)[0] + ".expect"
    with open(expect_path, encoding="utf-8") as f:
        fields = parse_expect(expect_path, f.read())
    return CorpusCase(path=cap_path, **fields)

def discover(directory):
    return sorted(p for p in glob.glob(os.path.join(directory, "*.cap"))
        if os.path.exists(os.path.splitext(p)[0] + ".expect"))

# Runner -------------------------------------------------------------------------------------------

def has_main(comp):
    return comp.program is not None and any(
        d.name == "main" for d in comp.program.user_defs(comp.file))

def check_case(case):
    """Check (and run) one case; returns the list of mismatches."""
    comp = compile_file(case.path, scala_compat=case.scala_compat)
    got  = [(d.code.value, d.span.start_line) for d in comp.diagnostics]

    if case.kind == "negative":
        if got != case.expected:
            return [f"expected {_show_codes(case.expected)}, got {_show_codes(got)}"] + \
                [f"{d.span}: {d.message}" for d in comp.diagnostics]
        return []

    if got:
        return [f"expected no diagnostics, got {_show_codes(got)}"] + \
            [f"{d.span}: {d.message}" for d in comp.diagnostics]
    if not has_main(comp):
        return []
    try:
        _, trace = run_program(comp.program, inputs=case.inputs)
    except RuntimeFault as e:
        return [f"run failed: {e}"]
    problems = []
    if trace.guards():
        problems.append(f"{len(trace.guards())} guard events")
    if trace.outputs() != case.outputs:
        problems.append(f"expected output {case.outputs}, got {trace.outputs()}")
    return problems

def _show_codes(pairs):
    return "[" + ", ".join(f"{c}@{line}" for c, line in pairs) + "]" if pairs else "nothing"

def run_corpus(directory):
    report = CorpusReport()
    for path in discover(directory):
        try:
            case = load_case(path)
        except ExpectError as e:
            case = CorpusCase(path=path, kind="invalid")
            report.results.append(CaseResult(case=case, problems=[str(e)]))
            continue
        logger.debug("Corpus case %s (%s).", case.name, case.kind)
        report.results.append(CaseResult(case=case, problems=check_case(case)))
    return report
