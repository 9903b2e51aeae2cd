#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import os
import re
import unittest

from capc.corpus import discover, load_case
from capc.interp import run_program
from capc.pipeline import compile_file, compile_source
from capc.typer import elab
from capc.typer.anf import anf_program
from capc.typer.recheck import recheck_program

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "..", "corpus")

# Helpers ------------------------------------------------------------------------------------------

def positive_cases():
    cases = [load_case(p) for p in discover(CORPUS_DIR)]
    return [c for c in cases if c.kind == "positive"]

def has_main(comp):
    return any(d.name == "main" for d in comp.program.user_defs(comp.file))

# Test ANF -----------------------------------------------------------------------------------------

class TestANF(unittest.TestCase):
    def test_idempotent(self):
        for case in positive_cases():
            comp  = compile_file(case.path, scala_compat=case.scala_compat)
            again = anf_program(comp.program)
            self.assertEqual(elab.print_program(again, comp.file),
                elab.print_program(comp.program, comp.file), case.name)

    def test_direct_and_anf_traces_agree(self):
        for case in positive_cases():
            comp = compile_file(case.path, scala_compat=case.scala_compat)
            if not has_main(comp):
                continue
            _, direct = run_program(comp.typed,   inputs=case.inputs)
            _, anf    = run_program(comp.program, inputs=case.inputs)
            self.assertEqual(direct.to_jsonl(), anf.to_jsonl(), case.name)

    def test_recheck_agrees_with_typer(self):
        for case in [load_case(p) for p in discover(CORPUS_DIR)]:
            comp = compile_file(case.path, scala_compat=case.scala_compat)
            if comp.program is None:
                continue
            self.assertEqual(recheck_program(comp.program, comp.kernel), [], case.name)

    def test_sigma_statements_unpacked(self):
        source = (
            "def main(): Unit = {\n"
            "  val f = newFileSigma(\"a.txt\")\n"
            "  openSigma(f)\n"
            "  writeSigma(f, \"Hello\")\n"
            "  closeSigma(f)\n"
            "  ()\n"
            "}\n"
        )
        comp = compile_source(source, "t.cap")
        self.assertTrue(comp.ok, comp.diagnostics)
        (typed,) = [d for d in comp.typed.user_defs("t.cap") if d.name == "main"]
        unpacks  = [n for n in elab.walk(typed.body) if isinstance(n, elab.SigmaUnpack)]
        self.assertGreaterEqual(len(unpacks), 3)
        (main,) = [d for d in comp.program.user_defs("t.cap") if d.name == "main"]
        nodes   = list(elab.walk(main.body))
        sigmas  = [n for n in nodes
            if isinstance(n, elab.Let) and re.fullmatch(r"\$sigma_\d+", n.name)]
        self.assertEqual(len(sigmas), len(unpacks))
        self.assertFalse(any(isinstance(n, elab.SigmaUnpack) for n in nodes))
        _, trace = run_program(comp.program)
        self.assertEqual(trace.guards(), [])

if __name__ == "__main__":
    unittest.main()
