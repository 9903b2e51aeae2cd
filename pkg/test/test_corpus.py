#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import os
import shutil
import tempfile
import unittest

from capc.corpus import ExpectError, discover, load_case, parse_expect, run_corpus
from capc.diagnostics import Code

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "..", "corpus")

# Codes every negative case together must exercise.
COVERED_CODES = {
    Code.E_KILLED_USE,
    Code.E_KILL_UNDECLARED,
    Code.E_NO_IMPLICIT,
    Code.E_AMBIGUOUS_IMPLICIT,
    Code.E_ESCAPE,
    Code.E_SUBQUAL,
    Code.E_PATH_MISMATCH,
    Code.E_TYPE_MISMATCH,
}

# Test Expect Files --------------------------------------------------------------------------------

class TestExpect(unittest.TestCase):
    def test_positive(self):
        fields = parse_expect("x.expect", "flags: --scala-compat\ninput hello\nok\noutput hello\noutput \n")
        self.assertEqual(fields["kind"], "positive")
        self.assertEqual(fields["flags"], ["--scala-compat"])
        self.assertEqual(fields["inputs"], ["hello"])
        self.assertEqual(fields["outputs"], ["hello", ""])

    def test_negative(self):
        fields = parse_expect("x.expect", "E_ESCAPE 10\nE_ESCAPE 15\n")
        self.assertEqual(fields["kind"], "negative")
        self.assertEqual(fields["expected"], [("E_ESCAPE", 10), ("E_ESCAPE", 15)])

    def test_rejected(self):
        for text in ["", "flags: --fast\nok\n", "output x\n", "ok\nE_PARSE 1\n", "E_PARSE one\n"]:
            with self.assertRaises(ExpectError, msg=text):
                parse_expect("x.expect", text)

# Test Corpus --------------------------------------------------------------------------------------

class TestCorpus(unittest.TestCase):
    def test_corpus_passes(self):
        report = run_corpus(CORPUS_DIR)
        self.assertTrue(report.passed, "\n".join(report.lines(color=False)))

    def test_codes_covered(self):
        seen = set()
        for path in discover(CORPUS_DIR):
            seen |= {Code(code) for code, _ in load_case(path).expected}
        self.assertEqual(COVERED_CODES - seen, set())

    def test_positive_and_negative_cases(self):
        kinds = [load_case(p).kind for p in discover(CORPUS_DIR)]
        self.assertGreaterEqual(kinds.count("positive"), 10)
        self.assertGreaterEqual(kinds.count("negative"), 12)

    def test_failure_reported(self):
        tmp = tempfile.mkdtemp()
        try:
            shutil.copy(os.path.join(CORPUS_DIR, "file_ok.cap"), tmp)
            with open(os.path.join(tmp, "file_ok.expect"), "w", encoding="utf-8") as f:
                f.write("ok\noutput Goodbye\n")
            report = run_corpus(tmp)
            self.assertFalse(report.passed)
            lines = report.lines(color=False)
            self.assertIn("[FAIL]", lines[-1])
        finally:
            shutil.rmtree(tmp)

    def test_empty_directory_fails(self):
        tmp = tempfile.mkdtemp()
        try:
            self.assertFalse(run_corpus(tmp).passed)
        finally:
            shutil.rmtree(tmp)

if __name__ == "__main__":
    unittest.main()
