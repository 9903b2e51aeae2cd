#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import json
import unittest

from pydantic import ValidationError

from capc.diagnostics import Code, Diagnostic, display_name, render, sort_diagnostics
from capc.syntax.span import SourceSpan

def diag(code, line, col=3, file="a.cap"):
    return Diagnostic(code=code, span=SourceSpan(file, line, col, line, col + 4),
        message="found using killed var f",
        related=[(SourceSpan(file, 1, 1, 1, 5), "f is killed here")],
        witness=["g", "f"])

# Test Diagnostics ---------------------------------------------------------------------------------

class TestDiagnostics(unittest.TestCase):
    def test_display_name(self):
        self.assertEqual(display_name("f$12"), "f")
        self.assertEqual(display_name("f"), "f")
        self.assertEqual(display_name("$sigma_1"), "$sigma_1")

    def test_sorted_by_file_then_position(self):
        ds = [diag(Code.E_ESCAPE, 4, file="b.cap"), diag(Code.E_ESCAPE, 9), diag(Code.E_SUBQUAL, 2)]
        self.assertEqual([(d.span.file, d.span.start_line) for d in sort_diagnostics(ds)],
            [("a.cap", 2), ("a.cap", 9), ("b.cap", 4)])

    def test_json(self):
        record = json.loads(render(diag(Code.E_KILLED_USE, 2), mode="json"))
        self.assertEqual(record, {
            "code": "E_KILLED_USE", "file": "a.cap", "startLine": 2, "startCol": 3,
            "endLine": 2, "endCol": 7, "message": "found using killed var f",
        })

    def test_human(self):
        sources = {"a.cap": "val f = x\n  write(f, 1)\n"}
        text = render(diag(Code.E_KILLED_USE, 2), sources=sources)
        lines = text.splitlines()
        self.assertEqual(lines[0], "a.cap:2:3: error[E_KILLED_USE]: found using killed var f")
        self.assertEqual(lines[1], "    2 |   write(f, 1)")
        self.assertEqual(lines[2], "      |   ^^^^^")
        self.assertEqual(lines[3], "  note: a.cap:1:1: f is killed here")
        self.assertNotIn("witness", text)

    def test_explain(self):
        text = render(diag(Code.E_KILLED_USE, 2), explain=True)
        self.assertIn("witness: g -> f", text)

    def test_frozen(self):
        d = diag(Code.E_ESCAPE, 1)
        with self.assertRaises(ValidationError):
            d.message = "changed"

if __name__ == "__main__":
    unittest.main()
