#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import unittest

from capc.desugar import desugar
from capc.diagnostics import Code, CapError
from capc.prelude import load_prelude
from capc.syntax import ast
from capc.syntax.parser import parse_program

# Helpers ------------------------------------------------------------------------------------------

def kernel_of(source):
    return desugar(load_prelude() + [(parse_program(source, "t.cap"), "t.cap")])

def desugar_code(source):
    with_error = None
    try:
        kernel_of(source)
    except CapError as e:
        with_error = e.diagnostic.code
    return with_error

# Test Desugar -------------------------------------------------------------------------------------

class TestDesugar(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.prelude = desugar(load_prelude())

    def test_overloads_mangled(self):
        for mangled in ["close#OpenFile", "close#DOM", "close#Chan", "write#OpenFile", "write#File"]:
            self.assertIsNotNone(self.prelude.lookup(mangled), mangled)
        self.assertIsNone(self.prelude.lookup("close"))

    def test_unique_names_kept(self):
        self.assertIsNotNone(self.prelude.lookup("println"))
        self.assertEqual(self.prelude.lookup("println").prim, "core.println")

    def test_method_call_is_application(self):
        kernel = kernel_of("def f(t: Table): Unit = t.lock()\n")
        body   = kernel.lookup("f").body
        self.assertIsInstance(body, ast.Apply)
        self.assertIsInstance(body.fn, ast.Apply)
        self.assertEqual(body.fn.fn.name, "lock")
        self.assertEqual(body.fn.args[0].name, "t")

    def test_tuple_pattern(self):
        kernel = kernel_of("def f(): Unit = {\n  val (a, b) = (1, 2)\n  ()\n}\n")
        stmts  = kernel.lookup("f").body.stmts
        self.assertEqual([s.name for s in stmts[1:3]], ["a", "b"])
        self.assertEqual([s.value.fn.name for s in stmts[1:3]], ["_1", "_2"])

    def test_operators(self):
        body = kernel_of("def f(x: Int): Bool = x + 1 == 2\n").lookup("f").body
        self.assertEqual(body.fn.name, "eq")
        self.assertEqual(body.args[0].fn.name, "plus")

    def test_errors(self):
        cases = {
            "def f(): Unit = {\n  def g() = 1\n  ()\n}\n"               : Code.E_DESUGAR,
            "def f(): Unit = {\n  def g[T](): Int = 1\n  ()\n}\n"        : Code.E_DESUGAR,
            "def f(): Unit = {\n  val (a, b, c) = (1, 2, 3)\n  ()\n}\n" : Code.E_DESUGAR,
            "def f(x: Int): Int = x.frobnicate()\n"                      : Code.E_UNKNOWN_METHOD,
            "def h(x: Int): Int = x\ndef h(y: Int): Int = y\n"           : Code.E_DESUGAR,
        }
        for source, code in cases.items():
            self.assertEqual(desugar_code(source), code, source)

if __name__ == "__main__":
    unittest.main()
