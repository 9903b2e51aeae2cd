#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import itertools
import random
import unittest

from capc.diagnostics import Code, CapError
from capc.interp import run_program
from capc.pipeline import compile_source
from capc.syntax.span import NO_SPAN
from capc.typer.implicits import resolve_implicit
from capc.typesys.context import Entry, TypingContext
from capc.typesys.qualifier import FRESH
from capc.typesys.types import Path, PathMember
from capc.typesys.unify import Unifier

# Helpers ------------------------------------------------------------------------------------------

def program(stmts):
    lines = ["def main(): Unit = {"] + [f"  {s}" for s in stmts] + ["  ()", "}", ""]
    return "\n".join(lines)

def codes(source, **kwargs):
    comp = compile_source(source, "t.cap", **kwargs)
    return [(d.code, d.span.start_line) for d in comp.diagnostics]

# Test Implicits -----------------------------------------------------------------------------------

class TestImplicits(unittest.TestCase):
    def test_independent_of_declaration_order(self):
        opens  = ['implicit val cf = openImp(f)', 'implicit val cg = openImp(g)']
        writes = ['writeImp(f, "F")', 'writeImp(g, "G")']
        for o, w in itertools.product(itertools.permutations(opens), itertools.permutations(writes)):
            stmts = ['val f = newFileSigma("f.txt")', 'val g = newFileSigma("g.txt")']
            stmts += list(o) + list(w) + ["closeImp(f)", "closeImp(g)"]
            source = program(stmts)
            comp   = compile_source(source, "t.cap")
            self.assertTrue(comp.ok, (source, comp.diagnostics))
            _, trace = run_program(comp.program)
            self.assertEqual(trace.guards(), [])

    def test_killed_candidates_skipped(self):
        stmts = [
            'val f = newFileSigma("a.txt")',
            'implicit val c1 = openImp(f)',
            'implicit val c2 = closeImp(f)',
            'implicit val c3 = openImp(f)',
            'writeImp(f, "Hello")',
            'closeImp(f)',
        ]
        self.assertEqual(codes(program(stmts)), [])

    def test_killed_candidates_in_compat_mode(self):
        stmts = [
            'val f = newFileSigma("a.txt")',
            'implicit val c1 = openImp(f)',
            'implicit val c2 = closeImp(f)',
            'implicit val c3 = openImp(f)',
        ]
        # Line 5 is the second openImp: two candidates for f.IsClosed.
        self.assertEqual(codes(program(stmts), scala_compat=True), [(Code.E_AMBIGUOUS_IMPLICIT, 5)])

    def test_block_scoped_in_compat_mode(self):
        stmts = [
            'val f = newFileSigma("a.txt")',
            'implicit val c1 = openImp(f)',
            'writeImp(f, "Hello")',
            '{',
            '  implicit val c2 = closeImp(f)',
            '  implicit val c3 = openImp(f)',
            '  println(readImp(f))',
            '  closeImp(f)',
            '}',
        ]
        self.assertEqual(codes(program(stmts), scala_compat=True), [])
        self.assertEqual(codes(program(stmts)), [])

    def test_double_close(self):
        stmts = [
            'val f = newFileSigma("a.txt")',
            'implicit val c = openImp(f)',
            'closeImp(f)',
            'closeImp(f)',
        ]
        self.assertEqual(codes(program(stmts)), [(Code.E_NO_IMPLICIT, 5)])
        self.assertEqual(codes(program(stmts), scala_compat=True), [(Code.E_KILLED_USE, 5)])

    def test_nothing_to_summon(self):
        stmts = [
            'val f = newFileSigma("a.txt")',
            'writeImp(f, "Hello")',
        ]
        self.assertEqual(codes(program(stmts)), [(Code.E_NO_IMPLICIT, 3)])

# Test Resolution ----------------------------------------------------------------------------------

def random_scopes(rng):
    """Up to 3 nested scopes of implicit capabilities over the paths f and g."""
    scopes, n = [], 0
    for _ in range(rng.randint(1, 3)):
        scope = []
        for _ in range(rng.randint(0, 3)):
            scope.append((f"c{n}", rng.choice(["f", "g"])))
            n += 1
        scopes.append(scope)
    names  = [name for scope in scopes for name, _ in scope]
    killed = frozenset(rng.sample(names, rng.randint(0, len(names))))
    return scopes, killed

def build_context(scopes):
    ctx = TypingContext()
    for i, scope in enumerate(scopes):
        if i:
            ctx.push()
        for name, root in scope:
            ctx.bind(Entry(name, PathMember(Path(root), "IsOpen"), qual=FRESH, implicit=True))
    return ctx

def outcome(scopes, killed, scala_compat):
    ctx = build_context(scopes)
    try:
        cand = resolve_implicit(PathMember(Path("f"), "IsOpen"), ctx, Unifier(ctx), killed=killed,
            scala_compat=scala_compat)
    except CapError as e:
        return e.diagnostic.code
    return cand.name

def expected_outcome(scopes, killed, scala_compat):
    live = [(depth, name) for depth, scope in enumerate(scopes) for name, root in scope
        if root == "f" and (scala_compat or name not in killed)]
    if not live:
        return Code.E_NO_IMPLICIT
    innermost = max(depth for depth, _ in live)
    best      = [name for depth, name in live if depth == innermost]
    return best[0] if len(best) == 1 else Code.E_AMBIGUOUS_IMPLICIT

class TestResolution(unittest.TestCase):
    def test_permutation_invariant(self):
        rng = random.Random(11)
        for _ in range(200):
            scopes, killed = random_scopes(rng)
            for scala_compat in (False, True):
                want = expected_outcome(scopes, killed, scala_compat)
                self.assertEqual(outcome(scopes, killed, scala_compat), want, (scopes, killed))
                shuffled = [rng.sample(scope, len(scope)) for scope in scopes]
                self.assertEqual(outcome(shuffled, killed, scala_compat), want, (shuffled, killed))

    def test_failure_without_span(self):
        ctx = build_context([[("c0", "g")]])
        with self.assertRaises(CapError) as cm:
            resolve_implicit(PathMember(Path("f"), "IsOpen"), ctx, Unifier(ctx))
        self.assertEqual(cm.exception.diagnostic.code, Code.E_NO_IMPLICIT)
        self.assertEqual(cm.exception.diagnostic.span, NO_SPAN)

if __name__ == "__main__":
    unittest.main()
