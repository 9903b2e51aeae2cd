#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import random
import unittest

from capc.desugar import desugar
from capc.prelude import load_prelude
from capc.typesys.context import TypingContext
from capc.typesys.normalize import StuckError, normalize
from capc.typesys.types import INT, STRING, AppliedCon, Base, TypeFunApp, TypeLevelNat

# Sessions -----------------------------------------------------------------------------------------

END    = Base("End")
LEAVES = [END, AppliedCon("Var", (TypeLevelNat(0),)), AppliedCon("Var", (TypeLevelNat(1),))]
SWAP   = {"Send": "Recv", "Recv": "Send", "Branch": "Select", "Select": "Branch", "Rec": "Rec",
    "Var": "Var"}

def con(name, *args):
    return AppliedCon(name, tuple(args))

def sessions(height):
    """Every session term with at most `height` constructors above a leaf."""
    if height == 0:
        return list(LEAVES)
    smaller = sessions(height - 1)
    out = list(LEAVES)
    for p in smaller:
        out += [con("Send", INT, p), con("Recv", INT, p), con("Rec", p)]
    for l in smaller:
        for r in smaller:
            out += [con("Branch", l, r), con("Select", l, r)]
    return out

def random_session(rng, depth):
    if depth == 0:
        return rng.choice(LEAVES)
    kind = rng.choice(["Send", "Recv", "Branch", "Select", "Rec", "End"])
    if kind == "End":
        return END
    if kind in ("Send", "Recv"):
        return con(kind, INT, random_session(rng, depth - 1))
    if kind == "Rec":
        return con(kind, random_session(rng, depth - 1))
    return con(kind, random_session(rng, depth - 1), random_session(rng, depth - 1))

def dual(t):
    return TypeFunApp("Dual", (t,))

# Test Dual ----------------------------------------------------------------------------------------

class TestDual(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        kernel  = desugar(load_prelude())
        cls.ctx = TypingContext(kernel.classes, kernel.typefuns, kernel.type_aliases)

    def assert_swapped(self, p, d):
        if isinstance(p, Base):
            self.assertEqual(d, p)
            return
        self.assertEqual(d.name, SWAP[p.name])
        if p.name in ("Send", "Recv"):
            self.assertEqual(d.args[0], p.args[0])
            self.assert_swapped(p.args[1], d.args[1])
        elif p.name == "Var":
            self.assertEqual(d.args, p.args)
        else:
            for x, y in zip(p.args, d.args):
                self.assert_swapped(x, y)

    def test_send_recv(self):
        got = normalize(dual(con("Send", INT, con("Recv", STRING, END))), self.ctx)
        self.assertEqual(got, con("Recv", INT, con("Send", STRING, END)))

    def test_branch_select(self):
        got = normalize(dual(con("Branch", con("Send", INT, END), END)), self.ctx)
        self.assertEqual(got, con("Select", con("Recv", INT, END), END))

    def test_recursion_kept(self):
        session = con("Rec", con("Recv", STRING, con("Var", TypeLevelNat(0))))
        got = normalize(dual(session), self.ctx)
        self.assertEqual(got, con("Rec", con("Send", STRING, con("Var", TypeLevelNat(0)))))

    def test_involution_exhaustive(self):
        terms = sessions(2)
        self.assertEqual(len(terms), 3 + 3 * 30 + 2 * 30 * 30)
        for p in terms:
            once = normalize(dual(p), self.ctx)
            self.assert_swapped(p, once)
            self.assertEqual(normalize(dual(once), self.ctx), p)
            self.assertEqual(normalize(dual(dual(p)), self.ctx), p)

    def test_involution_deep(self):
        rng = random.Random(2025)
        for _ in range(300):
            p = random_session(rng, 4)
            self.assertEqual(normalize(dual(dual(p)), self.ctx), p)

    def test_stuck(self):
        with self.assertRaises(StuckError):
            normalize(dual(INT), self.ctx)

if __name__ == "__main__":
    unittest.main()
