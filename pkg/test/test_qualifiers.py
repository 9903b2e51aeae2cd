#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import random
import unittest

from capc.typesys.qualifier import (
    EMPTY, FRESH, FUN, NO_KILL, KillSet, Qualifier, lookup_from, saturate, subqual,
)

# Helpers ------------------------------------------------------------------------------------------

def random_context(rng):
    """Up to 12 bindings, each reaching at most 3 of the earlier ones."""
    names   = [f"x{i}" for i in range(rng.randint(1, 12))]
    context = {}
    for i, name in enumerate(names):
        reach = rng.sample(names[:i], rng.randint(0, min(i, 3)))
        context[name] = Qualifier.of(*reach, fresh=rng.random() < 0.3)
    return names, context

def random_qualifier(rng, names):
    return Qualifier.of(*rng.sample(names, rng.randint(0, min(3, len(names)))), fresh=rng.random() < 0.5)

# Test Qualifiers ----------------------------------------------------------------------------------

class TestQualifiers(unittest.TestCase):
    def test_show(self):
        self.assertEqual(str(EMPTY), "")
        self.assertEqual(str(FRESH), "^")
        self.assertEqual(str(Qualifier.of("b", "a")), "^{a, b}")
        self.assertEqual(str(Qualifier.of("a", fresh=True)), "^{a, ^}")

    def test_union_without(self):
        q = Qualifier.of("a").union(Qualifier.of("b", fresh=True))
        self.assertEqual(q, Qualifier.of("a", "b", fresh=True))
        self.assertEqual(q.without(["a"]), Qualifier.of("b", fresh=True))

    def test_rename(self):
        q = Qualifier.of("x", "y")
        self.assertEqual(q.rename({"x": Qualifier.of("f", "g")}), Qualifier.of("f", "g", "y"))
        self.assertEqual(q.rename({"x": FRESH}), Qualifier.of("y", fresh=True))

    def test_saturate_chain(self):
        lookup = lookup_from({"c": Qualifier.of("b"), "b": Qualifier.of("a"), "a": FRESH})
        self.assertEqual(saturate(Qualifier.of("c"), lookup), Qualifier.of("a", "b", "c", fresh=True))

    def test_saturate_cycle(self):
        lookup = lookup_from({"a": Qualifier.of("b"), "b": Qualifier.of("a")})
        self.assertEqual(saturate(Qualifier.of("a"), lookup), Qualifier.of("a", "b"))

    def test_saturate_untracked(self):
        self.assertEqual(saturate(Qualifier.of("g"), lookup_from({})), Qualifier.of("g"))

    def test_subqual(self):
        lookup = lookup_from({"f": FRESH, "g": Qualifier.of("f")})
        self.assertTrue(subqual(Qualifier.of("f"), Qualifier.of("g"), lookup))
        self.assertFalse(subqual(Qualifier.of("g"), Qualifier.of("f"), lookup))
        self.assertTrue(subqual(EMPTY, Qualifier.of("f"), lookup))
        self.assertFalse(subqual(FRESH, Qualifier.of("f"), lookup))
        self.assertTrue(subqual(FRESH, FRESH, lookup))

    def test_saturate_properties(self):
        rng = random.Random(42)
        for _ in range(500):
            names, context = random_context(rng)
            lookup = lookup_from(context)
            q   = random_qualifier(rng, names)
            sat = saturate(q, lookup)
            # Extensive and idempotent.
            self.assertTrue(q.vars <= sat.vars)
            self.assertEqual(saturate(sat, lookup), sat)
            # Monotone.
            r = q.union(random_qualifier(rng, names))
            self.assertTrue(sat.vars <= saturate(r, lookup).vars)
            # Monotone in the context.
            wider = dict(context)
            name  = rng.choice(names)
            wider[name] = wider[name].union(random_qualifier(rng, names))
            self.assertTrue(sat.vars <= saturate(q, lookup_from(wider)).vars)

    def test_subqual_properties(self):
        rng = random.Random(7)
        for _ in range(500):
            names, context = random_context(rng)
            lookup = lookup_from(context)
            q1 = random_qualifier(rng, names)
            q2 = random_qualifier(rng, names)
            q3 = random_qualifier(rng, names)
            self.assertTrue(subqual(q1, q1, lookup))
            self.assertTrue(subqual(q1, q1.union(q2), lookup))
            if subqual(q1, q2, lookup) and subqual(q2, q3, lookup):
                self.assertTrue(subqual(q1, q3, lookup))

# Test Kill Sets -----------------------------------------------------------------------------------

class TestKillSets(unittest.TestCase):
    def test_covers(self):
        self.assertTrue(KillSet.of("a", "b").covers(KillSet.of("a")))
        self.assertFalse(KillSet.of("a").covers(KillSet.of("a", "b")))
        self.assertTrue(KillSet.of(fun=True).covers(KillSet.of(fun=True)))
        self.assertFalse(NO_KILL.covers(KillSet.of(fun=True)))

    def test_rename_and_show(self):
        k = KillSet.of("c").rename({"c": Qualifier.of("c1", "c2")})
        self.assertEqual(k, KillSet.of("c1", "c2"))
        self.assertEqual(str(KillSet.of("x", fun=True)), f"@kill(x, {FUN})")

if __name__ == "__main__":
    unittest.main()
