#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import unittest

from capc.typesys.context import TypingContext
from capc.typesys.normalize import normalize
from capc.typesys.qualifier import FRESH, KillSet, Qualifier
from capc.typesys.types import (
    INT, SIGMA_SELF, STRING, UNIT, AppliedCon, Base, DepFun, Path, PathMember, SigmaTy,
    SubstPathError, TypeLevelNat, TypeVarRef, show, subst_binder, subst_tvars, tuple_type,
)
from capc.typesys.unify import Mismatch, Unifier, type_equal

def member(root, name, *fields):
    return PathMember(Path(root, tuple(fields)), name)

# Test Display -------------------------------------------------------------------------------------

class TestShow(unittest.TestCase):
    def test_basic(self):
        self.assertEqual(show(tuple_type([INT, STRING])), "(Int, String)")
        self.assertEqual(show(Base("File", qual=FRESH)), "File^")
        self.assertEqual(show(member("f$3", "IsOpen")), "f.IsOpen")
        self.assertEqual(show(TypeLevelNat(2, TypeVarRef("N"))), "S[S[N]]")

    def test_functions(self):
        fn = DepFun("f$1", Base("OpenFile", qual=FRESH), Base("ClosedFile", qual=FRESH),
            kill=KillSet.of("f$1"))
        self.assertEqual(show(fn), "(f: OpenFile^) =!> ClosedFile^")
        implicit = DepFun("$c", member("f", "IsOpen"), STRING, implicit=True)
        self.assertEqual(show(implicit), "f.IsOpen ?=> String")

    def test_sigma(self):
        sigma = SigmaTy("a", Base("File"), PathMember(Path("a"), "IsClosed", qual=FRESH))
        self.assertEqual(show(sigma), "a.IsClosed^ ?<= File")
        reserved = SigmaTy(SIGMA_SELF, Base("File"), PathMember(Path(SIGMA_SELF), "IsClosed"))
        self.assertNotEqual(SIGMA_SELF, "a")
        self.assertEqual(show(reserved), "a.IsClosed ?<= File")

# Test Substitution --------------------------------------------------------------------------------

class TestSubstitution(unittest.TestCase):
    def test_path_prefix(self):
        t = subst_binder(member("f", "IsOpen"), "f", Qualifier.of("g"), Path("g"))
        self.assertEqual(t, member("g", "IsOpen"))

    def test_path_prefix_needs_path(self):
        with self.assertRaises(SubstPathError):
            subst_binder(member("f", "IsOpen"), "f", Qualifier.of("g"))

    def test_qualifier(self):
        t = subst_binder(Base("Fn", qual=Qualifier.of("f")), "f", Qualifier.of("g", "h"))
        self.assertEqual(t.qual, Qualifier.of("g", "h"))

    def test_shadowing(self):
        inner = DepFun("f", Base("File"), member("f", "IsOpen"))
        self.assertEqual(subst_binder(inner, "f", Qualifier.of("g"), Path("g")), inner)

    def test_capture_avoided(self):
        # Substituting g for f under a binder named g renames the binder.
        t   = DepFun("g", Base("File"), tuple_type([member("f", "IsOpen"), member("g", "IsOpen")]))
        out = subst_binder(t, "f", Qualifier.of("g"), Path("g"))
        self.assertNotEqual(out.param, "g")
        self.assertEqual(out.result.args[0], member("g", "IsOpen"))
        self.assertEqual(out.result.args[1], member(out.param, "IsOpen"))

    def test_type_variables(self):
        t = subst_tvars(AppliedCon("List", (TypeVarRef("T"),)), {"T": INT})
        self.assertEqual(t, AppliedCon("List", (INT,)))

# Test Unify ---------------------------------------------------------------------------------------

class TestUnify(unittest.TestCase):
    def setUp(self):
        self.ctx = TypingContext()

    def test_meta_solved(self):
        u = Unifier(self.ctx)
        u.unify(AppliedCon("Pair", (TypeVarRef("?A#1"), STRING)), AppliedCon("Pair", (INT, STRING)))
        self.assertEqual(u.solutions["?A#1"], INT)

    def test_mismatch(self):
        with self.assertRaises(Mismatch):
            Unifier(self.ctx).unify(INT, STRING)

    def test_path_mismatch(self):
        with self.assertRaises(Mismatch) as cm:
            Unifier(self.ctx).unify(member("f", "IsOpen"), member("g", "IsOpen"))
        self.assertTrue(cm.exception.is_path_mismatch)

    def test_type_equal_ignores_qualifiers(self):
        self.assertTrue(type_equal(Base("File", qual=FRESH), Base("File"), self.ctx))
        self.assertFalse(type_equal(UNIT, INT, self.ctx))

    def test_normalize_leaves_bound_paths(self):
        self.ctx.add_alias("f", Path("$sigma_1", ("a",)))
        self.assertEqual(normalize(member("f", "IsOpen"), self.ctx),
            member("$sigma_1", "IsOpen", "a"))
        fn = DepFun("f", Base("File"), member("f", "IsOpen"), implicit=True)
        self.assertEqual(normalize(fn, self.ctx), fn)
        sigma = SigmaTy("f", Base("File"), member("f", "IsClosed"))
        self.assertEqual(normalize(sigma, self.ctx), sigma)

if __name__ == "__main__":
    unittest.main()
