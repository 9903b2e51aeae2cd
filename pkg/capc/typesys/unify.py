#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""First-order unification over kernel types, with type and qualifier metas."""

import logging

from dataclasses import replace

from capc.typesys.normalize import normalize, path_type
from capc.typesys.qualifier import KillSet, Qualifier
from capc.typesys.types import (
    AppliedCon, Base, DepFun, PathMember, SigmaTy, Singleton, TypeFunApp, TypeLevelList,
    TypeLevelNat, TypeVarRef, map_type, rename_binder, type_metas,
)

logger = logging.getLogger(__name__)

# Errors -------------------------------------------------------------------------------------------

class Mismatch(Exception):
    """The innermost pair of types that failed to unify (expected first)."""
    def __init__(self, expected, actual):
        self.expected = expected
        self.actual   = actual
        super().__init__(f"{expected} vs {actual}")

    @property
    def is_path_mismatch(self):
        e, a = self.expected, self.actual
        return (isinstance(e, PathMember) and isinstance(a, PathMember) and
            e.member == a.member and e.path != a.path)

class SubqualError(Exception):
    """A qualifier meta would capture a binder that is only in scope inside a function type."""
    def __init__(self, name):
        self.name = name
        super().__init__(name)

def is_meta_name(name):
    return name.startswith("?")

# Unifier ------------------------------------------------------------------------------------------

class Unifier:
    """Holds the solutions of type metas (`?T#n` -> KType) and qualifier metas (-> Qualifier)."""
    def __init__(self, ctx, solutions=None):
        self.ctx       = ctx
        self.solutions = solutions if solutions is not None else {}

    def copy(self):
        return Unifier(self.ctx, dict(self.solutions))

    def adopt(self, other):
        self.solutions = other.solutions

    # Zonk.

    def zonk_qual(self, q):
        if not any(is_meta_name(v) for v in q.vars):
            return q
        out = Qualifier(frozenset(), q.fresh)
        for v in q.vars:
            sol = self.solutions.get(v)
            if isinstance(sol, Qualifier):
                out = out.union(self.zonk_qual(sol))
            else:
                out = out.union(Qualifier.of(v))
        return out

    def zonk(self, t):
        def fn(s):
            if isinstance(s, TypeVarRef) and s.is_meta:
                sol = self.solutions.get(s.name)
                if sol is not None:
                    target = self.zonk(sol)
                    return target.with_qual(self.zonk_qual(s.qual)) if not s.qual.is_empty() else target
            q = self.zonk_qual(s.qual)
            if q is not s.qual:
                s = s.with_qual(q)
            if isinstance(s, DepFun) and any(is_meta_name(v) for v in s.kill.vars):
                s = replace(s, kill=KillSet(self.zonk_qual(Qualifier(s.kill.vars)).vars, s.kill.fun))
            return s
        return map_type(t, fn)

    def norm(self, t):
        return normalize(self.zonk(t), self.ctx)

    def unsolved(self, t):
        return {m for m in type_metas(self.zonk(t))}

    # Unify.

    def unify(self, expected, actual, quals=False):
        """Unify in place; raises Mismatch or SubqualError."""
        self._unify(self.norm(expected), self.norm(actual), quals, frozenset())

    def try_unify(self, expected, actual, quals=False):
        """Unify on a copy and adopt the solutions only on success."""
        trial = self.copy()
        try:
            trial.unify(expected, actual, quals)
        except (Mismatch, SubqualError):
            return False
        self.adopt(trial)
        return True

    def unify_qual(self, expected, actual):
        """Solve a lone qualifier meta on either side; concrete qualifiers are left to subqual."""
        self._unify_qual(self.zonk_qual(expected), self.zonk_qual(actual), frozenset())

    def _bind(self, name, t, expected, actual):
        if name in type_metas(t):
            raise Mismatch(expected, actual)
        self.solutions[name] = t.strip()

    def _bind_qual(self, meta, q, bound):
        captured = sorted(q.vars & bound)
        if captured:
            raise SubqualError(captured[0])
        self.solutions[meta] = q

    def _single_meta(self, q):
        if q.fresh or len(q.vars) != 1:
            return None
        (v,) = q.vars
        return v if is_meta_name(v) and v not in self.solutions else None

    def _unify_qual(self, eq, aq, bound):
        m = self._single_meta(eq)
        if m is not None:
            self._bind_qual(m, aq, bound)
            return
        m = self._single_meta(aq)
        if m is not None:
            self._bind_qual(m, eq, bound)

    def _sub(self, e, a, quals, bound):
        self._unify(self.norm(e), self.norm(a), quals, bound)

    def _unify(self, e, a, quals, bound):
        if quals:
            self._unify_qual(self.zonk_qual(e.qual), self.zonk_qual(a.qual), bound)
        if isinstance(e, TypeVarRef) and e.is_meta:
            if not (isinstance(a, TypeVarRef) and a.name == e.name):
                self._bind(e.name, a, e, a)
            return
        if isinstance(a, TypeVarRef) and a.is_meta:
            self._bind(a.name, e, e, a)
            return
        if isinstance(e, Base) and isinstance(a, Base):
            if e.name != a.name:
                raise Mismatch(e, a)
            return
        if isinstance(e, Base) and isinstance(a, PathMember) and "#" in e.name:
            if not self._projects(e.name, a):
                raise Mismatch(e, a)
            return
        if isinstance(a, Base) and isinstance(e, PathMember) and "#" in a.name:
            if not self._projects(a.name, e):
                raise Mismatch(e, a)
            return
        if type(e) is not type(a):
            raise Mismatch(e, a)
        if isinstance(e, (AppliedCon, TypeFunApp)):
            if e.name != a.name or len(e.args) != len(a.args):
                raise Mismatch(e, a)
            for x, y in zip(e.args, a.args):
                self._sub(x, y, quals, bound)
        elif isinstance(e, TypeVarRef):
            if e.name != a.name:
                raise Mismatch(e, a)
        elif isinstance(e, PathMember):
            if e.member != a.member or e.path != a.path or len(e.args) != len(a.args):
                raise Mismatch(e, a)
            for x, y in zip(e.args, a.args):
                self._sub(x, y, quals, bound)
        elif isinstance(e, Singleton):
            if e.path != a.path:
                raise Mismatch(e, a)
        elif isinstance(e, DepFun):
            if e.implicit != a.implicit or e.by_name != a.by_name:
                raise Mismatch(e, a)
            self._sub(e.param_type, a.param_type, quals, bound)
            result = a.result if a.param == e.param else rename_binder(a.result, a.param, e.param)
            self._sub(e.result, result, quals, bound | {e.param})
        elif isinstance(e, SigmaTy):
            self._sub(e.a_type, a.a_type, quals, bound)
            b = a.b_type if a.binder == e.binder else rename_binder(a.b_type, a.binder, e.binder)
            self._sub(e.b_type, b, quals, bound)
        elif isinstance(e, TypeLevelList):
            self._sub(e.head, a.head, quals, bound)
            self._sub(e.tail, a.tail, quals, bound)
        elif isinstance(e, TypeLevelNat):
            self._unify_nat(e, a, quals, bound)
        else:
            raise Mismatch(e, a)

    def _unify_nat(self, e, a, quals, bound):
        k = min(e.count, a.count)
        if k == 0:
            if e.count == a.count == 0 and e.base is None and a.base is None:
                return
            if e.base is not None and e.count == 0:
                self._sub(e.base, a, quals, bound)
                return
            if a.base is not None and a.count == 0:
                self._sub(e, a.base, quals, bound)
                return
            raise Mismatch(e, a)
        self._sub(_peel(e, k), _peel(a, k), quals, bound)

    def _projects(self, projection, member):
        """`p.C` conforms to `Owner#C` when `p` is an instance of `Owner`."""
        owner, _, name = projection.partition("#")
        if member.member != name:
            return False
        ptype = path_type(member.path, self.ctx)
        return isinstance(ptype, Base) and self.ctx.is_subclass(ptype.name, owner)

def _peel(n, k):
    count = n.count - k
    if count == 0:
        return n.base if n.base is not None else TypeLevelNat(0)
    return TypeLevelNat(count, n.base)

# Equality -----------------------------------------------------------------------------------------

def type_equal(t1, t2, ctx):
    """Structural equality of canonical forms, qualifiers ignored."""
    try:
        Unifier(ctx).unify(t1, t2)
    except (Mismatch, SubqualError):
        return False
    return True
