#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Canonical forms: aliases expanded, paths resolved, type functions reduced."""

from dataclasses import replace

from capc.typesys.types import (
    AppliedCon, Base, DepFun, Path, PathMember, SigmaTy, Singleton, TypeFunApp, TypeLevelList,
    TypeLevelNat, TypeVarRef, show, subst_binder, subst_tvars,
)

# Errors -------------------------------------------------------------------------------------------

class StuckError(Exception):
    """A type-function application over a concrete type that no case matches."""
    def __init__(self, app):
        self.app = app
        super().__init__(f"type function {app.name} has no case for {show(app.args[0])}")

# Normalize ----------------------------------------------------------------------------------------

def _pending(arg):
    return isinstance(arg, (TypeVarRef, PathMember, TypeFunApp, Singleton))

def reduce_typefun(app, ctx, bound=frozenset()):
    fun = ctx.typefuns[app.name]
    arg = app.args[0]
    if _pending(arg):
        return app
    con  = arg.name if isinstance(arg, (Base, AppliedCon)) else None
    case = fun.cases.get(con)
    if case is None:
        raise StuckError(app)
    con_args = arg.args if isinstance(arg, AppliedCon) else ()
    if len(con_args) != len(case.vars):
        raise StuckError(app)
    mapping = dict(zip(case.vars, con_args))
    for tp, a in zip(fun.tparams[1:], app.args[1:]):
        mapping[tp.name] = a
    result = normalize(subst_tvars(case.result, mapping), ctx, bound)
    return result.with_qual(app.qual) if not app.qual.is_empty() else result

def _canonical(path, ctx, bound):
    return path if path.root in bound else ctx.canonical(path)

def normalize(t, ctx, bound=frozenset()):
    """
    Return the canonical form of `t`; raises StuckError on a type function with no case.

    Aliases of the enclosing scope are not applied to paths rooted at a DepFun parameter or Σ
    binder, whether bound inside `t` or listed in `bound`.
    """
    if isinstance(t, Base):
        target = ctx.type_aliases.get(t.name)
        if target is None:
            return t
        target = normalize(target, ctx, bound)
        return target.with_qual(t.qual) if not t.qual.is_empty() else target
    if isinstance(t, AppliedCon):
        args = tuple(normalize(a, ctx, bound) for a in t.args)
        if t.name in ctx.typefuns:
            return reduce_typefun(TypeFunApp(t.name, args, qual=t.qual), ctx, bound)
        return replace(t, args=args)
    if isinstance(t, TypeFunApp):
        args = tuple(normalize(a, ctx, bound) for a in t.args)
        return reduce_typefun(replace(t, args=args), ctx, bound)
    if isinstance(t, PathMember):
        return replace(t, path=_canonical(t.path, ctx, bound),
            args=tuple(normalize(a, ctx, bound) for a in t.args))
    if isinstance(t, Singleton):
        return replace(t, path=_canonical(t.path, ctx, bound))
    if isinstance(t, DepFun):
        return replace(t, param_type=normalize(t.param_type, ctx, bound),
            result=normalize(t.result, ctx, bound | {t.param}))
    if isinstance(t, SigmaTy):
        return replace(t, a_type=normalize(t.a_type, ctx, bound),
            b_type=normalize(t.b_type, ctx, bound | {t.binder}))
    if isinstance(t, TypeLevelList):
        return replace(t, head=normalize(t.head, ctx, bound), tail=normalize(t.tail, ctx, bound))
    if isinstance(t, TypeLevelNat):
        if t.base is None:
            return t
        base = normalize(t.base, ctx, bound)
        if isinstance(base, TypeLevelNat):
            return TypeLevelNat(t.count + base.count, base.base, qual=t.qual)
        if t.count == 0:
            return base
        return replace(t, base=base)
    return t

def path_type(path, ctx):
    """Type of the value a path denotes, or None when its root is not in scope."""
    entry = ctx.lookup(path.root)
    if entry is None:
        return None
    t      = normalize(entry.type, ctx)
    prefix = Path(path.root)
    for name in path.fields:
        if not isinstance(t, SigmaTy) or name not in ("a", "b"):
            return None
        if name == "a":
            t = t.a_type
        else:
            t = subst_binder(t.b_type, t.binder, entry.qual, prefix.extend("a"))
        prefix = prefix.extend(name)
    return t
