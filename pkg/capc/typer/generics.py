#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Instantiation of generic definitions and bound checking of the solved type arguments."""

from dataclasses import dataclass, field
from typing import List

from capc.diagnostics import Code, CapError
from capc.typesys.qualifier import Qualifier
from capc.typesys.types import (
    INT, LIST_NILS, AppliedCon, Base, PathMember, TypeFunApp, TypeLevelList, TypeLevelNat,
    TypeVarRef, show, subst_tvars,
)

# Instantiation ------------------------------------------------------------------------------------

@dataclass
class Instance:
    """A def's type with every type parameter replaced by a meta (`?T#n`, `?q#n`)."""
    type   : object
    metas  : List[tuple] = field(default_factory=list)   # (TParam, meta name)
    qmetas : List[str]   = field(default_factory=list)
    bounds : List[tuple] = field(default_factory=list)   # (TParam, meta name, bound)

def instantiate(sig, counter):
    """instantiate_generics, first half: fresh metas for the type and qualifier parameters."""
    n     = next(counter)
    types = {tp.name: TypeVarRef(f"?{tp.name}#{n}") for tp in sig.tparams}
    quals = {tp.qual: Qualifier.of(f"?{tp.qual}#{n}") for tp in sig.tparams if tp.qual}
    inst  = Instance(subst_tvars(sig.type, types, quals))
    for tp in sig.tparams:
        meta = types[tp.name].name
        inst.metas.append((tp, meta))
        if tp.bound is not None:
            inst.bounds.append((tp, meta, subst_tvars(tp.bound, types, quals)))
    inst.qmetas = [next(iter(q.vars)) for q in quals.values()]
    return inst

def assign_explicit(inst, targs, unifier, name, span):
    if len(targs) > len(inst.metas):
        raise CapError(Code.E_TYPE_MISMATCH, span,
            f"{name} takes {len(inst.metas)} type arguments, found {len(targs)}")
    for (tp, meta), t in zip(inst.metas, targs):
        unifier.solutions[meta] = t.strip()
        if tp.qual and not t.qual.is_empty():
            unifier.solutions[f"?{tp.qual}#{meta.rsplit('#', 1)[1]}"] = t.qual

# Bounds -------------------------------------------------------------------------------------------

def is_list_bound(bound, ctx):
    """`bound` is a type-level list family: one of the list terminators extends it."""
    return any(ctx.is_subclass(nil, bound.name) for nil in LIST_NILS)

def conforms(t, bound, ctx):
    """Upper-bound check for a solved type argument."""
    if isinstance(bound, TypeVarRef) or isinstance(t, (TypeVarRef, PathMember, TypeFunApp)):
        return True
    if bound == INT or (isinstance(bound, Base) and bound.name == "Int"):
        return isinstance(t, TypeLevelNat) or t == INT
    if not isinstance(bound, (Base, AppliedCon)):
        return True
    if isinstance(t, TypeLevelList):
        return is_list_bound(bound, ctx) and conforms(t.tail, bound, ctx)
    if isinstance(t, (Base, AppliedCon)):
        return ctx.is_subclass(t.name, bound.name)
    return False

def check_solved(inst, unifier, name, span):
    """instantiate_generics, second half: every type parameter solved and within its bound."""
    for tp, meta in inst.metas:
        solved = unifier.zonk(TypeVarRef(meta))
        if isinstance(solved, TypeVarRef) and solved.is_meta:
            raise CapError(Code.E_UNRESOLVED_TYPEPARAM, span,
                f"cannot infer type parameter {tp.name} of {name}")
    for tp, meta, bound in inst.bounds:
        solved = unifier.norm(TypeVarRef(meta))
        bound  = unifier.norm(bound)
        if not conforms(solved, bound, unifier.ctx):
            raise CapError(Code.E_BOUND, span,
                f"type argument {show(solved)} of {name} does not conform to {tp.name} <: {show(bound)}")
    for q in inst.qmetas:
        unifier.solutions.setdefault(q, Qualifier())
