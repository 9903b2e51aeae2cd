#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Kernel types: the only type language the typer, effect checker and interpreter see."""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from capc.diagnostics import SIGMA_BINDER, display_name
from capc.typesys.qualifier import EMPTY, NO_KILL, KillSet, Qualifier

# Paths --------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Path:
    """`root.f1.f2`: a variable followed by Σ field selections."""
    root   : str
    fields : Tuple[str, ...] = ()

    def extend(self, *fields):
        return Path(self.root, self.fields + tuple(fields))

    def __str__(self):
        return ".".join((display_name(self.root),) + self.fields)

# Kernel Types -------------------------------------------------------------------------------------

@dataclass(frozen=True)
class KType:
    qual: Qualifier = field(default=EMPTY, kw_only=True)

    def with_qual(self, qual):
        return replace(self, qual=qual)

    def strip(self):
        return replace(self, qual=EMPTY) if not self.qual.is_empty() else self

    def __str__(self):
        return show(self)

@dataclass(frozen=True)
class Base(KType):
    name: str

@dataclass(frozen=True)
class AppliedCon(KType):
    name : str
    args : Tuple[KType, ...]

@dataclass(frozen=True)
class TypeVarRef(KType):
    """A type parameter; names starting with `?` are unification metas."""
    name: str

    @property
    def is_meta(self):
        return self.name.startswith("?")

@dataclass(frozen=True)
class PathMember(KType):
    """`p.M[args]`: an abstract type member or nested class selected from a path."""
    path   : Path
    member : str
    args   : Tuple[KType, ...] = ()

@dataclass(frozen=True)
class Singleton(KType):
    path: Path

@dataclass(frozen=True)
class DepFun(KType):
    param      : str
    param_type : KType
    result     : KType
    implicit   : bool    = False
    kill       : KillSet = NO_KILL
    by_name    : bool    = False

@dataclass(frozen=True)
class SigmaTy(KType):
    """Σ bundle: field `a` of type `a_type`, field `b` of type `b_type` (which may mention `binder`)."""
    binder : str
    a_type : KType
    b_type : KType

@dataclass(frozen=True)
class TypeLevelList(KType):
    head : KType
    tail : KType

@dataclass(frozen=True)
class TypeLevelNat(KType):
    """`count` successors applied to `base` (None for zero)."""
    count : int
    base  : Optional[KType] = None

@dataclass(frozen=True)
class TypeFunApp(KType):
    name : str
    args : Tuple[KType, ...]

UNIT   = Base("Unit")
INT    = Base("Int")
STRING = Base("String")
BOOL   = Base("Bool")

SIGMA_SELF = SIGMA_BINDER
TUPLE      = "Tuple"
LIST_NILS  = ("TNil", "PNil", "EmptyTuple")

def tuple_type(items, qual=EMPTY):
    return AppliedCon(TUPLE, tuple(items), qual=qual)

# Traversal ----------------------------------------------------------------------------------------

def map_type(t, fn):
    """Rebuild `t` bottom-up, applying `fn` to every node after its children were mapped."""
    if isinstance(t, AppliedCon):
        t = replace(t, args=tuple(map_type(a, fn) for a in t.args))
    elif isinstance(t, TypeFunApp):
        t = replace(t, args=tuple(map_type(a, fn) for a in t.args))
    elif isinstance(t, PathMember):
        t = replace(t, args=tuple(map_type(a, fn) for a in t.args))
    elif isinstance(t, DepFun):
        t = replace(t, param_type=map_type(t.param_type, fn), result=map_type(t.result, fn))
    elif isinstance(t, SigmaTy):
        t = replace(t, a_type=map_type(t.a_type, fn), b_type=map_type(t.b_type, fn))
    elif isinstance(t, TypeLevelList):
        t = replace(t, head=map_type(t.head, fn), tail=map_type(t.tail, fn))
    elif isinstance(t, TypeLevelNat) and t.base is not None:
        t = replace(t, base=map_type(t.base, fn))
    return fn(t)

def iter_types(t):
    yield t
    if isinstance(t, (AppliedCon, TypeFunApp, PathMember)):
        for a in t.args:
            yield from iter_types(a)
    elif isinstance(t, DepFun):
        yield from iter_types(t.param_type)
        yield from iter_types(t.result)
    elif isinstance(t, SigmaTy):
        yield from iter_types(t.a_type)
        yield from iter_types(t.b_type)
    elif isinstance(t, TypeLevelList):
        yield from iter_types(t.head)
        yield from iter_types(t.tail)
    elif isinstance(t, TypeLevelNat) and t.base is not None:
        yield from iter_types(t.base)

def has_metas(t):
    for s in iter_types(t):
        if isinstance(s, TypeVarRef) and s.is_meta:
            return True
        if any(v.startswith("?") for v in s.qual.vars):
            return True
    return False

def type_metas(t):
    return {s.name for s in iter_types(t) if isinstance(s, TypeVarRef) and s.is_meta}

def dep_chain(t):
    """The DepFun spine of a curried function type, outermost first."""
    out = []
    while isinstance(t, DepFun):
        out.append(t)
        t = t.result
    return out, t

# Substitution -------------------------------------------------------------------------------------

class SubstPathError(Exception):
    """A path prefix would have to be replaced by something that is not a single path."""
    def __init__(self, binder, qual):
        self.binder = binder
        self.qual   = qual
        super().__init__(f"cannot substitute {qual or '{}'} for path prefix {binder}")

def subst_binder(t, binder, qual, path=None):
    """
    Replace `binder` by an argument: by `qual` inside qualifiers and kill sets and by `path`
    inside path prefixes. Binders of inner DepFun/SigmaTy with the same name shadow it.
    """
    captured = set(qual.vars) | ({path.root} if path is not None else set())

    def q(x):
        return x.rename({binder: qual}) if binder in x.vars else x

    def p(x):
        if x.root != binder:
            return x
        if path is None:
            raise SubstPathError(binder, qual)
        return path.extend(*x.fields)

    def go(t):
        tq = q(t.qual)
        if isinstance(t, PathMember):
            return PathMember(p(t.path), t.member, tuple(go(a) for a in t.args), qual=tq)
        if isinstance(t, Singleton):
            return Singleton(p(t.path), qual=tq)
        if isinstance(t, (AppliedCon, TypeFunApp)):
            return replace(t, args=tuple(go(a) for a in t.args), qual=tq)
        if isinstance(t, DepFun):
            if t.param == binder:
                return replace(t, param_type=go(t.param_type), qual=tq)
            if t.param in captured:
                t = _rebind(t, captured)
            kill = t.kill.rename({binder: qual}) if binder in t.kill.vars else t.kill
            return replace(t, param_type=go(t.param_type), result=go(t.result), kill=kill, qual=tq)
        if isinstance(t, SigmaTy):
            if t.binder == binder:
                return replace(t, a_type=go(t.a_type), qual=tq)
            if t.binder in captured:
                fresh = _primed(t.binder, captured)
                t = replace(t, binder=fresh, b_type=rename_binder(t.b_type, t.binder, fresh))
            return replace(t, a_type=go(t.a_type), b_type=go(t.b_type), qual=tq)
        if isinstance(t, TypeLevelList):
            return replace(t, head=go(t.head), tail=go(t.tail), qual=tq)
        if isinstance(t, TypeLevelNat) and t.base is not None:
            return replace(t, base=go(t.base), qual=tq)
        return replace(t, qual=tq) if tq is not t.qual else t

    return go(t)

def rename_binder(t, old, new):
    return subst_binder(t, old, Qualifier.of(new), Path(new))

def _primed(name, avoid):
    while name in avoid:
        name += "'"
    return name

def _rebind(t, avoid):
    """Rename the binder of DepFun `t` away from the names in `avoid`."""
    fresh = _primed(t.param, avoid)
    kill  = t.kill.rename({t.param: Qualifier.of(fresh)}) if t.param in t.kill.vars else t.kill
    return replace(t, param=fresh, result=rename_binder(t.result, t.param, fresh), kill=kill)

def subst_tvars(t, types=None, quals=None):
    """Instantiate type variables (`types`: name -> KType) and qualifier variables (`quals`)."""
    types = types or {}
    quals = quals or {}

    def q(x):
        return x.rename(quals) if quals and (x.vars & quals.keys()) else x

    def go(t):
        if isinstance(t, TypeVarRef) and t.name in types:
            target = types[t.name]
            if t.qual.is_empty():
                return target
            return target.with_qual(q(t.qual))
        if isinstance(t, DepFun):
            kill = t.kill.rename(quals) if quals and (t.kill.vars & quals.keys()) else t.kill
            return replace(t, param_type=go(t.param_type), result=go(t.result), kill=kill,
                qual=q(t.qual))
        if isinstance(t, (AppliedCon, TypeFunApp, PathMember)):
            return replace(t, args=tuple(go(a) for a in t.args), qual=q(t.qual))
        if isinstance(t, SigmaTy):
            return replace(t, a_type=go(t.a_type), b_type=go(t.b_type), qual=q(t.qual))
        if isinstance(t, TypeLevelList):
            return replace(t, head=go(t.head), tail=go(t.tail), qual=q(t.qual))
        if isinstance(t, TypeLevelNat) and t.base is not None:
            return replace(t, base=go(t.base), qual=q(t.qual))
        nq = q(t.qual)
        return replace(t, qual=nq) if nq is not t.qual else t

    return go(t)

# Display ------------------------------------------------------------------------------------------

def _show_var(name):
    if name.startswith("?"):
        return name.split("#", 1)[0]
    return display_name(name)

def _show_qual(q):
    if q.is_empty():
        return ""
    if q.is_fresh_only():
        return "^"
    names = sorted(_show_var(v) for v in q.vars) + (["^"] if q.fresh else [])
    return "^{" + ", ".join(names) + "}"

def _arrow(t):
    own = t.param in t.kill.vars
    if t.implicit:
        return "?=!>" if own else "?=>"
    return "=!>" if own else "=>"

def _show_nat(t):
    if t.base is None:
        return str(t.count)
    inner = show(t.base)
    for _ in range(t.count):
        inner = f"S[{inner}]"
    return inner

def show(t):
    """Render a kernel type in surface-like syntax."""
    if isinstance(t, Base):
        body = t.name
    elif isinstance(t, AppliedCon) and t.name == TUPLE:
        body = "(" + ", ".join(show(a) for a in t.args) + ")"
    elif isinstance(t, (AppliedCon, TypeFunApp)):
        body = t.name + "[" + ", ".join(show(a) for a in t.args) + "]"
    elif isinstance(t, TypeVarRef):
        body = _show_var(t.name)
    elif isinstance(t, PathMember):
        body = f"{t.path}.{t.member}"
        if t.args:
            body += "[" + ", ".join(show(a) for a in t.args) + "]"
    elif isinstance(t, Singleton):
        body = f"{t.path}.type"
    elif isinstance(t, DepFun):
        if t.by_name:
            body = f"=> {show(t.result)}"
        else:
            param = show(t.param_type)
            if not t.param.startswith("$"):
                param = f"({display_name(t.param)}: {param})"
            elif isinstance(t.param_type, (DepFun, SigmaTy)):
                param = f"({param})"
            body = f"{param} {_arrow(t)} {show(t.result)}"
        extra = t.kill.vars - {t.param}
        if extra or t.kill.fun:
            names = sorted(_show_var(v) for v in extra) + (["FUN"] if t.kill.fun else [])
            body += " @kill(" + ", ".join(names) + ")"
    elif isinstance(t, SigmaTy):
        body = f"{show(t.b_type)} ?<= {show(t.a_type)}"
    elif isinstance(t, TypeLevelList):
        body = f"{show(t.head)} :: {show(t.tail)}"
    elif isinstance(t, TypeLevelNat):
        body = _show_nat(t)
    else:
        raise TypeError(t)
    q = _show_qual(t.qual)
    if q and isinstance(t, (DepFun, SigmaTy, TypeLevelList)):
        body = f"({body})"
    return body + q
