#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Bidirectional type checker.

Definitions are checked one at a time, each in a fresh TypingContext. Local names are made unique
on binding (`f`, `f$1`, ...) so qualifiers and paths never need capture-avoiding renaming. A
Σ-typed expression used where its `a` field is wanted becomes a SigmaUnpack node which binds the
`$sigma_i` names for the rest of the enclosing scope; the ANF pass makes those bindings explicit.
"""

import logging
import itertools

from dataclasses import dataclass, replace
from typing import Optional

from capc.syntax import ast
from capc.diagnostics import Code, CapError, display_name, sort_diagnostics
from capc.desugar import INFERRED
from capc.typesys.context import DefSig, Entry, TypingContext
from capc.typesys.normalize import StuckError
from capc.typesys.qualifier import EMPTY, FRESH, Qualifier
from capc.typesys.types import (
    BOOL, INT, SIGMA_SELF, STRING, UNIT, DepFun, Path, PathMember, SigmaTy, Singleton, TypeVarRef,
    dep_chain, map_type, rename_binder, show, subst_binder, SubstPathError, tuple_type,
)
from capc.typesys.unify import Mismatch, SubqualError, Unifier, is_meta_name
from capc.typer import elab
from capc.typer.generics import assign_explicit, check_solved, instantiate
from capc.typer.implicits import resolve_implicit

logger = logging.getLogger(__name__)

# Helpers ------------------------------------------------------------------------------------------

class DependencyFailed(Exception):
    """A referenced definition failed to check; its own diagnostic already reports the cause."""

@dataclass
class Group:
    args  : list
    using : bool
    span  : object

@dataclass
class Slot:
    dep      : DepFun
    kind     : str                        # explicit | implicit | unit
    arg      : object                     = None
    node     : Optional[elab.ElabNode]    = None
    deferred : bool                       = False

def flatten(e):
    """Split a curried application into head, explicit type arguments and argument groups."""
    groups = []
    while isinstance(e, ast.Apply):
        groups.append(Group(e.args, e.using, e.span))
        e = e.fn
    targs = []
    if isinstance(e, ast.TypeApply):
        targs = list(e.targs)
        e = e.fn
    groups.reverse()
    return e, targs, groups

def _is_meta(t):
    return isinstance(t, TypeVarRef) and t.is_meta

def _clean_qual(q):
    if any(is_meta_name(v) for v in q.vars):
        return Qualifier(frozenset(v for v in q.vars if not is_meta_name(v)), q.fresh)
    return q

def _clean(t):
    """Drop unsolved qualifier metas, which default to the empty qualifier."""
    def fn(s):
        q = _clean_qual(s.qual)
        if q != s.qual:
            s = s.with_qual(q)
        if isinstance(s, DepFun) and any(is_meta_name(v) for v in s.kill.vars):
            s = replace(s, kill=replace(s.kill, vars=frozenset(v for v in s.kill.vars
                if not is_meta_name(v))))
        return s
    return map_type(t, fn)

# Program Checker ----------------------------------------------------------------------------------

class Typer:
    """Checks every definition of a kernel program and collects one diagnostic per failure."""
    def __init__(self, kernel, scala_compat=False):
        self.kernel       = kernel
        self.scala_compat = scala_compat
        self.globals      = kernel.globals
        self.counter      = itertools.count()
        self.inferred     = {}
        self.elaborated   = {}
        self.failed       = set()
        self.in_progress  = set()
        self.diagnostics  = []

    def new_context(self):
        return TypingContext(self.kernel.classes, self.kernel.typefuns, self.kernel.type_aliases,
            self.globals)

    def def_type(self, sig, span):
        """The full type of a global, inferring its result type on demand."""
        if sig.result_given or sig.is_extern:
            return sig.type
        if sig.mangled not in self.inferred:
            if sig.mangled in self.in_progress:
                raise CapError(Code.E_TYPE_MISMATCH, span,
                    f"cannot infer the result type of recursive {sig.name}; annotate it")
            self.check_def(sig)
            if sig.mangled not in self.inferred:
                raise DependencyFailed(sig.mangled)
        return self.inferred[sig.mangled]

    def check_def(self, sig):
        if sig.mangled in self.elaborated or sig.mangled in self.failed:
            return
        if sig.is_extern:
            chain, _ = dep_chain(sig.type)
            self.elaborated[sig.mangled] = elab.ElabDef(sig.name, sig.mangled, sig.type, None,
                prim=sig.prim, constructor=sig.constructor, arity=len(chain), span=sig.span,
                file=sig.file)
            return
        self.in_progress.add(sig.mangled)
        try:
            checked = DefChecker(self, sig).run()
        except CapError as e:
            logger.debug("Definition %s failed: %s.", sig.mangled, e)
            self.diagnostics.append(e.diagnostic)
            self.failed.add(sig.mangled)
        except DependencyFailed:
            self.failed.add(sig.mangled)
        else:
            self.elaborated[sig.mangled] = checked
            if not sig.result_given:
                self.inferred[sig.mangled] = checked.type
        finally:
            self.in_progress.discard(sig.mangled)

    def run(self):
        for sig in self.kernel.defs:
            self.check_def(sig)
        defs = [self.elaborated[s.mangled] for s in self.kernel.defs if s.mangled in self.elaborated]
        return elab.ElabProgram(defs), sort_diagnostics(self.diagnostics)

def typecheck(kernel, scala_compat=False):
    """Check a kernel program; returns the elaborated program and the sorted diagnostics."""
    return Typer(kernel, scala_compat).run()

# Definition Checker -------------------------------------------------------------------------------

class DefChecker:
    def __init__(self, typer, sig):
        self.typer    = typer
        self.sig      = sig
        self.ctx      = typer.new_context()
        self.unifier  = Unifier(self.ctx)
        self.killed   = set()
        self.names    = [{}]
        self.sigmas   = itertools.count()

    # Scopes.

    def push(self):
        self.ctx.push()
        self.names.append({})

    def pop_to(self, depth):
        popped = self.ctx.pop_to(depth)
        del self.names[depth + 1:]
        return popped

    def declare(self, surface, type, qual=EMPTY, implicit=False, kind="let", span=None):
        unique = self.ctx.fresh(surface)
        self.names[-1][surface] = unique
        self.ctx.bind(Entry(unique, type.strip(), qual, implicit=implicit, kind=kind,
            span=span or self.sig.span))
        return unique

    def resolve_name(self, surface):
        for scope in reversed(self.names):
            if surface in scope:
                return scope[surface]
        return None

    def resolve_type(self, t, bound=frozenset()):
        """Rename the local names a source type mentions to their unique names."""
        def name(v):
            if v in bound or is_meta_name(v):
                return v
            return self.resolve_name(v) or v

        def path(p):
            return Path(name(p.root), p.fields)

        def go(t, bound):
            q = t.qual
            if q.vars:
                q = Qualifier(frozenset(name(v) if v not in bound else v for v in q.vars), q.fresh)
            if isinstance(t, PathMember):
                t = replace(t, path=path(t.path) if t.path.root not in bound else t.path,
                    args=tuple(go(a, bound) for a in t.args))
            elif isinstance(t, Singleton):
                t = replace(t, path=path(t.path) if t.path.root not in bound else t.path)
            elif isinstance(t, DepFun):
                inner = bound | {t.param}
                kill  = replace(t.kill, vars=frozenset(v if v in inner else name(v)
                    for v in t.kill.vars))
                t = replace(t, param_type=go(t.param_type, bound), result=go(t.result, inner),
                    kill=kill)
            elif isinstance(t, SigmaTy):
                t = replace(t, a_type=go(t.a_type, bound), b_type=go(t.b_type, bound | {t.binder}))
            elif hasattr(t, "args"):
                t = replace(t, args=tuple(go(a, bound) for a in t.args))
            elif hasattr(t, "head"):
                t = replace(t, head=go(t.head, bound), tail=go(t.tail, bound))
            return t.with_qual(q) if q != t.qual else t

        return go(t, frozenset(bound))

    # Errors.

    def norm(self, t, span):
        try:
            return self.unifier.norm(t)
        except StuckError as e:
            raise CapError(Code.E_TYPEFUN_STUCK, span, str(e))

    def subst(self, t, binder, qual, path, span):
        try:
            return subst_binder(t, binder, qual, path)
        except SubstPathError as e:
            raise CapError(Code.E_SUBST_PATH, span,
                f"argument for {display_name(e.binder)} is not a path but the result type selects from it")

    def unify(self, expected, actual, span, quals=False):
        try:
            self.unifier.unify(expected, actual, quals)
        except Mismatch as m:
            if m.is_path_mismatch:
                raise CapError(Code.E_PATH_MISMATCH, span,
                    f"expect {show(m.expected.strip())}, got {show(m.actual.strip())}")
            exp = self.unifier.zonk(expected).strip()
            act = self.unifier.zonk(actual).strip()
            raise CapError(Code.E_TYPE_MISMATCH, span, f"expected {show(exp)}, found {show(act)}")
        except SubqualError as e:
            raise CapError(Code.E_SUBQUAL, span,
                f"{display_name(e.name)} would escape the function type it is bound in")
        except StuckError as e:
            raise CapError(Code.E_TYPEFUN_STUCK, span, str(e))

    def try_unify(self, expected, actual):
        try:
            return self.unifier.try_unify(expected, actual)
        except (StuckError, SubstPathError):
            return False

    # Driver.

    def run(self):
        sig   = self.sig
        ktype = sig.type
        if not sig.result_given:
            n     = next(self.typer.counter)
            ktype = map_type(sig.type, lambda s: TypeVarRef(f"?R#{n}", qual=s.qual)
                if isinstance(s, TypeVarRef) and s.name == INFERRED.name else s)
        body = self.check_params(sig.body, ktype, sig.arity, sig.span)
        body = self.zonk_tree(body)
        if sig.result_given:
            ktype = sig.type
        elif sig.arity:
            ktype = _clean(self.unifier.zonk(body.type))
        else:
            ktype = _clean(self.unifier.zonk(ktype)).with_qual(body.qual)
        logger.debug("Checked %s: %s.", sig.mangled, show(ktype))
        return elab.ElabDef(sig.name, sig.mangled, ktype, body, arity=sig.arity,
            aliases=dict(self.ctx.aliases), span=sig.span, file=sig.file)

    def check_params(self, body, ktype, arity, span):
        """Check a def body under its `arity` parameters, as a chain of one-parameter lambdas."""
        if arity == 0:
            return self.check(body, ktype)
        chain, _ = dep_chain(ktype)
        lam = body
        for dep in reversed(chain[:arity]):
            lam = ast.Lambda(span, [ast.Param(span, dep.param, None)], dep.implicit, lam)
        return self.check_lambda(lam, ktype)

    def zonk_tree(self, node):
        def go(n):
            n = elab.map_children(n, go)
            n.type = _clean(self.unifier.zonk(n.type))
            n.qual = _clean_qual(self.unifier.zonk_qual(n.qual))
            if isinstance(n, elab.Lambda):
                n.param_type = _clean(self.unifier.zonk(n.param_type))
            if isinstance(n, elab.Let):
                n.entry_qual = _clean_qual(self.unifier.zonk_qual(n.entry_qual))
            return n
        return go(node)

    # Dispatch.

    def infer(self, e):
        if isinstance(e, ast.Var):
            return self.var(e, None)
        if isinstance(e, ast.Literal):
            return self.literal(e)
        if isinstance(e, (ast.Apply, ast.TypeApply)):
            return self.apply(e, None)
        if isinstance(e, ast.Block):
            return self.block(e.stmts, None, e.span)
        if isinstance(e, ast.If):
            return self.if_(e, None)
        if isinstance(e, ast.Lambda):
            return self.infer_lambda(e)
        if isinstance(e, ast.Summon):
            return self.summon(e)
        if isinstance(e, ast.TupleExpr):
            items = [self.infer(i) for i in e.items]
            qual  = EMPTY
            for i in items:
                qual = qual.union(i.qual)
            return elab.Tuple(e.span, items, type=tuple_type(i.type for i in items), qual=qual)
        if isinstance(e, ast.SigmaIntro):
            return self.sigma_intro(e, None)
        if isinstance(e, ast.Select):
            return self.select(e)
        if isinstance(e, ast.TypeAscription):
            return self.check(e.expr, self.resolve_type(e.type))
        raise CapError(Code.E_DESUGAR, e.span, f"unexpected {type(e).__name__} in expression position")

    def check(self, e, expected):
        exp = self.norm(expected, e.span)
        if isinstance(e, ast.Lambda) and isinstance(exp, DepFun):
            return self.check_lambda(e, exp)
        if isinstance(exp, DepFun) and exp.implicit and not isinstance(e, (ast.Lambda, ast.Var)):
            wrapped = ast.Lambda(e.span, [ast.Param(e.span, "$i", None)], True, e)
            return self.check_lambda(wrapped, exp)
        if isinstance(e, ast.Block):
            return self.block(e.stmts, exp, e.span)
        if isinstance(e, ast.If):
            return self.if_(e, exp)
        if isinstance(e, ast.SigmaIntro) and isinstance(exp, SigmaTy):
            return self.sigma_intro(e, exp)
        if isinstance(e, (ast.Apply, ast.TypeApply)):
            node = self.apply(e, exp)
        elif isinstance(e, ast.Var):
            node = self.var(e, exp)
        else:
            node = self.infer(e)
        return self.coerce(node, exp, e.span)

    def coerce(self, node, expected, span):
        """Make `node` fit `expected`, inserting a Σ-lift or a Σ-unpack where the shapes differ."""
        exp = self.norm(expected, span)
        act = self.norm(node.type, span)
        if isinstance(exp, SigmaTy) and not isinstance(act, SigmaTy) and not _is_meta(act):
            return self.sigma_lift(node, exp, span)
        if isinstance(act, SigmaTy) and not isinstance(exp, SigmaTy) and not _is_meta(exp):
            node = self.unpack(node, tail=True)
        self.unify(exp, node.type, span)
        return node

    def coerce_arg(self, node, ptype, span):
        pt  = self.norm(ptype, span)
        act = self.norm(node.type, span)
        if isinstance(pt, SigmaTy) and not isinstance(act, SigmaTy) and not _is_meta(act):
            return self.sigma_lift(node, pt, span)
        if isinstance(act, SigmaTy) and not isinstance(pt, SigmaTy) and not _is_meta(pt):
            node = self.unpack(node, tail=True)
        self.unify(pt, node.type.with_qual(node.qual), span, quals=True)
        return node

    def path_of(self, node):
        if isinstance(node, elab.Var) and not node.is_global:
            return self.ctx.path_of(node.name)
        if isinstance(node, elab.SigmaUnpack) and node.alias is not None:
            return self.ctx.path_of(node.alias)
        if isinstance(node, elab.Ascribe) and isinstance(node.type, Singleton):
            return node.type.path
        return None

    # Atoms.

    def literal(self, e):
        v = e.value
        if v is None:
            t = UNIT
        elif isinstance(v, bool):
            t = BOOL
        elif isinstance(v, int):
            t = INT
        else:
            t = STRING
        return elab.Literal(e.span, v, type=t)

    def var(self, e, expected):
        unique = self.resolve_name(e.name)
        if unique is not None:
            entry = self.ctx.lookup(unique)
            node  = elab.Var(e.span, unique, type=entry.type, qual=Qualifier.of(unique))
            if isinstance(entry.type, DepFun) and entry.type.by_name:
                result = entry.type.result
                return elab.Apply(e.span, node, elab.Literal(e.span, None, type=UNIT),
                    type=result.strip(), qual=result.qual)
            return node
        if e.name in self.typer.globals:
            return self.apply(e, expected)
        raise CapError(Code.E_UNBOUND, e.span, f"unbound name {e.name}")

    def summon(self, e):
        required = self.resolve_type(e.type)
        cand = resolve_implicit(required, self.ctx, self.unifier, self.killed,
            self.typer.scala_compat, e.span)
        entry  = self.ctx.lookup(cand.name)
        target = elab.Var(e.span, cand.name, type=entry.type, qual=Qualifier.of(cand.name))
        return elab.Summon(e.span, target, type=entry.type, qual=Qualifier.of(cand.name))

    def select(self, e):
        recv = self.infer(e.receiver)
        t    = self.norm(recv.type, e.span)
        if not (isinstance(t, SigmaTy) and isinstance(recv, elab.Var)):
            raise CapError(Code.E_TYPE_MISMATCH, e.span,
                f"expected a Sigma value, found {show(t.strip())}")
        if e.name == "a":
            return elab.SigmaProjA(e.span, recv, type=t.a_type.strip(), qual=t.a_type.qual)
        b = self.subst(t.b_type, t.binder, recv.qual, Path(recv.name, ("a",)), e.span)
        return elab.SigmaProjB(e.span, recv, type=b.strip(), qual=Qualifier.of(recv.name))

    # Sigma.

    def sigma_intro(self, e, expected):
        if expected is not None:
            a = self.check(e.a, expected.a_type)
            b_exp = self.subst(expected.b_type, expected.binder, a.qual, self.path_of(a), e.span)
            b = self.check(e.b, b_exp)
            return elab.SigmaIntro(e.span, a, b, type=expected.strip(), qual=a.qual)
        a    = self.infer(e.a)
        b    = self.infer(e.b)
        path = self.path_of(a)
        bt   = b.type.with_qual(b.qual)
        if path is not None:
            bt = self._abstract(bt, path)
        t = SigmaTy(SIGMA_SELF, a.type.with_qual(a.qual), bt)
        return elab.SigmaIntro(e.span, a, b, type=t, qual=a.qual)

    def _abstract(self, t, path):
        def fn(s):
            if isinstance(s, PathMember) and s.path == path:
                return replace(s, path=Path(SIGMA_SELF))
            return s
        return map_type(t, fn)

    def sigma_lift(self, node, exp, span):
        self.unify(exp.a_type, node.type, span)
        b_type = self.subst(exp.b_type, exp.binder, node.qual, self.path_of(node), span)
        b_type = self.unifier.zonk(b_type)
        cand   = resolve_implicit(b_type, self.ctx, self.unifier, self.killed,
            self.typer.scala_compat, span)
        entry  = self.ctx.lookup(cand.name)
        target = elab.Var(span, cand.name, type=entry.type, qual=Qualifier.of(cand.name))
        b      = elab.Summon(span, target, type=entry.type, qual=Qualifier.of(cand.name))
        logger.debug("Sigma-lifted a value with %s.", cand.name)
        return elab.SigmaIntro(span, node, b, type=exp.strip(), qual=node.qual)

    def unpack(self, node, alias=None, tail=False, statement=False, implicit=False):
        """Bind the fields of a Σ-typed `node` in a new scope; the node evaluates to field `a`."""
        sig   = self.norm(node.type, node.span)
        node.type = sig
        i     = next(self.sigmas)
        sname = f"$sigma_{i}"
        iname = f"$sigma_{i}_imp"
        a_path = Path(sname, ("a",))
        self.push()
        self.ctx.bind(Entry(sname, sig, EMPTY, origin="anf", span=node.span))
        b_type = self.subst(sig.b_type, sig.binder, Qualifier.of(sname), a_path, node.span)
        self.ctx.bind(Entry(iname, b_type.strip(), FRESH, implicit=True, origin="anf",
            span=node.span))
        uname = None
        if alias is not None:
            uname = self.declare(alias, sig.a_type, sig.a_type.qual, implicit=implicit,
                span=node.span)
        elif tail:
            uname = f"$sigma_{i}_a"
            self.ctx.bind(Entry(uname, sig.a_type.strip(), sig.a_type.qual, origin="anf",
                span=node.span))
        if uname is not None:
            self.ctx.add_alias(uname, a_path)
            t, q = sig.a_type.strip(), Qualifier.of(uname)
        else:
            t, q = UNIT, EMPTY
        logger.debug("Unpacked %s as %s.", show(sig), sname)
        return elab.SigmaUnpack(node.span, node, i, uname, sname, iname, statement=statement,
            type=t, qual=q)

    # Applications.

    def apply(self, e, expected):
        head, targs, groups = flatten(e)
        span = e.span
        pre  = {}
        inst = None
        if isinstance(head, ast.Var) and self.resolve_name(head.name) is None:
            sigs = self.typer.globals.get(head.name)
            if sigs is None:
                raise CapError(Code.E_UNBOUND, head.span, f"unbound name {head.name}")
            sig  = self.select_overload(sigs, groups, pre)
            name = sig.name
            sig  = replace(sig, type=self.typer.def_type(sig, head.span))
            inst = instantiate(sig, self.typer.counter)
            if targs:
                assign_explicit(inst, [self.resolve_type(t) for t in targs], self.unifier, name,
                    span)
            fn = elab.Var(head.span, sig.mangled, is_global=True, type=inst.type)
        else:
            if targs:
                raise CapError(Code.E_TYPE_MISMATCH, span, "only definitions take type arguments")
            fn   = self.infer(head)
            name = head.name if isinstance(head, ast.Var) else "function"
        return self.spine(fn, groups, expected, inst, name, span, pre)

    def _first_param(self, t):
        while isinstance(t, DepFun) and t.implicit:
            t = t.result
        return t.param_type if isinstance(t, DepFun) else None

    def select_overload(self, sigs, groups, pre):
        if len(sigs) == 1:
            return sigs[0]
        first = None
        if groups and not groups[0].using and groups[0].args:
            first = groups[0].args[0]
        if first is None or isinstance(first, (ast.Lambda, ast.Block)):
            return sigs[0]
        node = self.infer(first)
        pre[id(first)] = node
        act = node.type
        for sig in sigs:
            inst  = instantiate(sig, self.typer.counter)
            param = self._first_param(inst.type)
            if param is None:
                continue
            trial = self.unifier.copy()
            try:
                trial.unify(param, act)
            except (Mismatch, SubqualError, StuckError):
                continue
            logger.debug("Overload %s selected.", sig.mangled)
            return sig
        return sigs[0]

    def _slots(self, fn_type, groups, name, span):
        slots = []
        t     = fn_type
        for g in groups:
            t = self.norm(t, g.span)
            if g.using:
                for arg in g.args:
                    t = self.norm(t, arg.span)
                    if not (isinstance(t, DepFun) and t.implicit):
                        raise CapError(Code.E_TYPE_MISMATCH, arg.span,
                            f"{name} takes no implicit argument here")
                    slots.append(Slot(t, "explicit", arg))
                    t = t.result
                continue
            while isinstance(t, DepFun) and t.implicit:
                slots.append(Slot(t, "implicit"))
                t = self.norm(t.result, g.span)
            if not g.args:
                if not isinstance(t, DepFun):
                    raise CapError(Code.E_TYPE_MISMATCH, g.span,
                        f"{name} is applied to too many arguments")
                slots.append(Slot(t, "unit"))
                t = t.result
                continue
            for arg in g.args:
                t = self.norm(t, arg.span)
                if not isinstance(t, DepFun) or t.implicit:
                    raise CapError(Code.E_TYPE_MISMATCH, arg.span,
                        f"{name} is applied to too many arguments")
                slots.append(Slot(t, "explicit", arg))
                t = t.result
        t = self.norm(t, span)
        while isinstance(t, DepFun) and t.implicit:
            slots.append(Slot(t, "implicit"))
            t = self.norm(t.result, span)
        return slots, t

    def _substituted(self, t, bindings, span):
        for binder, (qual, path) in bindings.items():
            t = self.subst(t, binder, qual, path, span)
        return t

    def spine(self, fn, groups, expected, inst, name, span, pre):
        slots, result = self._slots(fn.type, groups, name, span)
        bindings = {}

        # Explicit arguments that can be inferred, left to right.
        for slot in slots:
            dep = slot.dep
            if slot.kind == "unit":
                self.unify(self._substituted(dep.param_type, bindings, span), UNIT, span)
                slot.node = elab.Literal(span, None, type=UNIT)
                bindings[dep.param] = (EMPTY, None)
            elif slot.kind == "explicit":
                ptype = self.norm(self._substituted(dep.param_type, bindings, slot.arg.span),
                    slot.arg.span)
                if (isinstance(slot.arg, (ast.Lambda, ast.Block)) or
                        (isinstance(ptype, DepFun) and (ptype.by_name or ptype.implicit))):
                    slot.deferred = True
                    continue
                node = pre.pop(id(slot.arg), None) or self.infer(slot.arg)
                node = self.coerce_arg(node, ptype, slot.arg.span)
                slot.node = node
                bindings[dep.param] = (self.unifier.zonk_qual(node.qual), self.path_of(node))

        # The expected type can fix type arguments the implicits and lambdas depend on.
        if expected is not None:
            exp = self.norm(expected, span)
            if not _is_meta(exp):
                try:
                    got = self.norm(self._substituted(result, bindings, span), span)
                except CapError:
                    got = None
                if got is not None:
                    if isinstance(got, SigmaTy) and not isinstance(exp, SigmaTy):
                        got = got.a_type
                    elif isinstance(exp, SigmaTy) and not isinstance(got, SigmaTy):
                        exp = exp.a_type
                    self.try_unify(exp, got)

        # Implicit arguments.
        for slot in slots:
            if slot.kind != "implicit":
                continue
            required = self.unifier.zonk(self._substituted(slot.dep.param_type, bindings, span))
            cand  = resolve_implicit(required, self.ctx, self.unifier, self.killed,
                self.typer.scala_compat, span)
            entry = self.ctx.lookup(cand.name)
            self.unify(required, entry.type.with_qual(Qualifier.of(cand.name)), span, quals=True)
            slot.node = elab.Var(span, cand.name, type=entry.type, qual=Qualifier.of(cand.name))
            bindings[slot.dep.param] = (Qualifier.of(cand.name), self.ctx.path_of(cand.name))

        # Lambdas, blocks and by-name arguments, now that their expected types are known.
        for slot in slots:
            if not slot.deferred:
                continue
            arg   = slot.arg
            ptype = self.norm(self.unifier.zonk(self._substituted(slot.dep.param_type, bindings,
                arg.span)), arg.span)
            if isinstance(ptype, DepFun) and ptype.by_name:
                node = self.check_lambda(ast.Lambda(arg.span, [], False, arg), ptype)
            else:
                node = self.check(arg, ptype)
            slot.node = node
            bindings[slot.dep.param] = (self.unifier.zonk_qual(node.qual), self.path_of(node))

        # Curried application nodes, recording the kills each argument performs.
        node = fn
        cur  = self.unifier.zonk(fn.type)
        for slot in slots:
            cur = self.norm(cur, span)
            qual, path = bindings[slot.dep.param]
            res  = self.subst(cur.result, cur.param, qual, path, span)
            res  = self.unifier.zonk(res)
            self._record_kills(cur, node, slot.node)
            node = elab.Apply(span, node, slot.node, type=res.strip(), qual=res.qual)
            cur  = res
        if inst is not None:
            check_solved(inst, self.unifier, name, span)
        return node

    def _record_kills(self, dep, fn, arg):
        kill = dep.kill
        if dep.param in kill.vars:
            self.killed |= {v for v in arg.qual.vars if not is_meta_name(v)}
        self.killed |= {v for v in kill.vars if v != dep.param and not is_meta_name(v)}
        if kill.fun:
            self.killed |= set(fn.qual.vars)
        pt = dep.param_type
        if isinstance(pt, DepFun) and pt.kill.fun:
            self.killed |= set(arg.qual.vars)

    # Lambdas.

    def infer_lambda(self, lam):
        if not lam.params:
            params = [("$u", UNIT)]
        else:
            params = []
            for p in lam.params:
                if p.type is None:
                    raise CapError(Code.E_TYPE_MISMATCH, p.span,
                        f"cannot infer the type of parameter {p.name}; annotate it")
                params.append((p.name, self.resolve_type(p.type)))
        n = next(self.typer.counter)
        t = TypeVarRef(f"?L#{n}")
        for pname, ptype in reversed(params):
            t = DepFun(pname, ptype, t, implicit=lam.implicit)
        return self.check_lambda(lam, t)

    def check_lambda(self, lam, expected):
        span = lam.span
        exp  = self.norm(expected, span)
        if _is_meta(exp):
            return self.unify_lambda(lam, exp)
        if not isinstance(exp, DepFun):
            raise CapError(Code.E_TYPE_MISMATCH, span, f"expected {show(exp.strip())}, found a function")
        if lam.implicit and not exp.implicit:
            raise CapError(Code.E_TYPE_MISMATCH, span,
                f"expected {show(exp.strip())}, found a context function")
        if lam.params:
            p       = lam.params[0]
            surface = p.name
            if p.type is not None:
                self.unify(exp.param_type, self.resolve_type(p.type), p.span)
        else:
            surface = "$u"
            self.unify(exp.param_type, UNIT, span)
        depth = self.ctx.depth
        self.push()
        unique = self.declare(surface, exp.param_type, exp.param_type.qual,
            implicit=exp.implicit, kind="param", span=lam.params[0].span if lam.params else span)
        result_exp = exp.result
        kill = exp.kill
        if unique != exp.param:
            result_exp = rename_binder(result_exp, exp.param, unique)
            kill = kill.rename({exp.param: Qualifier.of(unique)})
        saved = set(self.killed)
        if len(lam.params) > 1:
            rest = replace(lam, params=lam.params[1:])
            body = self.check_lambda(rest, result_exp)
        else:
            body = self.check(lam.body, result_exp.strip())
        popped = self.pop_to(depth)
        rq      = self.unifier.zonk_qual(result_exp.qual)
        escaped = self.escape(body.qual, popped, rq, not rq.is_empty(), span)
        self.unifier.unify_qual(rq, escaped)
        self.killed = saved
        result = self.unifier.zonk(result_exp)
        if isinstance(body, elab.Lambda):
            result = body.type.with_qual(result.qual)
        if result.qual.is_empty() or all(is_meta_name(v) for v in result.qual.vars):
            result = result.with_qual(escaped)
        free = frozenset(v for v in elab.mentioned_vars(body) if self.ctx.lookup(v) is not None)
        ftype = DepFun(unique, exp.param_type, result, implicit=exp.implicit, kill=kill,
            by_name=exp.by_name)
        return elab.Lambda(span, unique, exp.param_type, body, implicit=exp.implicit,
            by_name=exp.by_name, type=ftype, qual=Qualifier(free))

    def unify_lambda(self, lam, meta):
        node = self.infer_lambda(lam)
        self.unify(meta, node.type, lam.span)
        return node

    def escape(self, qual, popped, allowed, enforce, span):
        """
        Rewrite `qual` so it no longer names the bindings in `popped`.

        A let is replaced by what it was bound to. A fresh parameter may only leave through a fresh
        (or naming) declared result; with `enforce` anything else is an escape error, otherwise it
        is dropped.
        """
        local = {e.name: e for e in popped}
        out   = set()
        fresh = qual.fresh
        work  = sorted((v, None) for v in qual.vars)
        seen  = set()
        while work:
            v, via = work.pop(0)
            if v in seen:
                continue
            seen.add(v)
            entry = local.get(v)
            if entry is None:
                out.add(v)
                continue
            if entry.kind == "param" and not entry.qual.vars:
                if not entry.qual.fresh:
                    continue
                if allowed.fresh:
                    fresh = True
                elif v in allowed.vars:
                    out.add(v)
                elif enforce:
                    message = f"local {display_name(v)} escapes its scope"
                    if via is not None:
                        message += f" (via alias {display_name(via)})"
                    raise CapError(Code.E_ESCAPE, span, message)
                continue
            fresh = fresh or (entry.qual.fresh and (entry.kind != "param" or allowed.fresh))
            alias = via if via is not None or entry.kind == "param" else v
            work += sorted((x, alias) for x in entry.qual.vars)
        return Qualifier(frozenset(out), fresh)

    # Blocks.

    def block(self, stmts, expected, span):
        depth = self.ctx.depth
        self.push()
        out = []
        for i, s in enumerate(stmts):
            last = i == len(stmts) - 1
            if isinstance(s, (ast.ValBind, ast.ImplicitValBind)):
                out.append(self.val_bind(s))
            elif isinstance(s, ast.TupleValBind):
                raise CapError(Code.E_DESUGAR, s.span, "tuple pattern left after desugaring")
            elif isinstance(s, DefSig):
                out.append(self.local_def(s))
            elif last and expected is not None:
                out.append(self.check(s, expected))
            else:
                node = self.infer(s)
                if not last and isinstance(self.norm(node.type, s.span), SigmaTy):
                    node = self.unpack(node, statement=True)
                out.append(node)
        value = elab.block_value(out)
        if value is None and expected is not None:
            where = stmts[-1].span if stmts else span
            self.coerce(elab.Literal(where, None, type=UNIT), expected, where)
        popped = self.pop_to(depth)
        if value is None:
            return elab.Block(span, out, type=UNIT)
        qual = self.escape(value.qual, popped, EMPTY, False, span)
        return elab.Block(span, out, type=value.type, qual=qual)

    def branch(self, e, expected):
        depth = self.ctx.depth
        self.push()
        node  = self.check(e, expected) if expected is not None else self.infer(e)
        popped = self.pop_to(depth)
        node.qual = self.escape(node.qual, popped, EMPTY, False, e.span)
        return node

    def if_(self, e, expected):
        cond  = self.check(e.cond, BOOL)
        saved = set(self.killed)
        if e.else_ is None:
            then = self.branch(e.then, None)
            node = elab.If(e.span, cond, then, None, type=UNIT)
            if expected is not None:
                self.coerce(elab.Literal(e.span, None, type=UNIT), expected, e.span)
            return node
        then = self.branch(e.then, expected)
        after_then  = self.killed
        self.killed = set(saved)
        else_ = self.branch(e.else_, expected if expected is not None else then.type)
        self.killed |= after_then
        t = expected.strip() if expected is not None else then.type
        return elab.If(e.span, cond, then, else_, type=t, qual=then.qual.union(else_.qual))

    def val_bind(self, s):
        implicit = isinstance(s, ast.ImplicitValBind)
        value    = s.value
        if isinstance(value, ast.TypeAscription):
            ann = self.resolve_type(value.type)
            if isinstance(ann, Singleton):
                return self.singleton_bind(s, value, ann, implicit)
            node = self.check(value.expr, ann)
        else:
            node = self.infer(value)
            if isinstance(self.norm(node.type, s.span), SigmaTy):
                return self.unpack(node, alias=s.name, statement=True, implicit=implicit)
        unique = self.declare(s.name, node.type, node.qual, implicit=implicit, span=s.span)
        let = elab.Let(s.span, unique, node, entry_qual=node.qual, implicit=implicit)
        return elab.ImplicitLet(s.span, let) if implicit else let

    def singleton_bind(self, s, value, ann, implicit):
        node   = self.infer(value.expr)
        target = self.ctx.canonical(ann.path)
        source = self.path_of(node)
        if source is None or self.ctx.canonical(source) != target:
            raise CapError(Code.E_TYPE_MISMATCH, value.span,
                f"expected {show(ann.strip())}, found {show(node.type.strip())}")
        unique = self.declare(s.name, node.type, node.qual, implicit=implicit, span=s.span)
        self.ctx.add_alias(unique, target)
        ascribed = elab.Ascribe(value.span, node, type=Singleton(target), qual=node.qual)
        let = elab.Let(s.span, unique, ascribed, entry_qual=node.qual, implicit=implicit)
        return elab.ImplicitLet(s.span, let) if implicit else let

    def local_def(self, sig):
        ktype  = self.resolve_type(sig.type)
        unique = self.declare(sig.name, ktype, EMPTY, kind="def", span=sig.span)
        entry  = self.ctx.lookup(unique)
        node   = self.check_params(sig.body, ktype, sig.arity, sig.span)
        entry.qual = node.qual.without([unique])
        return elab.Let(sig.span, unique, node, entry_qual=entry.qual, recursive=True)
