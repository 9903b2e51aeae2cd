#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Destructive-effect checker.

Runs over the elaborated program after ANF. Each definition is walked in evaluation order with
an accumulated set of killed names; every mention of a local must be transitively disjoint from
that set, and every application adds the latent kills of the function it applies.
"""

import logging

from dataclasses import dataclass, field
from typing import Dict, FrozenSet

from capc.diagnostics import Code, CapError, display_name, sort_diagnostics
from capc.syntax.span import SourceSpan
from capc.typesys.qualifier import FRESH, KillSet, Qualifier, saturate
from capc.typesys.types import DepFun, SigmaTy, TypeVarRef, dep_chain, show
from capc.typer import elab

logger = logging.getLogger(__name__)

# Kill State ---------------------------------------------------------------------------------------

@dataclass(frozen=True)
class KillState:
    """The killed names so far, with the span of the step that killed each one."""
    killed : FrozenSet[str]              = frozenset()
    where  : Dict[str, SourceSpan]       = field(default_factory=dict, compare=False)

    def add(self, names, span):
        names = frozenset(names) - self.killed
        if not names:
            return self
        where = dict(self.where)
        for n in names:
            where[n] = span
        return KillState(self.killed | names, where)

def _trail(start, goal, lookup):
    """Names from `start` to `goal` following binding qualifiers (breadth first)."""
    prev = {start: None}
    todo = [start]
    while todo:
        name = todo.pop(0)
        if name == goal:
            out = []
            while name is not None:
                out.append(name)
                name = prev[name]
            return out[::-1]
        q = lookup(name)
        for v in sorted(q.vars) if q is not None else []:
            if v not in prev:
                prev[v] = name
                todo.append(v)
    return [start, goal]

def check_use(name, lookup, ks, span):
    """Raise E_KILLED_USE when `name` reaches a killed name (both sides saturated)."""
    if not ks.killed:
        return
    mine = saturate(Qualifier.of(name), lookup).vars
    if not mine & saturate(Qualifier(ks.killed), lookup).vars:
        return
    for root in sorted(ks.killed, key=lambda k: (k not in mine, k)):
        overlap = mine & saturate(Qualifier.of(root), lookup).vars
        if overlap:
            break
    meet    = sorted(overlap)[0]
    witness = _trail(name, meet, lookup) + _trail(root, meet, lookup)[::-1][1:]
    related = [(ks.where[root], f"{display_name(root)} is killed here")] if root in ks.where else []
    raise CapError(Code.E_KILLED_USE, span, f"found using killed var {display_name(root)}",
        related=related, witness=[display_name(w) for w in witness])

def seq_effects(ks, uses, kills, lookup, span):
    """One evaluation step: its uses must be live, then its kills are added."""
    for name in sorted(uses.vars):
        check_use(name, lookup, ks, span)
    return ks.add(kills.vars, span)

def apply_latent_kill(fn_type, fn_qual, arg_qual):
    """The names killed by applying a function of type `fn_type` (a DepFun) to one argument."""
    kill  = fn_type.kill
    names = set(v for v in kill.vars if v != fn_type.param)
    if fn_type.param in kill.vars:
        names |= arg_qual.vars
    if kill.fun:
        names |= fn_qual.vars
    ptype = fn_type.param_type
    if isinstance(ptype, DepFun) and ptype.kill.fun:
        names |= arg_qual.vars
    return KillSet(frozenset(names))

def join_branches(then, else_):
    where = dict(else_.where)
    where.update(then.where)
    return KillState(then.killed | else_.killed, where)

# Checker ------------------------------------------------------------------------------------------

class EffectChecker:
    def __init__(self):
        self.diagnostics = []

    def check_program(self, program, files=None):
        for d in program.defs:
            if files is not None and d.file not in files:
                continue
            try:
                self.check_def(d)
            except CapError as e:
                logger.debug("Effects of %s failed: %s.", d.mangled, e)
                self.diagnostics.append(e.diagnostic)
        return sort_diagnostics(self.diagnostics)

    def check_def(self, d):
        self.check_signature(d)
        if d.body is None:
            return
        self.quals = {}
        self.ks    = KillState()
        self.visit(d.body)
        logger.debug("Effects of %s: killed %s.", d.mangled, sorted(self.ks.killed))

    def check_signature(self, d):
        chain, _ = dep_chain(d.type)
        for dep in chain:
            ptype = dep.param_type
            if (dep.param in dep.kill.vars and isinstance(ptype, TypeVarRef) and
                    ptype.qual.is_empty()):
                raise CapError(Code.E_KILL_UNDECLARED, d.span,
                    f"{display_name(dep.param)} of generic type {show(ptype)} cannot be killed "
                    "without a qualifier parameter")

    def lookup(self, name):
        return self.quals.get(name)

    def bind(self, name, qual):
        self.quals[name] = qual

    def use(self, name, span):
        check_use(name, self.lookup, self.ks, span)

    # Nodes.

    def visit(self, node):
        method = getattr(self, "visit_" + type(node).__name__)
        method(node)

    def visit_Var(self, node):
        if not node.is_global:
            self.use(node.name, node.span)

    def visit_Literal(self, node):
        pass

    def visit_Apply(self, node):
        self.visit(node.fn)
        self.visit(node.arg)
        fn_type = node.fn.type
        if not isinstance(fn_type, DepFun):
            return
        kills = apply_latent_kill(fn_type, node.fn.qual, node.arg.qual)
        if kills.vars:
            logger.debug("Kill %s at %s.", sorted(kills.vars), node.span)
        self.ks = self.ks.add(kills.vars, node.span)

    def visit_Let(self, node):
        if node.recursive:
            self.bind(node.name, node.entry_qual)
        self.visit(node.value)
        self.bind(node.name, node.entry_qual)

    def visit_ImplicitLet(self, node):
        self.visit(node.let)

    def visit_Block(self, node):
        for s in node.stmts:
            self.visit(s)

    def visit_If(self, node):
        self.visit(node.cond)
        before = self.ks
        self.visit(node.then)
        after_then = self.ks
        self.ks = before
        if node.else_ is not None:
            self.visit(node.else_)
        self.ks = join_branches(after_then, self.ks)

    def visit_Lambda(self, node):
        before = self.ks
        outer  = set(self.quals)
        self.bind(node.param, node.param_type.qual)
        self.visit(node.body)
        declared = node.type.kill if isinstance(node.type, DepFun) else KillSet()
        for name in sorted(self.ks.killed - before.killed):
            if name == node.param:
                covered = name in declared.vars
            elif name in outer:
                covered = name in declared.vars or declared.fun
            else:
                # A body local killed through an alias kills what it reaches outside the body.
                reach   = saturate(Qualifier.of(name), self.lookup).vars
                escaped = reach & outer
                covered = ((node.param not in reach or node.param in declared.vars) and
                    (not escaped or declared.fun or escaped <= declared.vars))
            if not covered:
                raise CapError(Code.E_KILL_UNDECLARED, self.ks.where.get(name, node.span),
                    f"function kills {display_name(name)} but its type does not declare it"
                    f" (expected {show(node.type)})")
        self.ks = before

    def visit_Summon(self, node):
        self.visit(node.target)

    def visit_SigmaIntro(self, node):
        self.visit(node.a)
        self.visit(node.b)

    def visit_SigmaProjA(self, node):
        self.visit(node.sigma)

    def visit_SigmaProjB(self, node):
        self.visit(node.sigma)

    def visit_Ascribe(self, node):
        self.visit(node.expr)

    def visit_Tuple(self, node):
        for item in node.items:
            self.visit(item)

    def visit_SigmaUnpack(self, node):
        self.visit(node.expr)
        self.bind(node.sigma_name, node.expr.qual)
        self.bind(node.imp_name, FRESH)
        if node.alias is not None:
            a_type = node.expr.type.a_type if isinstance(node.expr.type, SigmaTy) else node.type
            self.bind(node.alias, a_type.qual)

def effect_check(program, files=None):
    """Diagnostics for every definition of `program` (only those of `files` when given)."""
    return EffectChecker().check_program(program, files)
