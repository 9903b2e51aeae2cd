#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Reachability qualifiers and latent kill sets."""

from dataclasses import dataclass, field
from typing import FrozenSet

# Qualifier ----------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Qualifier:
    """A set of variable names plus the freshness marker (shown as `^`)."""
    vars  : FrozenSet[str] = field(default_factory=frozenset)
    fresh : bool           = False

    @classmethod
    def of(cls, *names, fresh=False):
        return cls(frozenset(names), fresh)

    def is_empty(self):
        return not self.vars and not self.fresh

    def is_fresh_only(self):
        return self.fresh and not self.vars

    def union(self, other):
        return Qualifier(self.vars | other.vars, self.fresh or other.fresh)

    def without(self, names):
        return Qualifier(self.vars - frozenset(names), self.fresh)

    def rename(self, mapping):
        """Replace names by qualifiers: `mapping` maps a name to a Qualifier."""
        out = Qualifier(frozenset(), self.fresh)
        for v in self.vars:
            out = out.union(mapping[v]) if v in mapping else out.union(Qualifier.of(v))
        return out

    def __str__(self):
        if self.is_empty():
            return ""
        if self.is_fresh_only():
            return "^"
        names = sorted(self.vars) + (["^"] if self.fresh else [])
        return "^{" + ", ".join(names) + "}"

EMPTY = Qualifier()
FRESH = Qualifier(frozenset(), True)

# Kill Set -----------------------------------------------------------------------------------------

FUN = "FUN"

@dataclass(frozen=True)
class KillSet:
    """Latent destructive effect of a function; `fun` is the self-reference marker."""
    vars : FrozenSet[str] = field(default_factory=frozenset)
    fun  : bool           = False

    @classmethod
    def of(cls, *names, fun=False):
        return cls(frozenset(names), fun)

    def is_empty(self):
        return not self.vars and not self.fun

    def union(self, other):
        return KillSet(self.vars | other.vars, self.fun or other.fun)

    def covers(self, other):
        return other.vars <= self.vars and (self.fun or not other.fun)

    def rename(self, mapping):
        out = set()
        for v in self.vars:
            out |= set(mapping[v].vars) if v in mapping else {v}
        return KillSet(frozenset(out), self.fun)

    def __str__(self):
        names = sorted(self.vars) + ([FUN] if self.fun else [])
        return "@kill(" + ", ".join(names) + ")"

NO_KILL = KillSet()

# Algebra ------------------------------------------------------------------------------------------

def saturate(q, lookup):
    """
    Transitive closure of `q` through the qualifiers of the bindings it names.

    `lookup(name)` returns the Qualifier a binding was introduced with, or None for names the
    context does not track (globals, names out of scope).
    """
    seen  = set()
    fresh = q.fresh
    work  = list(q.vars)
    while work:
        name = work.pop()
        if name in seen:
            continue
        seen.add(name)
        entry = lookup(name)
        if entry is None:
            continue
        fresh = fresh or entry.fresh
        work.extend(v for v in entry.vars if v not in seen)
    return Qualifier(frozenset(seen), fresh)

def subqual(q1, q2, lookup):
    """`q1` is reachable from `q2`: names covered by saturation, freshness only from freshness."""
    sat = saturate(q2, lookup)
    return q1.vars <= sat.vars and (q2.fresh or not q1.fresh)

def lookup_from(mapping):
    return mapping.get
