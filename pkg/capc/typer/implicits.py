#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import logging

from dataclasses import dataclass

from capc.diagnostics import Code, CapError, display_name
from capc.syntax.span import NO_SPAN
from capc.typesys.qualifier import Qualifier, saturate
from capc.typesys.types import show
from capc.typesys.unify import Mismatch, SubqualError

logger = logging.getLogger(__name__)

# Candidates ---------------------------------------------------------------------------------------

@dataclass
class ImplicitCandidate:
    name        : str
    type        : object
    scope_depth : int
    origin      : str

def candidates(ctx):
    return [ImplicitCandidate(e.name, e.type, e.depth, e.origin) for e in ctx.implicits()]

def is_killed(name, killed, ctx):
    """The candidate reaches a killed binding (both sides saturated)."""
    if not killed:
        return False
    mine = saturate(Qualifier.of(name), ctx.qual_of)
    dead = saturate(Qualifier(frozenset(killed)), ctx.qual_of)
    return bool(mine.vars & dead.vars)

# Resolution ---------------------------------------------------------------------------------------

def resolve_implicit(required, ctx, unifier, killed=frozenset(), scala_compat=False,
        span=NO_SPAN):
    """
    Pick the innermost in-scope candidate whose type matches `required`.

    In the default mode candidates that reach the killed set are skipped; `scala_compat` keeps
    them, so only scoping separates a revoked capability from its replacement. On success the
    unifier adopts the solutions found while matching the chosen candidate.
    """
    matches = []
    for cand in candidates(ctx):
        trial = unifier.copy()
        try:
            trial.unify(required, cand.type)
        except (Mismatch, SubqualError):
            continue
        if not scala_compat and is_killed(cand.name, killed, ctx):
            logger.debug("Skipping killed implicit %s.", cand.name)
            continue
        matches.append((cand, trial))
    wanted = show(unifier.zonk(required).strip())
    if not matches:
        raise CapError(Code.E_NO_IMPLICIT, span, f"no implicit found of type {wanted}")
    depth = max(c.scope_depth for c, _ in matches)
    best  = [(c, t) for c, t in matches if c.scope_depth == depth]
    if len(best) > 1:
        names = ", ".join(sorted(display_name(c.name) for c, _ in best))
        raise CapError(Code.E_AMBIGUOUS_IMPLICIT, span, f"ambiguous implicits of type {wanted}: {names}")
    cand, trial = best[0]
    unifier.adopt(trial)
    logger.debug("Resolved implicit %s for %s.", cand.name, wanted)
    return cand
