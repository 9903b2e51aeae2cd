#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Independent re-check of the types recorded in an elaborated program."""

from capc.typesys.context import TypingContext
from capc.typesys.normalize import StuckError, normalize
from capc.typesys.types import BOOL, DepFun, Path, SubstPathError, show, subst_binder
from capc.typesys.unify import type_equal
from capc.typer import elab

# Recheck ------------------------------------------------------------------------------------------

def _path(node, ctx):
    if isinstance(node, elab.Var) and not node.is_global:
        return ctx.canonical(Path(node.name))
    if isinstance(node, elab.Ascribe):
        return node.type.path
    return None

def recheck_def(d, kernel):
    """Problems found in one definition, as readable strings (empty when consistent)."""
    if d.body is None:
        return []
    ctx = TypingContext(kernel.classes, kernel.typefuns, kernel.type_aliases)
    ctx.aliases = dict(d.aliases)
    problems = []
    for node in elab.walk(d.body):
        where = f"{d.mangled} at {node.span}"
        try:
            if isinstance(node, elab.Apply):
                fn = normalize(node.fn.type, ctx)
                if not isinstance(fn, DepFun):
                    problems.append(f"{where}: applied node has type {show(fn)}")
                    continue
                want = subst_binder(fn.result, fn.param, node.arg.qual, _path(node.arg, ctx))
                if not type_equal(want, node.type, ctx):
                    problems.append(f"{where}: recorded {show(node.type)}, recomputed {show(want)}")
            elif isinstance(node, elab.Lambda):
                if not isinstance(normalize(node.type, ctx), DepFun):
                    problems.append(f"{where}: lambda has type {show(node.type)}")
            elif isinstance(node, elab.If):
                if not type_equal(BOOL, node.cond.type, ctx):
                    problems.append(f"{where}: condition has type {show(node.cond.type)}")
        except (StuckError, SubstPathError) as e:
            problems.append(f"{where}: {e}")
    return problems

def recheck_program(program, kernel):
    out = []
    for d in program.defs:
        out += recheck_def(d, kernel)
    return out
