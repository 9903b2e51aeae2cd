#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Σ-guided A-normal form.

Every SigmaUnpack left by the typer becomes an explicit binding of the Σ value to `$sigma_i`,
followed by a nested block that starts with `implicit val $sigma_i_imp = $sigma_i.b` (and the
`a` alias when the statement bound a name). Subexpressions evaluated before the Σ expression
are bound to `$tN` temporaries first, so effects keep their source order.
"""

import logging
import itertools

from dataclasses import replace

from capc.typesys.qualifier import FRESH, Qualifier
from capc.typesys.types import UNIT, Path, SigmaTy, subst_binder
from capc.typer import elab

logger = logging.getLogger(__name__)

# Extraction ---------------------------------------------------------------------------------------

def _trivial(node):
    return isinstance(node, (elab.Var, elab.Literal, elab.Lambda))

class _Extractor:
    def __init__(self, temps):
        self.temps = temps

    def hoist(self, node, prefix):
        """Bind an already-evaluated operand to a temporary, keeping its evaluation first."""
        if _trivial(node):
            return node
        name = f"$t{next(self.temps)}"
        prefix.append(elab.Let(node.span, name, node, entry_qual=node.qual, origin="anf"))
        return elab.Var(node.span, name, type=node.type, qual=Qualifier.of(name))

    def hoist_spine(self, node, prefix):
        if isinstance(node, elab.Apply):
            fn = self.hoist_spine(node.fn, prefix)
            return replace(node, fn=fn, arg=self.hoist(node.arg, prefix))
        return self.hoist(node, prefix)

    def extract(self, node):
        """First SigmaUnpack in evaluation order: (prefix, unpack, node with the unpack replaced)."""
        if isinstance(node, elab.SigmaUnpack):
            inner = self.extract(node.expr)
            if inner is not None:
                prefix, found, expr = inner
                return prefix, found, replace(node, expr=expr)
            if node.alias is not None:
                value = elab.Var(node.span, node.alias, type=node.type, qual=node.qual)
            else:
                value = elab.Literal(node.span, None, type=UNIT)
            return [], node, value
        if isinstance(node, elab.Apply):
            inner = self.extract(node.fn)
            if inner is not None:
                prefix, found, fn = inner
                return prefix, found, replace(node, fn=fn)
            inner = self.extract(node.arg)
            if inner is None:
                return None
            prefix, found, arg = inner
            before = []
            fn = self.hoist_spine(node.fn, before)
            return before + prefix, found, replace(node, fn=fn, arg=arg)
        if isinstance(node, elab.Let):
            inner = self.extract(node.value)
            if inner is not None:
                prefix, found, value = inner
                return prefix, found, replace(node, value=value)
            return None
        if isinstance(node, elab.ImplicitLet):
            inner = self.extract(node.let)
            if inner is not None:
                prefix, found, let = inner
                return prefix, found, replace(node, let=let)
            return None
        if isinstance(node, elab.If):
            inner = self.extract(node.cond)
            if inner is not None:
                prefix, found, cond = inner
                return prefix, found, replace(node, cond=cond)
            return None
        if isinstance(node, elab.Ascribe):
            inner = self.extract(node.expr)
            if inner is not None:
                prefix, found, expr = inner
                return prefix, found, replace(node, expr=expr)
            return None
        if isinstance(node, (elab.Tuple, elab.SigmaIntro)):
            items = node.items if isinstance(node, elab.Tuple) else [node.a, node.b]
            for i, item in enumerate(items):
                inner = self.extract(item)
                if inner is None:
                    continue
                prefix, found, new = inner
                before = []
                done   = [self.hoist(x, before) for x in items[:i]]
                items  = done + [new] + items[i + 1:]
                if isinstance(node, elab.Tuple):
                    return before + prefix, found, replace(node, items=items)
                return before + prefix, found, replace(node, a=items[0], b=items[1])
        return None

# Transform ----------------------------------------------------------------------------------------

class ANFTransform:
    def __init__(self):
        self.temps = itertools.count()

    def bindings(self, unpack):
        """The statements that take a Σ value apart."""
        span  = unpack.span
        sigma = unpack.expr.type
        assert isinstance(sigma, SigmaTy), sigma
        ref    = elab.Var(span, unpack.sigma_name, type=sigma, qual=Qualifier.of(unpack.sigma_name))
        b_type = subst_binder(sigma.b_type, sigma.binder, Qualifier.of(unpack.sigma_name),
            Path(unpack.sigma_name, ("a",)))
        proj_b = elab.SigmaProjB(span, ref, type=b_type.strip(), qual=Qualifier.of(unpack.sigma_name))
        out = [elab.ImplicitLet(span, elab.Let(span, unpack.imp_name, proj_b, entry_qual=FRESH,
            implicit=True, origin="anf"))]
        if unpack.alias is not None:
            a_type = sigma.a_type
            proj_a = elab.SigmaProjA(span, ref, type=a_type.strip(), qual=a_type.qual)
            out.append(elab.Let(span, unpack.alias, proj_a, entry_qual=a_type.qual, origin="anf"))
        return out

    def stmts(self, stmts):
        out  = []
        work = list(stmts)
        while work:
            s = work.pop(0)
            found = _Extractor(self.temps).extract(s)
            if found is None:
                out.append(s)
                continue
            prefix, unpack, rest = found
            logger.debug("Lifting %s.", unpack.sigma_name)
            sigma = elab.Let(unpack.span, unpack.sigma_name, unpack.expr,
                entry_qual=unpack.expr.qual, origin="anf")
            inner = self.bindings(unpack)
            if not (s is unpack and unpack.statement):
                inner.append(rest)
            inner = self.stmts(inner + work)
            value = elab.block_value(inner)
            block = elab.Block(unpack.span, inner,
                type=value.type if value is not None else UNIT,
                qual=value.qual if value is not None else Qualifier())
            # The prefix and the Σ binding may hold further unpacks.
            out += self.stmts(prefix + [sigma])
            out.append(block)
            break
        return out

    def expr(self, node):
        node = elab.map_children(node, self.expr)
        if isinstance(node, elab.Block):
            return replace(node, stmts=self.stmts(node.stmts))
        if isinstance(node, elab.Lambda):
            return replace(node, body=self.wrap(node.body))
        if isinstance(node, elab.If):
            return replace(node, then=self.wrap(node.then),
                else_=self.wrap(node.else_) if node.else_ is not None else None)
        return node

    def wrap(self, node):
        """A body that still holds an unpack outside any block gets a block of its own."""
        if isinstance(node, elab.Block) or _Extractor(itertools.count()).extract(node) is None:
            return node
        return elab.Block(node.span, self.stmts([node]), type=node.type, qual=node.qual)

def anf_def(d):
    if d.body is None:
        return d
    t = ANFTransform()
    return replace(d, body=t.wrap(t.expr(d.body)))

def anf_program(program):
    """Apply the transform to every definition; idempotent."""
    return elab.ElabProgram([anf_def(d) for d in program.defs])
