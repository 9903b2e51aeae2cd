#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Definitional interpreter for elaborated programs.

Evaluation is written as generators so that a task can be suspended in the middle of a primitive
(a `recv` on an empty channel) and resumed later by the scheduler. Both the ANF form and the
direct form (SigmaUnpack evaluated in place) are accepted; they produce the same trace.
"""

import random
import inspect
import logging
import itertools

from collections import deque

from capc.diagnostics import RuntimeFault
from capc.interp.prims import PRIMS
from capc.interp.scheduler import DEFAULT_STEP_LIMIT, Scheduler
from capc.interp.values import Closure, Instance, Partial, SigmaVal, Trace
from capc.typer import elab

logger = logging.getLogger(__name__)

SIGMA_PREFIX = "$sigma_"

# Interpreter --------------------------------------------------------------------------------------

class Interpreter:
    """
    Runs one program; not reusable across runs.

    Parameters:
    - program (ElabProgram) : Checked program (ANF or direct form).
    - inputs (list)         : Lines returned by successive `readLine()` calls.
    - seed (int)            : Seed of `randomInt`.
    - step_limit (int)      : Evaluation steps before the run is aborted with R_DEADLOCK.
    """
    def __init__(self, program, inputs=(), seed=0, step_limit=DEFAULT_STEP_LIMIT):
        self.defs      = {d.mangled: d for d in program.defs}
        self.trace     = Trace()
        self.scheduler = Scheduler(self.trace, step_limit)
        self.inputs    = deque(inputs)
        self.random    = random.Random(seed)
        self.files     = {}
        self.ids       = itertools.count(1)

    # Runtime services for primitives.

    def new_id(self):
        return next(self.ids)

    def emit(self, event, resource=None, detail=""):
        self.trace.append(event, self.scheduler.task_id, resource, detail)

    def call(self, fn, *args):
        """Apply `fn` to `args` one at a time (a generator)."""
        for a in args:
            fn = yield from self.apply(fn, a)
        return fn

    # Entry.

    def run(self, entry="main"):
        """Run `entry` and every task it spawns; returns (exit value, trace)."""
        d = self.defs.get(entry)
        if d is None:
            raise RuntimeFault("R_UNBOUND", f"no definition named {entry}")
        value = self.scheduler.run(self.main(d))
        logger.debug("Run finished after %d steps, %d events.", self.scheduler.steps, len(self.trace))
        return value, self.trace

    def main(self, d):
        value = yield from self.global_value(d)
        if d.arity > 0:
            value = yield from self.apply(value, None)
        return value

    # Evaluation.

    def global_value(self, d):
        if d.prim is not None or d.constructor is not None:
            if d.arity == 0:
                return (yield from self.invoke(d, ()))
            return Partial(d)
        value = yield from self.eval(d.body, {})
        return value

    def bind(self, env, name, value):
        assert not isinstance(value, SigmaVal) or name.startswith(SIGMA_PREFIX), \
            f"Σ value bound to {name}"
        env[name] = value

    def eval(self, node, env):
        self.scheduler.tick()
        value = getattr(self, "eval_" + type(node).__name__)(node, env)
        if inspect.isgenerator(value):
            value = yield from value
        return value

    def eval_Var(self, node, env):
        if node.is_global:
            d = self.defs.get(node.name)
            if d is None:
                raise RuntimeFault("R_UNBOUND", f"unbound global {node.name}")
            return (yield from self.global_value(d))
        if node.name not in env:
            raise RuntimeFault("R_UNBOUND", f"unbound variable {node.name}")
        return env[node.name]

    def eval_Literal(self, node, env):
        return node.value

    def eval_Lambda(self, node, env):
        return Closure(node.param, node.body, env, node.by_name)

    def eval_Apply(self, node, env):
        fn  = yield from self.eval(node.fn, env)
        arg = yield from self.eval(node.arg, env)
        return (yield from self.apply(fn, arg))

    def eval_Let(self, node, env):
        value = yield from self.eval(node.value, env)
        self.bind(env, node.name, value)

    def eval_ImplicitLet(self, node, env):
        yield from self.eval(node.let, env)

    def eval_Block(self, node, env):
        inner = dict(env)
        value = None
        for s in node.stmts:
            value = yield from self.eval(s, inner)
        return value if elab.block_value(node.stmts) is not None else None

    def eval_If(self, node, env):
        cond = yield from self.eval(node.cond, env)
        if cond:
            return (yield from self.eval(node.then, env))
        if node.else_ is not None:
            return (yield from self.eval(node.else_, env))
        return None

    def eval_Summon(self, node, env):
        return (yield from self.eval(node.target, env))

    def eval_SigmaIntro(self, node, env):
        a = yield from self.eval(node.a, env)
        b = yield from self.eval(node.b, env)
        return SigmaVal(a, b)

    def eval_SigmaProjA(self, node, env):
        sigma = yield from self.eval(node.sigma, env)
        assert isinstance(sigma, SigmaVal), sigma
        return sigma.a

    def eval_SigmaProjB(self, node, env):
        sigma = yield from self.eval(node.sigma, env)
        assert isinstance(sigma, SigmaVal), sigma
        return sigma.b

    def eval_Ascribe(self, node, env):
        return (yield from self.eval(node.expr, env))

    def eval_Tuple(self, node, env):
        items = []
        for item in node.items:
            items.append((yield from self.eval(item, env)))
        return tuple(items)

    def eval_SigmaUnpack(self, node, env):
        sigma = yield from self.eval(node.expr, env)
        assert isinstance(sigma, SigmaVal), sigma
        self.bind(env, node.sigma_name, sigma)
        self.bind(env, node.imp_name, sigma.b)
        if node.alias is None:
            return None
        self.bind(env, node.alias, sigma.a)
        return sigma.a

    # Application.

    def apply(self, fn, arg):
        if isinstance(fn, Closure):
            env = dict(fn.env)
            env[fn.param] = arg
            return (yield from self.eval(fn.body, env))
        if isinstance(fn, Partial):
            args = fn.args + (arg,)
            if len(args) < fn.defn.arity:
                return Partial(fn.defn, args)
            return (yield from self.invoke(fn.defn, args))
        raise RuntimeFault("R_UNBOUND", f"cannot apply a non-function value {fn!r}")

    def invoke(self, d, args):
        if d.constructor is not None:
            return Instance(d.constructor)
        handler = PRIMS.get(d.prim)
        if handler is None:
            raise RuntimeFault("R_UNBOUND", f"no primitive {d.prim}")
        result = handler(self, *args)
        if inspect.isgenerator(result):
            result = yield from result
        return result

def run_program(program, inputs=(), seed=0, step_limit=DEFAULT_STEP_LIMIT, entry="main"):
    """Interpret `program` from `entry`; returns (exit value, trace)."""
    return Interpreter(program, inputs, seed, step_limit).run(entry)
