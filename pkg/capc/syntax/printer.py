#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Pretty printer for surface programs.

The output parses back to a tree that prints identically, so printing is a fixpoint after one
round trip. Type slots may also hold kernel types (after desugaring); those print through `show`.
"""

import json

from capc.syntax import ast
from capc.typesys.context import DefSig
from capc.typesys.types import KType, show

INDENT = "    "

# Types --------------------------------------------------------------------------------------------

def _wrap(t, *kinds):
    text = print_type(t)
    return f"({text})" if isinstance(t, kinds) else text

def _targs(args):
    return "[" + ", ".join(print_type(a) for a in args) + "]" if args else ""

def print_type(t):
    if isinstance(t, KType):
        return show(t)
    if isinstance(t, ast.Named):
        return t.name
    if isinstance(t, ast.AppliedCon):
        return t.name + _targs(t.args)
    if isinstance(t, ast.PathMember):
        return ".".join(t.path + [t.member]) + _targs(t.args)
    if isinstance(t, ast.Singleton):
        return ".".join(t.path) + ".type"
    if isinstance(t, ast.Qualified):
        inner = _wrap(t.inner, ast.Arrow, ast.SigmaArrow, ast.KillAnnot, ast.ConsType, ast.Qualified,
            ast.ByName)
        if t.kind is ast.QualKind.FRESH:
            return inner + "^"
        if t.kind is ast.QualKind.VAR:
            return f"{inner}^{t.names[0]}"
        return inner + "^{" + ", ".join(t.names) + "}"
    if isinstance(t, ast.Arrow):
        if t.binders:
            head = "(" + ", ".join(f"{n}: {print_type(b)}" for n, b in t.binders) + ")"
        elif t.param is None:
            head = "()"
        else:
            head = _wrap(t.param, ast.Arrow, ast.ByName)
        return f"{head} {t.kind.value} {print_type(t.result)}"
    if isinstance(t, ast.SigmaArrow):
        return (f"{_wrap(t.b, ast.Arrow, ast.SigmaArrow, ast.ByName)} ?<= "
            f"{_wrap(t.a, ast.Arrow, ast.SigmaArrow, ast.ByName)}")
    if isinstance(t, ast.KillAnnot):
        inner = _wrap(t.inner, ast.Arrow, ast.SigmaArrow, ast.KillAnnot, ast.ByName)
        return f"{inner} @kill({', '.join(t.names)})"
    if isinstance(t, ast.ConsType):
        head = _wrap(t.head, ast.Arrow, ast.SigmaArrow, ast.KillAnnot, ast.ConsType, ast.ByName)
        return f"{head} :: {_wrap(t.tail, ast.Arrow, ast.SigmaArrow, ast.KillAnnot, ast.ByName)}"
    if isinstance(t, ast.Refinement):
        members = "; ".join(f"type {n} = {print_type(m)}" for n, m in t.members)
        return f"{t.name} {{ {members} }}"
    if isinstance(t, ast.TupleType):
        return "(" + ", ".join(print_type(i) for i in t.items) + ")"
    if isinstance(t, ast.NatLit):
        return str(t.value)
    if isinstance(t, ast.Projection):
        return f"{_wrap(t.owner, ast.Arrow, ast.SigmaArrow, ast.KillAnnot, ast.ConsType)}#{t.member}"
    if isinstance(t, ast.ByName):
        return f"=> {print_type(t.inner)}"
    raise TypeError(f"cannot print type {t!r}")

# Declarations -------------------------------------------------------------------------------------

def _tparams(tparams):
    if not tparams:
        return ""
    out = []
    for tp in tparams:
        text = tp.name + (f"^{tp.qual}" if tp.qual else "")
        if tp.bound is not None:
            text += f" <: {print_type(tp.bound)}"
        out.append(text)
    return "[" + ", ".join(out) + "]"

def _param(p):
    return f"{p.name}: {print_type(p.type)}" if p.type is not None else p.name

def _params(plists):
    out = ""
    for pl in plists:
        using = "using " if pl.using else ""
        out  += "(" + using + ", ".join(_param(p) for p in pl.params) + ")"
    return out

def _class(c, level):
    pad  = INDENT * level
    head = f"{pad}{'extern ' if c.extern else ''}class {c.name}{_tparams(c.tparams)}"
    if c.parent:
        head += f" extends {c.parent}"
    if not (c.members or c.nested):
        return head
    lines = [head + " {"]
    for m in c.members:
        lines.append(f"{pad}{INDENT}type {m.name}{_tparams(m.tparams)}")
    for n in c.nested:
        lines.append(_class(n, level + 1))
    lines.append(pad + "}")
    return "\n".join(lines)

def _def(d, level):
    pad  = INDENT * level
    head = f"def {d.name}{_tparams(d.tparams)}{_params(d.params)}"
    if isinstance(d, ast.ExternDefDecl):
        return f"{pad}extern {head}: {print_type(d.result)} = {json.dumps(d.prim)}"
    head = pad + head
    if d.result is not None:
        head += f": {print_type(d.result)}"
    return f"{head} = {print_expr(d.body, level)}"

def print_decl(d, level=0):
    if isinstance(d, ast.ClassDecl):
        return _class(d, level)
    if isinstance(d, ast.TypeAliasDecl):
        return f"type {d.name} = {print_type(d.target)}"
    if isinstance(d, ast.TypeFunDecl):
        lines = [f"typefun {d.name}{_tparams(d.tparams)} = match {d.scrutinee} {{"]
        for case in d.cases:
            pattern = case.con + ("[" + ", ".join(case.vars) + "]" if case.vars else "")
            lines.append(f"{INDENT}case {pattern} => {print_type(case.result)}")
        lines.append("}")
        return "\n".join(lines)
    if isinstance(d, (ast.DefDecl, ast.ExternDefDecl)):
        return _def(d, level)
    if isinstance(d, ast.ExtensionDecl):
        lines = [f"extension ({_param(d.receiver)}) {{"]
        lines += [_def(x, level + 1) for x in d.defs]
        lines.append("}")
        return "\n".join(lines)
    raise TypeError(f"cannot print declaration {d!r}")

def print_program(program):
    return "\n\n".join(print_decl(d) for d in program.decls) + "\n"

# Expressions --------------------------------------------------------------------------------------

# Nodes that need parentheses in receiver, callee or operand position.
_COMPOUND = (ast.BinOp, ast.If, ast.Lambda)

def _atom(e, level):
    text = print_expr(e, level)
    return f"({text})" if isinstance(e, _COMPOUND) else text

def _literal(value):
    if value is None:
        return "()"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)

def _lambda_head(lam):
    params = lam.params
    if not params:
        head = "()"
    elif len(params) == 1 and params[0].type is None:
        head = params[0].name
    else:
        head = "(" + ", ".join(_param(p) for p in params) + ")"
    return f"{head} {'?=>' if lam.implicit else '=>'}"

def _stmts(stmts, level):
    pad = INDENT * level
    return "\n".join(pad + print_stmt(s, level) for s in stmts)

def _braced(stmts, level, head=""):
    if not stmts:
        return "{ " + head + " }" if head else "{}"
    opener = "{ " + head if head else "{"
    return opener + "\n" + _stmts(stmts, level + 1) + "\n" + INDENT * level + "}"

def _lambda(lam, level):
    heads = [_lambda_head(lam)]
    body  = lam.body
    while isinstance(body, ast.Lambda):
        heads.append(_lambda_head(body))
        body = body.body
    stmts = body.stmts if isinstance(body, ast.Block) else [body]
    return _braced(stmts, level, " ".join(heads))

def _args(args, using, level):
    return "(" + ("using " if using else "") + ", ".join(print_expr(a, level) for a in args) + ")"

def print_expr(e, level=0):
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.Literal):
        return _literal(e.value)
    if isinstance(e, ast.Block):
        return _braced(e.stmts, level)
    if isinstance(e, ast.Lambda):
        return _lambda(e, level)
    if isinstance(e, ast.If):
        out = f"if ({print_expr(e.cond, level)}) {print_expr(e.then, level)}"
        if e.else_ is not None:
            out += f" else {print_expr(e.else_, level)}"
        return out
    if isinstance(e, ast.Apply):
        fn = _atom(e.fn, level)
        if e.block:
            return f"{fn} {print_expr(e.args[0], level)}"
        return fn + _args(e.args, e.using, level)
    if isinstance(e, ast.MethodCall):
        head = f"{_atom(e.receiver, level)}.{e.name}{_targs(e.targs)}"
        if e.block:
            return f"{head} {print_expr(e.args[0], level)}"
        return head + _args(e.args, e.using, level)
    if isinstance(e, ast.TypeApply):
        return _atom(e.fn, level) + _targs(e.targs)
    if isinstance(e, ast.Select):
        return f"{_atom(e.receiver, level)}.{e.name}"
    if isinstance(e, ast.Summon):
        return f"summon[{print_type(e.type)}]"
    if isinstance(e, ast.TupleExpr):
        return "(" + ", ".join(print_expr(i, level) for i in e.items) + ")"
    if isinstance(e, ast.SigmaIntro):
        return f"new Sigma {{ val a = {print_expr(e.a, level)}; val b = {print_expr(e.b, level)} }}"
    if isinstance(e, ast.BinOp):
        lhs = _atom(e.lhs, level)
        rhs = _atom(e.rhs, level)
        return f"{lhs} {e.op} {rhs}"
    if isinstance(e, ast.TypeAscription):
        # Ascriptions only exist as `val x: T = e`; print_stmt handles that form.
        return print_expr(e.expr, level)
    raise TypeError(f"cannot print expression {e!r}")

def print_stmt(s, level=0):
    if isinstance(s, (ast.ValBind, ast.ImplicitValBind)):
        keyword = "implicit val" if isinstance(s, ast.ImplicitValBind) else "val"
        value   = s.value
        if isinstance(value, ast.TypeAscription):
            return f"{keyword} {s.name}: {print_type(value.type)} = {print_expr(value.expr, level)}"
        return f"{keyword} {s.name} = {print_expr(value, level)}"
    if isinstance(s, ast.TupleValBind):
        return f"val ({', '.join(s.names)}) = {print_expr(s.value, level)}"
    if isinstance(s, ast.DefDecl):
        return _def(s, level).lstrip()
    if isinstance(s, DefSig):
        # Nested definition after desugaring.
        return f"def {s.name}: {show(s.type)} = {print_expr(s.body, level)}"
    return print_expr(s, level)
