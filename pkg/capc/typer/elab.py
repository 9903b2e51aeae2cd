#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Elaborated AST.

Every node records its kernel type (without the top-level qualifier) and its qualifier. Apply
nodes are curried: `fn.type` is always the DepFun being applied, with the binders of earlier
arguments already substituted.
"""

from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional

from capc.diagnostics import display_name
from capc.syntax.span import NO_SPAN, SourceSpan
from capc.typesys.qualifier import EMPTY, Qualifier
from capc.typesys.types import UNIT, KType, show

# Nodes --------------------------------------------------------------------------------------------

@dataclass
class ElabNode:
    span : SourceSpan
    type : KType     = field(default=UNIT,  kw_only=True)
    qual : Qualifier = field(default=EMPTY, kw_only=True)

@dataclass
class Var(ElabNode):
    name      : str
    is_global : bool = False

@dataclass
class Literal(ElabNode):
    value: object

@dataclass
class Lambda(ElabNode):
    param      : str
    param_type : KType
    body       : ElabNode
    implicit   : bool = False
    by_name    : bool = False

@dataclass
class Apply(ElabNode):
    fn  : ElabNode
    arg : ElabNode

@dataclass
class Let(ElabNode):
    """`val name = value`; `recursive` marks a nested def whose value may refer to itself."""
    name       : str
    value      : ElabNode
    entry_qual : Qualifier = EMPTY
    implicit   : bool      = False
    origin     : str       = "user"
    recursive  : bool      = False

@dataclass
class ImplicitLet(ElabNode):
    let: Let

@dataclass
class Block(ElabNode):
    stmts: List[ElabNode]

@dataclass
class If(ElabNode):
    cond  : ElabNode
    then  : ElabNode
    else_ : Optional[ElabNode]

@dataclass
class Summon(ElabNode):
    target: Var

@dataclass
class SigmaIntro(ElabNode):
    a : ElabNode
    b : ElabNode

@dataclass
class SigmaProjA(ElabNode):
    sigma: Var

@dataclass
class SigmaProjB(ElabNode):
    sigma: Var

@dataclass
class Ascribe(ElabNode):
    """Singleton ascription; the type records the canonical path."""
    expr: ElabNode

@dataclass
class Tuple(ElabNode):
    items: List[ElabNode]

@dataclass
class SigmaUnpack(ElabNode):
    """
    A Σ-typed expression in a position that needs its `a` field.

    Exists only before the ANF transform, which turns it into `$sigma_i` bindings. Evaluates to the
    `a` field; binds `sigma_name`, `imp_name` (implicit) and, when present, `alias`.
    """
    expr       : ElabNode
    index      : int
    alias      : Optional[str]
    sigma_name : str
    imp_name   : str
    statement  : bool = False

@dataclass
class ElabDef:
    name        : str
    mangled     : str
    type        : KType
    body        : Optional[ElabNode]
    prim        : Optional[str] = None
    constructor : Optional[str] = None
    arity       : int           = 0
    aliases     : Dict          = field(default_factory=dict)
    span        : SourceSpan    = NO_SPAN
    file        : str           = "<input>"

@dataclass
class ElabProgram:
    defs: List[ElabDef] = field(default_factory=list)

    def lookup(self, mangled):
        return next((d for d in self.defs if d.mangled == mangled), None)

    def user_defs(self, file):
        return [d for d in self.defs if d.file == file]

# Traversal ----------------------------------------------------------------------------------------

def children(node):
    out = []
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, ElabNode):
            out.append(value)
        elif isinstance(value, list):
            out.extend(v for v in value if isinstance(v, ElabNode))
    return out

def walk(node):
    yield node
    for child in children(node):
        yield from walk(child)

def map_children(node, fn):
    """Shallow copy of `node` with `fn` applied to each direct child."""
    changes = {}
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, ElabNode):
            changes[f.name] = fn(value)
        elif isinstance(value, list):
            changes[f.name] = [fn(v) if isinstance(v, ElabNode) else v for v in value]
    return replace(node, **changes)

def mentioned_vars(node):
    return {n.name for n in walk(node) if isinstance(n, Var) and not n.is_global}

def block_value(stmts):
    """The node giving a statement list its value, or None when it ends with a binding."""
    if not stmts or isinstance(stmts[-1], (Let, ImplicitLet)):
        return None
    if isinstance(stmts[-1], SigmaUnpack) and stmts[-1].statement:
        return None
    return stmts[-1]

# Printing -----------------------------------------------------------------------------------------

INDENT = "    "

def print_node(node, level=0):
    pad = INDENT * level
    if isinstance(node, Var):
        return display_name(node.name) if not node.is_global else node.name
    if isinstance(node, Literal):
        if node.value is None:
            return "()"
        if isinstance(node.value, bool):
            return "true" if node.value else "false"
        return repr(node.value) if isinstance(node.value, str) else str(node.value)
    if isinstance(node, Lambda):
        arrow = "?=>" if node.implicit else "=>"
        head  = f"({node.param}: {show(node.param_type)}) {arrow}"
        return "{ " + head + "\n" + pad + INDENT + print_node(node.body, level + 1) + "\n" + pad + "}"
    if isinstance(node, Apply):
        return f"{print_node(node.fn, level)}({print_node(node.arg, level)})"
    if isinstance(node, Let):
        keyword = "implicit val" if node.implicit else ("def" if node.recursive else "val")
        return f"{keyword} {node.name}{str(node.entry_qual)} = {print_node(node.value, level)}"
    if isinstance(node, ImplicitLet):
        return print_node(node.let, level)
    if isinstance(node, Block):
        if not node.stmts:
            return "{}"
        body = "\n".join(pad + INDENT + print_node(s, level + 1) for s in node.stmts)
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(node, If):
        out = f"if ({print_node(node.cond, level)}) {print_node(node.then, level)}"
        if node.else_ is not None:
            out += f" else {print_node(node.else_, level)}"
        return out
    if isinstance(node, Summon):
        return f"summon[{show(node.type)}]({print_node(node.target, level)})"
    if isinstance(node, SigmaIntro):
        return f"new Sigma {{ val a = {print_node(node.a, level)}; val b = {print_node(node.b, level)} }}"
    if isinstance(node, SigmaProjA):
        return f"{print_node(node.sigma, level)}.a"
    if isinstance(node, SigmaProjB):
        return f"{print_node(node.sigma, level)}.b"
    if isinstance(node, Ascribe):
        return f"({print_node(node.expr, level)}: {show(node.type)})"
    if isinstance(node, Tuple):
        return "(" + ", ".join(print_node(i, level) for i in node.items) + ")"
    if isinstance(node, SigmaUnpack):
        alias = f" as {node.alias}" if node.alias else ""
        return f"unpack[{node.sigma_name}{alias}]({print_node(node.expr, level)})"
    raise TypeError(f"cannot print {node!r}")

def print_program(program, file=None):
    out = []
    for d in program.defs:
        if file is not None and d.file != file:
            continue
        head = f"def {d.mangled}: {show(d.type)}"
        if d.body is None:
            tag = f"extern {d.prim!r}" if d.prim else f"constructor {d.constructor}"
            out.append(f"{head} = {tag}")
        else:
            out.append(f"{head} =\n{INDENT}{print_node(d.body, 1)}")
    return "\n\n".join(out) + ("\n" if out else "")
