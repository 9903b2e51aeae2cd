#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Surface AST produced by the parser. Every node carries exactly one SourceSpan."""

import enum

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from capc.syntax.span import SourceSpan

# Surface Types ------------------------------------------------------------------------------------

class ArrowKind(enum.Enum):
    FUN           = "=>"
    IMPLICIT      = "?=>"
    KILL          = "=!>"
    IMPLICIT_KILL = "?=!>"
    TRANSITION    = "?=!>?"

class QualKind(enum.Enum):
    FRESH = "fresh"   # T^
    SET   = "set"     # T^{x, y}
    VAR   = "var"     # T^q

@dataclass
class SurfaceType:
    span: SourceSpan

@dataclass
class Named(SurfaceType):
    name: str

@dataclass
class AppliedCon(SurfaceType):
    name: str
    args: List[SurfaceType]

@dataclass
class PathMember(SurfaceType):
    path   : List[str]
    member : str
    args   : List[SurfaceType] = field(default_factory=list)

@dataclass
class Singleton(SurfaceType):
    path: List[str]

@dataclass
class Qualified(SurfaceType):
    inner : SurfaceType
    kind  : QualKind
    names : List[str] = field(default_factory=list)

@dataclass
class Arrow(SurfaceType):
    """`S => T` and friends; `binders` is non-empty for `(c: S) => T`, empty list plus
    `param=None` for `() => T`."""
    kind    : ArrowKind
    binders : List[Tuple[str, SurfaceType]]
    param   : Optional[SurfaceType]
    result  : SurfaceType

@dataclass
class SigmaArrow(SurfaceType):
    """`B ?<= A`."""
    b : SurfaceType
    a : SurfaceType

@dataclass
class KillAnnot(SurfaceType):
    inner : SurfaceType
    names : List[str]

@dataclass
class Refinement(SurfaceType):
    name    : str
    members : List[Tuple[str, SurfaceType]]

@dataclass
class TupleType(SurfaceType):
    items: List[SurfaceType]

@dataclass
class ConsType(SurfaceType):
    head : SurfaceType
    tail : SurfaceType

@dataclass
class NatLit(SurfaceType):
    value: int

@dataclass
class Projection(SurfaceType):
    """`Table#Row`."""
    owner  : SurfaceType
    member : str

@dataclass
class ByName(SurfaceType):
    inner: SurfaceType

# Surface Nodes ------------------------------------------------------------------------------------

@dataclass
class SurfaceNode:
    span: SourceSpan

@dataclass
class Param(SurfaceNode):
    name  : str
    type  : Optional[SurfaceType]

@dataclass
class ParamList(SurfaceNode):
    params : List[Param]
    using  : bool = False

@dataclass
class TypeParam(SurfaceNode):
    name  : str
    qual  : Optional[str] = None
    bound : Optional[SurfaceType] = None

# Declarations.

@dataclass
class TypeMemberDecl(SurfaceNode):
    name    : str
    tparams : List[TypeParam] = field(default_factory=list)

@dataclass
class ClassDecl(SurfaceNode):
    name    : str
    tparams : List[TypeParam] = field(default_factory=list)
    parent  : Optional[str] = None
    members : List[TypeMemberDecl] = field(default_factory=list)
    nested  : List["ClassDecl"] = field(default_factory=list)
    extern  : bool = False

@dataclass
class TypeAliasDecl(SurfaceNode):
    name   : str
    target : SurfaceType

@dataclass
class TypeFunCase(SurfaceNode):
    con    : str
    vars   : List[str]
    result : SurfaceType

@dataclass
class TypeFunDecl(SurfaceNode):
    name      : str
    tparams   : List[TypeParam]
    scrutinee : str
    cases     : List[TypeFunCase]

@dataclass
class DefDecl(SurfaceNode):
    name    : str
    tparams : List[TypeParam]
    params  : List[ParamList]
    result  : Optional[SurfaceType]
    body    : "SurfaceNode"

@dataclass
class ExternDefDecl(SurfaceNode):
    name    : str
    tparams : List[TypeParam]
    params  : List[ParamList]
    result  : SurfaceType
    prim    : str

@dataclass
class ExtensionDecl(SurfaceNode):
    receiver : Param
    defs     : List[SurfaceNode]

@dataclass
class Program(SurfaceNode):
    decls: List[SurfaceNode]

# Statements.

@dataclass
class ValBind(SurfaceNode):
    """`val x = e`; `val x: T = e` carries a TypeAscription value."""
    name  : str
    value : SurfaceNode

@dataclass
class ImplicitValBind(SurfaceNode):
    name  : str
    value : SurfaceNode

@dataclass
class TupleValBind(SurfaceNode):
    names : List[str]
    value : SurfaceNode

# Expressions.

@dataclass
class Block(SurfaceNode):
    stmts: List[SurfaceNode]

@dataclass
class If(SurfaceNode):
    cond  : SurfaceNode
    then  : SurfaceNode
    else_ : Optional[SurfaceNode]

@dataclass
class Lambda(SurfaceNode):
    """`params` empty means `() =>`; `implicit` for `?=>`."""
    params   : List[Param]
    implicit : bool
    body     : SurfaceNode

@dataclass
class Apply(SurfaceNode):
    """`fn(args)`; an empty argument list is the Unit argument."""
    fn    : SurfaceNode
    args  : List[SurfaceNode]
    using : bool = False
    block : bool = False

@dataclass
class TypeApply(SurfaceNode):
    fn    : SurfaceNode
    targs : List[SurfaceType]

@dataclass
class MethodCall(SurfaceNode):
    receiver : SurfaceNode
    name     : str
    targs    : List[SurfaceType]
    args     : List[SurfaceNode]
    using    : bool = False
    block    : bool = False

@dataclass
class Select(SurfaceNode):
    receiver : SurfaceNode
    name     : str

@dataclass
class Summon(SurfaceNode):
    type: SurfaceType

@dataclass
class Var(SurfaceNode):
    name: str

@dataclass
class Literal(SurfaceNode):
    """Int, String or Bool value, or None for `()`."""
    value: object

@dataclass
class TupleExpr(SurfaceNode):
    items: List[SurfaceNode]

@dataclass
class TypeAscription(SurfaceNode):
    expr : SurfaceNode
    type : SurfaceType

@dataclass
class SigmaIntro(SurfaceNode):
    a : SurfaceNode
    b : SurfaceNode

@dataclass
class BinOp(SurfaceNode):
    op  : str
    lhs : SurfaceNode
    rhs : SurfaceNode

# Helpers ------------------------------------------------------------------------------------------

def children(node):
    """Direct SurfaceNode children in source order (types excluded)."""
    out = []
    for value in vars(node).values():
        if isinstance(value, SurfaceNode):
            out.append(value)
        elif isinstance(value, list):
            out.extend(v for v in value if isinstance(v, SurfaceNode))
    return out

def walk(node):
    yield node
    for child in children(node):
        yield from walk(child)
