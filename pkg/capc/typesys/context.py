#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Declarations tables and the scoped typing context."""

import logging

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from capc.syntax.span import NO_SPAN, SourceSpan
from capc.typesys.qualifier import EMPTY, Qualifier
from capc.typesys.types import KType, Path

logger = logging.getLogger(__name__)

# Declarations -------------------------------------------------------------------------------------

@dataclass
class TParam:
    """`T`, `T^q` or `T <: Bound`."""
    name  : str
    qual  : Optional[str]   = None
    bound : Optional[KType] = None

@dataclass
class TypeMemberSig:
    name    : str
    tparams : List[TParam] = field(default_factory=list)
    opaque  : bool         = True

@dataclass
class ClassSig:
    name    : str
    tparams : List[TParam]             = field(default_factory=list)
    parent  : Optional[str]            = None
    members : Dict[str, TypeMemberSig] = field(default_factory=dict)
    nested  : Dict[str, "ClassSig"]    = field(default_factory=dict)
    owner   : Optional[str]            = None
    extern  : bool                     = False

    @property
    def qualified_name(self):
        return f"{self.owner}#{self.name}" if self.owner else self.name

    @property
    def constructible(self):
        return not (self.extern or self.tparams or self.members or self.nested or self.owner)

@dataclass
class TypeFunCaseSig:
    con    : str
    vars   : List[str]
    result : KType

@dataclass
class TypeFunDef:
    name    : str
    tparams : List[TParam]
    cases   : Dict[str, TypeFunCaseSig]

@dataclass
class DefSig:
    """
    A top-level (or nested) definition after desugaring.

    `type` is the full curried DepFun chain; `body` is the desugared expression (None for externs
    and constructors); `result_given` is False when the result type must be inferred; `arity` counts
    the DepFuns contributed by parameter lists (the rest of the chain belongs to the result type).
    """
    name         : str
    mangled      : str
    tparams      : List[TParam]
    type         : KType
    arity        : int             = 0
    body         : object          = None
    prim         : Optional[str]   = None
    span         : SourceSpan      = NO_SPAN
    result_given : bool            = True
    constructor  : Optional[str]   = None
    file         : str             = "<input>"

    @property
    def is_extern(self):
        return self.prim is not None or self.constructor is not None

# Context ------------------------------------------------------------------------------------------

@dataclass
class Entry:
    """One binding in scope."""
    name     : str
    type     : KType
    qual     : Qualifier  = EMPTY
    implicit : bool       = False
    depth    : int        = 0
    kind     : str        = "let"     # let | param | def
    origin   : str        = "user"    # user | anf
    span     : SourceSpan = NO_SPAN

class TypingContext:
    """
    Stack of scopes over the global tables.

    Names are unique after renaming, so a flat name index serves lookups; the scope stack keeps
    introduction order and depth for implicit resolution and escape checking.
    """
    def __init__(self, classes=None, typefuns=None, type_aliases=None, globals=None):
        self.classes      = classes      if classes      is not None else {}
        self.typefuns     = typefuns     if typefuns     is not None else {}
        self.type_aliases = type_aliases if type_aliases is not None else {}
        self.globals      = globals      if globals      is not None else {}
        self.scopes       = [[]]
        self.index        = {}
        self.aliases      = {}
        self.counters     = {}

    # Scopes.

    @property
    def depth(self):
        return len(self.scopes) - 1

    def push(self):
        self.scopes.append([])

    def pop(self):
        scope = self.scopes.pop()
        for e in scope:
            self.index.pop(e.name, None)
        return scope

    def pop_to(self, depth):
        """Pop every scope deeper than `depth`, returning the removed entries (innermost last)."""
        popped = []
        while self.depth > depth:
            popped = self.pop() + popped
        return popped

    def bind(self, entry):
        entry.depth = self.depth
        self.scopes[-1].append(entry)
        self.index[entry.name] = entry
        return entry

    # Names.

    def fresh(self, base):
        n = self.counters.get(base, 0)
        self.counters[base] = n + 1
        if base.startswith("$"):
            return f"{base}{n}"
        return base if n == 0 else f"{base}${n}"

    def lookup(self, name):
        return self.index.get(name)

    def qual_of(self, name):
        e = self.index.get(name)
        return e.qual if e is not None else None

    def entries(self):
        for scope in self.scopes:
            yield from scope

    def implicits(self):
        return [e for e in self.entries() if e.implicit]

    # Paths.

    def canonical(self, path):
        seen = set()
        while path.root in self.aliases and path.root not in seen:
            seen.add(path.root)
            path = self.aliases[path.root].extend(*path.fields)
        return path

    def path_of(self, name):
        return self.canonical(Path(name))

    def add_alias(self, name, path):
        self.aliases[name] = self.canonical(path)
        logger.debug("Alias %s -> %s.", name, self.aliases[name])

    # Classes.

    def class_sig(self, name):
        if name in self.classes:
            return self.classes[name]
        owner, sep, inner = name.partition("#")
        if sep and owner in self.classes:
            return self.classes[owner].nested.get(inner)
        return None

    def is_subclass(self, name, ancestor):
        seen = set()
        while name is not None and name not in seen:
            if name == ancestor:
                return True
            seen.add(name)
            sig = self.class_sig(name)
            name = sig.parent if sig is not None else None
        return False
