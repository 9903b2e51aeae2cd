#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Surface -> kernel.

Arrow sugar becomes DepFun chains with explicit implicitness, kills and Σ results; extension
blocks are flattened into top-level defs taking the receiver first; method calls, field selections
and infix operators become plain applications. Expressions keep the surface node classes, with
every type slot holding a kernel type.
"""

import logging

from dataclasses import dataclass, field, replace
from typing import Dict, List

from capc.diagnostics import Code, CapError
from capc.syntax import ast
from capc.syntax.ast import ArrowKind, QualKind
from capc.typesys.context import ClassSig, DefSig, TParam, TypeFunCaseSig, TypeFunDef, TypeMemberSig
from capc.typesys.qualifier import FRESH, FUN, KillSet, Qualifier
from capc.typesys.types import (
    BOOL, INT, SIGMA_SELF, STRING, UNIT, AppliedCon, Base, DepFun, KType, Path, PathMember, SigmaTy,
    Singleton, TypeFunApp, TypeLevelList, TypeLevelNat, TypeVarRef, iter_types, rename_binder,
    tuple_type,
)

logger = logging.getLogger(__name__)

BUILTIN_TYPES = {"Unit": UNIT, "Int": INT, "String": STRING, "Bool": BOOL}

BINARY_OPERATORS = {
    "==" : "eq",
    "!=" : "neq",
    "<"  : "lt",
    "+"  : "plus",
    "-"  : "minus",
    "*"  : "times",
    "++" : "concat",
}

SIGMA_FIELDS = ("a", "b")

# Placeholder result of a def whose result type is inferred by the typer.
INFERRED = TypeVarRef("$inferred")

# Kernel Program -----------------------------------------------------------------------------------

@dataclass
class KernelProgram:
    classes      : Dict[str, ClassSig]      = field(default_factory=dict)
    typefuns     : Dict[str, TypeFunDef]    = field(default_factory=dict)
    type_aliases : Dict[str, KType]         = field(default_factory=dict)
    defs         : List[DefSig]             = field(default_factory=list)

    @property
    def globals(self):
        out = {}
        for d in self.defs:
            out.setdefault(d.name, []).append(d)
        return out

    def user_defs(self, file):
        return [d for d in self.defs if d.file == file]

    def lookup(self, mangled):
        return next((d for d in self.defs if d.mangled == mangled), None)

# Type Environment ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeEnv:
    """Names visible while converting a type: type params, qualifier params, value binders."""
    tvars   : frozenset = frozenset()
    qvars   : frozenset = frozenset()
    binders : frozenset = frozenset()

    def with_tparams(self, tparams):
        return replace(self,
            tvars = self.tvars | {tp.name for tp in tparams},
            qvars = self.qvars | {tp.qual for tp in tparams if tp.qual},
        )

    def with_binders(self, names):
        return replace(self, binders=self.binders | frozenset(names))

# Desugarer ----------------------------------------------------------------------------------------

class Desugarer:
    def __init__(self):
        self.classes      = {}
        self.typefuns     = {}
        self.type_aliases = {}
        self.def_names    = set()
        self.counters     = {}

    def fresh(self, base):
        n = self.counters.get(base, 0)
        self.counters[base] = n + 1
        return f"{base}{n}"

    # Collect.

    def _collect_class(self, decl, owner=None):
        sig = ClassSig(decl.name, parent=decl.parent, owner=owner, extern=decl.extern)
        for nested in decl.nested:
            sig.nested[nested.name] = self._collect_class(nested, owner=decl.name)
        return sig

    def collect(self, program):
        for decl in program.decls:
            if isinstance(decl, ast.ClassDecl):
                if decl.name in self.classes or decl.name in BUILTIN_TYPES:
                    if not (decl.extern and decl.name in BUILTIN_TYPES):
                        raise CapError(Code.E_DESUGAR, decl.span, f"class {decl.name} is declared twice")
                    continue
                self.classes[decl.name] = self._collect_class(decl)
            elif isinstance(decl, ast.TypeAliasDecl):
                self.type_aliases[decl.name] = None
            elif isinstance(decl, ast.TypeFunDecl):
                self.typefuns[decl.name] = None
            elif isinstance(decl, (ast.DefDecl, ast.ExternDefDecl)):
                self.def_names.add(decl.name)
            elif isinstance(decl, ast.ExtensionDecl):
                self.def_names.update(d.name for d in decl.defs)

    # Types.

    def tparams(self, tparams, env):
        out   = []
        inner = env.with_tparams(tparams)
        for tp in tparams:
            bound = self.type(tp.bound, inner) if tp.bound is not None else None
            out.append(TParam(tp.name, tp.qual, bound))
        return out

    def _check_kills(self, names, env, span):
        for name in names:
            if name != FUN and name not in env.binders:
                raise CapError(Code.E_DESUGAR, span, f"@kill({name}) names no enclosing parameter")

    def _split_kill(self, st):
        if isinstance(st, ast.KillAnnot):
            return st.inner, st.names
        return st, []

    def _kill_set(self, own, names):
        vars_ = {n for n in names if n != FUN} | ({own} if own else set())
        return KillSet(frozenset(vars_), FUN in names)

    def type(self, st, env):
        """expand_arrows: convert a surface type into a kernel type."""
        if isinstance(st, KType):
            return st
        span = st.span
        if isinstance(st, ast.Named):
            return self._named(st.name, env, span)
        if isinstance(st, ast.AppliedCon):
            args = tuple(self.type(a, env) for a in st.args)
            if st.name == "S" and len(args) == 1 and "S" not in self.classes:
                return TypeLevelNat(1, args[0])
            if st.name in self.typefuns:
                return TypeFunApp(st.name, args)
            if st.name in self.classes or st.name in self.type_aliases:
                return AppliedCon(st.name, args)
            raise CapError(Code.E_DESUGAR, span, f"unknown type constructor {st.name}")
        if isinstance(st, ast.PathMember):
            return PathMember(Path(st.path[0], tuple(st.path[1:])), st.member,
                tuple(self.type(a, env) for a in st.args))
        if isinstance(st, ast.Singleton):
            return Singleton(Path(st.path[0], tuple(st.path[1:])))
        if isinstance(st, ast.Qualified):
            inner = self.type(st.inner, env)
            if st.kind is QualKind.FRESH:
                return inner.with_qual(FRESH)
            if st.kind is QualKind.VAR:
                if st.names[0] not in env.qvars:
                    raise CapError(Code.E_DESUGAR, span, f"unknown qualifier parameter {st.names[0]}")
            return inner.with_qual(Qualifier(frozenset(st.names)))
        if isinstance(st, ast.Arrow):
            return self._arrow(st, env)
        if isinstance(st, ast.SigmaArrow):
            return self._sigma(self.type(st.a, env), st.b, env)
        if isinstance(st, ast.KillAnnot):
            raise CapError(Code.E_DESUGAR, span, "@kill is only allowed on a function result")
        if isinstance(st, ast.Refinement):
            members = dict(st.members)
            if st.name != "Sigma" or set(members) != {"A", "B"}:
                raise CapError(Code.E_DESUGAR, span, "only Sigma { type A = ...; type B = ... } is supported")
            return self._sigma(self.type(members["A"], env), members["B"], env)
        if isinstance(st, ast.TupleType):
            return tuple_type(self.type(t, env) for t in st.items)
        if isinstance(st, ast.ConsType):
            return TypeLevelList(self.type(st.head, env), self.type(st.tail, env))
        if isinstance(st, ast.NatLit):
            return TypeLevelNat(st.value)
        if isinstance(st, ast.Projection):
            owner = self.type(st.owner, env)
            if not isinstance(owner, Base) or owner.name not in self.classes:
                raise CapError(Code.E_DESUGAR, span, "a projection needs a class on its left")
            if st.member not in self.classes[owner.name].nested:
                raise CapError(Code.E_DESUGAR, span, f"class {owner.name} has no nested class {st.member}")
            return Base(f"{owner.name}#{st.member}")
        if isinstance(st, ast.ByName):
            return self._by_name(st, env)
        raise CapError(Code.E_DESUGAR, span, "unsupported type form")

    def _named(self, name, env, span):
        if name in env.tvars:
            return TypeVarRef(name)
        if name in BUILTIN_TYPES:
            return BUILTIN_TYPES[name]
        if name in self.classes or name in self.type_aliases:
            return Base(name)
        if name in self.typefuns:
            raise CapError(Code.E_DESUGAR, span, f"type function {name} needs an argument")
        raise CapError(Code.E_DESUGAR, span, f"unknown type {name}")

    def _sigma(self, a, b_st, env):
        b = self.type(b_st, env.with_binders([SIGMA_FIELDS[0]]))
        return SigmaTy(SIGMA_SELF, a, rename_binder(b, SIGMA_FIELDS[0], SIGMA_SELF))

    def _by_name(self, st, env):
        inner, kills = self._split_kill(st.inner)
        self._check_kills(kills, env, st.span)
        return DepFun(self.fresh("$u"), UNIT, self.type(inner, env), by_name=True,
            kill=self._kill_set(None, kills))

    def _arrow(self, st, env):
        if st.binders:
            binders = [(name, self.type(t, env.with_binders([b for b, _ in st.binders]))) for name, t in st.binders]
        elif st.param is None:
            binders = [(self.fresh("$u"), UNIT)]
        else:
            binders = [(self.fresh("$c"), self.type(st.param, env))]
        inner_env     = env.with_binders(name for name, _ in binders)
        result, kills = self._split_kill(st.result)
        self._check_kills(kills, inner_env, st.span)
        result = self.type(result, inner_env)

        name, ptype = binders[-1]
        implicit    = st.kind in (ArrowKind.IMPLICIT, ArrowKind.IMPLICIT_KILL, ArrowKind.TRANSITION)
        own_kill    = st.kind in (ArrowKind.KILL, ArrowKind.IMPLICIT_KILL, ArrowKind.TRANSITION)
        if st.kind is ArrowKind.TRANSITION:
            if ptype.qual.is_empty():
                ptype = ptype.with_qual(FRESH)
            if result.qual.is_empty():
                result = result.with_qual(FRESH)
            result = SigmaTy(SIGMA_SELF, UNIT, result)
        t = DepFun(name, ptype, result, implicit=implicit,
            kill=self._kill_set(name if own_kill else None, kills))
        for name, ptype in reversed(binders[:-1]):
            t = DepFun(name, ptype, t)
        return t

    def signature(self, params, result_st, env, span):
        """Curried DepFun chain of a def with parameter lists `params`, and the number of binders."""
        binders = []
        for plist in params:
            if not plist.params:
                binders.append((self.fresh("$u"), UNIT, False))
                continue
            for p in plist.params:
                if p.type is None:
                    raise CapError(Code.E_DESUGAR, p.span, f"parameter {p.name} needs a type")
                ptype = self.type(p.type, env.with_binders([b for b, _, _ in binders] + [p.name]))
                binders.append((p.name, ptype, plist.using))
        inner_env = env.with_binders(name for name, _, _ in binders)
        if result_st is None:
            result, kills = INFERRED, []
        else:
            result_st, kills = self._split_kill(result_st)
            self._check_kills(kills, inner_env, span)
            result = self.type(result_st, inner_env)
        if not binders:
            if kills:
                raise CapError(Code.E_DESUGAR, span, "@kill on a definition without parameters")
            return result, 0
        name, ptype, implicit = binders[-1]
        t = DepFun(name, ptype, result, implicit=implicit, kill=self._kill_set(None, kills))
        for name, ptype, implicit in reversed(binders[:-1]):
            t = DepFun(name, ptype, t, implicit=implicit)
        return t, len(binders)

    # Declarations.

    def _class_members(self, decl, sig):
        env = TypeEnv().with_tparams(decl.tparams)
        sig.tparams = self.tparams(decl.tparams, TypeEnv())
        for m in decl.members:
            if m.name in sig.members:
                raise CapError(Code.E_DESUGAR, m.span, f"type member {m.name} is declared twice")
            sig.members[m.name] = TypeMemberSig(m.name, self.tparams(m.tparams, env))
        for nested in decl.nested:
            self._class_members(nested, sig.nested[nested.name])
        if decl.parent is not None and decl.parent not in self.classes:
            raise CapError(Code.E_DESUGAR, decl.span, f"unknown parent class {decl.parent}")

    def _typefun(self, decl):
        env = TypeEnv().with_tparams(decl.tparams)
        if decl.tparams[0].name != decl.scrutinee:
            raise CapError(Code.E_DESUGAR, decl.span, "a type function matches on its first parameter")
        cases = {}
        for case in decl.cases:
            if case.con in cases:
                raise CapError(Code.E_DESUGAR, case.span, f"overlapping case {case.con}")
            cenv   = env.with_tparams([ast.TypeParam(case.span, v) for v in case.vars])
            result = self.type(case.result, cenv)
            for sub in iter_types(result):
                if isinstance(sub, TypeFunApp) and sub.name == decl.name:
                    arg = sub.args[0]
                    if not (isinstance(arg, TypeVarRef) and arg.name in case.vars):
                        raise CapError(Code.E_DESUGAR, case.span,
                            f"{decl.name} may only recurse on a variable of its case pattern")
            cases[case.con] = TypeFunCaseSig(case.con, list(case.vars), result)
        return TypeFunDef(decl.name, self.tparams(decl.tparams, TypeEnv()), cases)

    def _def(self, decl, file, receiver=None):
        params = list(decl.params)
        if receiver is not None:
            params.insert(0, ast.ParamList(receiver.span, [receiver]))
        tparams = self.tparams(decl.tparams, TypeEnv())
        env     = TypeEnv().with_tparams(decl.tparams)
        result  = decl.result
        ktype, arity = self.signature(params, result, env, decl.span)
        if isinstance(decl, ast.ExternDefDecl):
            return DefSig(decl.name, decl.name, tparams, ktype, arity=arity, prim=decl.prim,
                span=decl.span, file=file)
        return DefSig(decl.name, decl.name, tparams, ktype,
            arity        = arity,
            body         = self.expr(decl.body, env),
            span         = decl.span,
            result_given = result is not None,
            file         = file,
        )

    def declarations(self, program, file, out):
        for decl in program.decls:
            if isinstance(decl, ast.ClassDecl):
                if decl.name in BUILTIN_TYPES:
                    continue
                sig = self.classes[decl.name]
                self._class_members(decl, sig)
                if sig.constructible:
                    out.defs.append(DefSig(decl.name, decl.name, [],
                        DepFun(self.fresh("$u"), UNIT, Base(decl.name)), arity=1,
                        constructor=decl.name, span=decl.span, file=file))
                    self.def_names.add(decl.name)
            elif isinstance(decl, ast.TypeAliasDecl):
                self.type_aliases[decl.name] = self.type(decl.target, TypeEnv())
            elif isinstance(decl, ast.TypeFunDecl):
                self.typefuns[decl.name] = self._typefun(decl)
            elif isinstance(decl, (ast.DefDecl, ast.ExternDefDecl)):
                out.defs.append(self._def(decl, file))
            elif isinstance(decl, ast.ExtensionDecl):
                if decl.receiver.type is None:
                    raise CapError(Code.E_DESUGAR, decl.span, "an extension receiver needs a type")
                for d in decl.defs:
                    out.defs.append(self._def(d, file, receiver=decl.receiver))

    # Expressions.

    def expr(self, node, env):
        """desugar_ufcs over one expression tree."""
        span = node.span
        if isinstance(node, ast.MethodCall):
            if node.name not in self.def_names:
                raise CapError(Code.E_UNKNOWN_METHOD, span, f"no method {node.name} found")
            fn = ast.Var(span, node.name)
            if node.targs:
                fn = ast.TypeApply(span, fn, [self.type(t, env) for t in node.targs])
            recv = ast.Apply(span, fn, [self.expr(node.receiver, env)])
            return ast.Apply(span, recv, [self.expr(a, env) for a in node.args],
                using=node.using, block=node.block)
        if isinstance(node, ast.Select):
            if node.name in self.def_names:
                return ast.Apply(span, ast.Var(span, node.name), [self.expr(node.receiver, env)])
            if node.name in SIGMA_FIELDS:
                return ast.Select(span, self.expr(node.receiver, env), node.name)
            raise CapError(Code.E_UNKNOWN_METHOD, span, f"no method or field {node.name} found")
        if isinstance(node, ast.BinOp):
            fn = ast.Var(span, BINARY_OPERATORS[node.op])
            return ast.Apply(span, fn, [self.expr(node.lhs, env), self.expr(node.rhs, env)])
        if isinstance(node, ast.Apply):
            return replace(node, fn=self.expr(node.fn, env), args=[self.expr(a, env) for a in node.args])
        if isinstance(node, ast.TypeApply):
            return replace(node, fn=self.expr(node.fn, env), targs=[self.type(t, env) for t in node.targs])
        if isinstance(node, ast.Block):
            return replace(node, stmts=self.stmts(node.stmts, env))
        if isinstance(node, ast.If):
            return replace(node, cond=self.expr(node.cond, env), then=self.expr(node.then, env),
                else_=self.expr(node.else_, env) if node.else_ is not None else None)
        if isinstance(node, ast.Lambda):
            params = [replace(p, type=self.type(p.type, env) if p.type is not None else None)
                for p in node.params]
            return replace(node, params=params, body=self.expr(node.body, env))
        if isinstance(node, ast.Summon):
            return replace(node, type=self.type(node.type, env))
        if isinstance(node, ast.TypeAscription):
            return replace(node, expr=self.expr(node.expr, env), type=self.type(node.type, env))
        if isinstance(node, ast.TupleExpr):
            return replace(node, items=[self.expr(i, env) for i in node.items])
        if isinstance(node, ast.SigmaIntro):
            return replace(node, a=self.expr(node.a, env), b=self.expr(node.b, env))
        if isinstance(node, (ast.Var, ast.Literal)):
            return node
        raise CapError(Code.E_DESUGAR, span, f"unexpected {type(node).__name__} in expression position")

    def stmts(self, stmts, env):
        out = []
        for s in stmts:
            if isinstance(s, ast.ValBind):
                out.append(replace(s, value=self.expr(s.value, env)))
            elif isinstance(s, ast.ImplicitValBind):
                out.append(replace(s, value=self.expr(s.value, env)))
            elif isinstance(s, ast.TupleValBind):
                if len(s.names) != 2:
                    raise CapError(Code.E_DESUGAR, s.span, "tuple patterns bind exactly two names")
                tmp = self.fresh("$tup")
                out.append(ast.ValBind(s.span, tmp, self.expr(s.value, env)))
                for name, proj in zip(s.names, ("_1", "_2")):
                    out.append(ast.ValBind(s.span, name,
                        ast.Apply(s.span, ast.Var(s.span, proj), [ast.Var(s.span, tmp)])))
            elif isinstance(s, ast.DefDecl):
                if s.result is None:
                    raise CapError(Code.E_DESUGAR, s.span, f"nested def {s.name} needs a result type")
                if s.tparams:
                    raise CapError(Code.E_DESUGAR, s.span, f"nested def {s.name} cannot be generic")
                ktype, arity = self.signature(s.params, s.result, env, s.span)
                out.append(DefSig(s.name, s.name, [], ktype, arity=arity,
                    body=self.expr(s.body, env), span=s.span, file=s.span.file))
            elif isinstance(s, DefSig):
                out.append(s)
            else:
                out.append(self.expr(s, env))
        return out

# Mangling -----------------------------------------------------------------------------------------

def _head(t):
    if isinstance(t, (Base, AppliedCon)):
        return t.name
    if isinstance(t, PathMember):
        return t.member
    if isinstance(t, TypeVarRef):
        return "T"
    return type(t).__name__

def mangle(defs):
    """Overloaded names get `name#FirstParamClass` (e.g. close#OpenFile, close#DOM)."""
    groups = {}
    for d in defs:
        groups.setdefault(d.name, []).append(d)
    for name, group in groups.items():
        if len(group) == 1:
            group[0].mangled = name
            continue
        seen = set()
        for d in group:
            first = d.type.param_type if isinstance(d.type, DepFun) else d.type
            d.mangled = f"{name}#{_head(first)}"
            if d.mangled in seen:
                raise CapError(Code.E_DESUGAR, d.span,
                    f"{name} is already defined for a first parameter of type {_head(first)}")
            seen.add(d.mangled)

# Entry Point --------------------------------------------------------------------------------------

def desugar(units):
    """
    Desugar `(Program, file)` units (prelude files first) into one KernelProgram.

    Declarations are global: a unit may use classes and defs of any other unit.
    """
    d   = Desugarer()
    out = KernelProgram()
    for program, _ in units:
        d.collect(program)
    for program, file in units:
        d.declarations(program, file, out)
    mangle(out.defs)
    out.classes      = d.classes
    out.typefuns     = d.typefuns
    out.type_aliases = d.type_aliases
    logger.debug("Desugared %d definitions.", len(out.defs))
    return out
