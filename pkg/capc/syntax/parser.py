#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import logging

from lark import Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedToken, VisitError

from capc.diagnostics import Code, CapError
from capc.syntax import ast
from capc.syntax.ast import ArrowKind, QualKind
from capc.syntax.lexer import cap_lark, error_span, token_span
from capc.syntax.span import SourceSpan

logger = logging.getLogger(__name__)

ARROW_KINDS = {
    "ARROW"      : ArrowKind.FUN,
    "QARROW"     : ArrowKind.IMPLICIT,
    "KILLARROW"  : ArrowKind.KILL,
    "QKILLARROW" : ArrowKind.IMPLICIT_KILL,
    "TRANSARROW" : ArrowKind.TRANSITION,
}

STRING_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"'}

# Helpers ------------------------------------------------------------------------------------------

class _TParams(list):   pass
class _Dotted(list):    pass
class _TArgs(list):     pass
class _Extends(str):    pass
class _ClassBody(list): pass

class _Body:
    def __init__(self, stmts):
        self.stmts = stmts

def _nodes(children):
    return [c for c in children if not isinstance(c, Token)]

def _idents(children):
    return [c.value for c in children if isinstance(c, Token) and c.type == "IDENT"]

def _unescape(text):
    out = []
    i   = 1
    while i < len(text) - 1:
        c = text[i]
        if c == "\\" and i + 1 < len(text) - 1:
            out.append(STRING_ESCAPES.get(text[i + 1], text[i + 1]))
            i += 2
            continue
        out.append(c)
        i += 1
    return "".join(out)

# Transformer --------------------------------------------------------------------------------------

@v_args(meta=True)
class SurfaceBuilder(Transformer):
    """Turn the lark parse tree into surface AST nodes carrying SourceSpans."""
    def __init__(self, file):
        super().__init__()
        self.file = file

    def _span(self, meta):
        if getattr(meta, "empty", True):
            return SourceSpan(self.file, 1, 1, 1, 1)
        end_col = max(meta.end_column - 1, 1)
        if (meta.end_line, end_col) < (meta.line, meta.column):
            return SourceSpan(self.file, meta.line, meta.column, meta.line, meta.column)
        return SourceSpan(self.file, meta.line, meta.column, meta.end_line, end_col)

    # Declarations ---------------------------------------------------------------------------------

    def start(self, meta, children):
        return ast.Program(self._span(meta), list(children))

    def _class(self, meta, children, extern):
        name    = _idents(children)[0]
        tparams = next((c for c in children if isinstance(c, _TParams)), [])
        parent  = next((c for c in children if isinstance(c, _Extends)), None)
        body    = next((c for c in children if isinstance(c, _ClassBody)), [])
        return ast.ClassDecl(self._span(meta), name,
            tparams = list(tparams),
            parent  = str(parent) if parent is not None else None,
            members = [m for m in body if isinstance(m, ast.TypeMemberDecl)],
            nested  = [m for m in body if isinstance(m, ast.ClassDecl)],
            extern  = extern,
        )

    def class_decl(self, meta, children):
        return self._class(meta, children, extern=False)

    def extern_class(self, meta, children):
        return self._class(meta, children, extern=True)

    def extends(self, meta, children):
        return _Extends(_idents(children)[0])

    def class_body(self, meta, children):
        return _ClassBody(_nodes(children))

    def type_member(self, meta, children):
        tparams = next((c for c in children if isinstance(c, _TParams)), [])
        return ast.TypeMemberDecl(self._span(meta), _idents(children)[0], list(tparams))

    def type_alias(self, meta, children):
        return ast.TypeAliasDecl(self._span(meta), _idents(children)[0], _nodes(children)[0])

    def typefun_decl(self, meta, children):
        name, scrutinee = _idents(children)[:2]
        tparams = next(c for c in children if isinstance(c, _TParams))
        cases   = [c for c in children if isinstance(c, ast.TypeFunCase)]
        return ast.TypeFunDecl(self._span(meta), name, list(tparams), scrutinee, cases)

    def typefun_case(self, meta, children):
        (con, variables), result = _nodes(children)
        return ast.TypeFunCase(self._span(meta), con, variables, result)

    def case_pat(self, meta, children):
        names = _idents(children)
        return (names[0], names[1:])

    def _def_parts(self, children):
        tparams, params, result, body = [], [], None, None
        after = None
        for c in children:
            if isinstance(c, Token):
                if c.type in ("COLON", "EQ"):
                    after = c.type
                continue
            if isinstance(c, _TParams):
                tparams = list(c)
            elif isinstance(c, ast.ParamList):
                params.append(c)
            elif after == "COLON":
                result = c
            elif after == "EQ":
                body = c
        return tparams, params, result, body

    def def_decl(self, meta, children):
        tparams, params, result, body = self._def_parts(children)
        return ast.DefDecl(self._span(meta), _idents(children)[0], tparams, params, result, body)

    def extern_def(self, meta, children):
        tparams, params, result, _ = self._def_parts(children)
        prim = next(c for c in children if isinstance(c, Token) and c.type == "STRING")
        return ast.ExternDefDecl(self._span(meta), _idents(children)[0], tparams, params, result,
            _unescape(prim.value))

    def extension_decl(self, meta, children):
        nodes = _nodes(children)
        return ast.ExtensionDecl(self._span(meta), nodes[0], nodes[1:])

    def tparams(self, meta, children):
        return _TParams(_nodes(children))

    def tparam(self, meta, children):
        names = _idents(children)
        bound = _nodes(children)
        return ast.TypeParam(self._span(meta), names[0],
            qual  = names[1] if len(names) > 1 else None,
            bound = bound[0] if bound else None,
        )

    def unit_params(self, meta, children):
        return ast.ParamList(self._span(meta), [])

    def params(self, meta, children):
        return ast.ParamList(self._span(meta), _nodes(children))

    def using_params(self, meta, children):
        return ast.ParamList(self._span(meta), _nodes(children), using=True)

    def param(self, meta, children):
        return ast.Param(self._span(meta), _idents(children)[0], _nodes(children)[0])

    def byname_param(self, meta, children):
        inner = _nodes(children)[0]
        return ast.Param(self._span(meta), _idents(children)[0], ast.ByName(inner.span, inner))

    # Types ----------------------------------------------------------------------------------------

    def arrow_op(self, meta, children):
        return ARROW_KINDS[children[0].type]

    def _arrow_kind(self, children):
        return next(c for c in children if isinstance(c, ArrowKind))

    def arrow(self, meta, children):
        kind = self._arrow_kind(children)
        param, result = [c for c in _nodes(children) if not isinstance(c, ArrowKind)]
        return ast.Arrow(self._span(meta), kind, [], param, result)

    def dep_arrow(self, meta, children):
        kind    = self._arrow_kind(children)
        nodes   = [c for c in _nodes(children) if not isinstance(c, ArrowKind)]
        binders = [c for c in nodes if isinstance(c, tuple)]
        return ast.Arrow(self._span(meta), kind, binders, None, nodes[-1])

    def unit_arrow(self, meta, children):
        result = [c for c in _nodes(children) if not isinstance(c, ArrowKind)][0]
        return ast.Arrow(self._span(meta), self._arrow_kind(children), [], None, result)

    def binder(self, meta, children):
        return (_idents(children)[0], _nodes(children)[0])

    def sigma_arrow(self, meta, children):
        b, a = _nodes(children)
        return ast.SigmaArrow(self._span(meta), b, a)

    def kill_annot(self, meta, children):
        names = _idents(children)
        if names[0] != "kill":
            raise CapError(Code.E_PARSE, self._span(meta), f"unknown annotation @{names[0]}, expected @kill")
        return ast.KillAnnot(self._span(meta), _nodes(children)[0], names[1:])

    def cons(self, meta, children):
        head, tail = _nodes(children)
        return ast.ConsType(self._span(meta), head, tail)

    def fresh_qual(self, meta, children):
        return ast.Qualified(self._span(meta), _nodes(children)[0], QualKind.FRESH)

    def set_qual(self, meta, children):
        return ast.Qualified(self._span(meta), _nodes(children)[0], QualKind.SET, _idents(children))

    def var_qual(self, meta, children):
        return ast.Qualified(self._span(meta), _nodes(children)[0], QualKind.VAR, _idents(children))

    def projection(self, meta, children):
        return ast.Projection(self._span(meta), _nodes(children)[0], _idents(children)[0])

    def singleton(self, meta, children):
        return ast.Singleton(self._span(meta), list(_nodes(children)[0]))

    def simple_type(self, meta, children):
        # Parenthesized type.
        return _nodes(children)[0]

    def tuple_type(self, meta, children):
        return ast.TupleType(self._span(meta), _nodes(children))

    def nat_type(self, meta, children):
        return ast.NatLit(self._span(meta), int(children[0].value))

    def refined(self, meta, children):
        return ast.Refinement(self._span(meta), _idents(children)[0], _nodes(children))

    def refinement(self, meta, children):
        return (_idents(children)[0], _nodes(children)[0])

    def type_ref(self, meta, children):
        nodes  = _nodes(children)
        names  = list(nodes[0])
        args   = list(nodes[1]) if len(nodes) > 1 else []
        span   = self._span(meta)
        if len(names) > 1:
            return ast.PathMember(span, names[:-1], names[-1], args)
        if args:
            return ast.AppliedCon(span, names[0], args)
        return ast.Named(span, names[0])

    def dotted(self, meta, children):
        nodes = _nodes(children)
        head  = list(nodes[0]) if nodes else []
        return _Dotted(head + _idents(children))

    def targs(self, meta, children):
        return _TArgs(_nodes(children))

    # Statements -----------------------------------------------------------------------------------

    def block(self, meta, children):
        nodes = _nodes(children)
        stmts = nodes[0].stmts if nodes else []
        # `{ x => ... }` is the lambda itself.
        if len(stmts) == 1 and isinstance(stmts[0], ast.Lambda):
            return stmts[0]
        return ast.Block(self._span(meta), stmts)

    def body(self, meta, children):
        return _Body(_nodes(children))

    def block_lambda(self, meta, children):
        params, implicit, body = _nodes(children)
        if len(body.stmts) == 1 and isinstance(body.stmts[0], ast.Lambda):
            inner = body.stmts[0]
        else:
            first, last = body.stmts[0].span, body.stmts[-1].span
            inner = ast.Block(first.join(last), body.stmts)
        return ast.Lambda(self._span(meta), params, implicit, inner)

    def val_stmt(self, meta, children):
        return ast.ValBind(self._span(meta), _idents(children)[0], self._ascribed(meta, children))

    def implicit_val(self, meta, children):
        return ast.ImplicitValBind(self._span(meta), _idents(children)[0], self._ascribed(meta, children))

    def _ascribed(self, meta, children):
        nodes = _nodes(children)
        if len(nodes) == 2:
            typ, value = nodes
            return ast.TypeAscription(value.span, value, typ)
        return nodes[0]

    def tuple_val(self, meta, children):
        return ast.TupleValBind(self._span(meta), _idents(children), _nodes(children)[0])

    # Expressions ----------------------------------------------------------------------------------

    def lambda_expr(self, meta, children):
        params, implicit, body = _nodes(children)
        return ast.Lambda(self._span(meta), params, implicit, body)

    def lp_ident(self, meta, children):
        return [ast.Param(self._span(meta), _idents(children)[0], None)]

    def lp_unit(self, meta, children):
        return []

    def lp_typed(self, meta, children):
        return _nodes(children)

    def lambda_arrow(self, meta, children):
        return children[0].type == "QARROW"

    def if_expr(self, meta, children):
        nodes = _nodes(children)
        return ast.If(self._span(meta), nodes[0], nodes[1], nodes[2] if len(nodes) > 2 else None)

    def binop(self, meta, children):
        lhs, op, rhs = children
        return ast.BinOp(self._span(meta), op.value, lhs, rhs)

    def _call(self, meta, fn, args, using=False, block=False):
        span = self._span(meta)
        if isinstance(fn, ast.Select):
            return ast.MethodCall(span, fn.receiver, fn.name, [], args, using=using, block=block)
        if isinstance(fn, ast.TypeApply) and isinstance(fn.fn, ast.Select):
            return ast.MethodCall(span, fn.fn.receiver, fn.fn.name, fn.targs, args, using=using, block=block)
        return ast.Apply(span, fn, args, using=using, block=block)

    def call_unit(self, meta, children):
        return self._call(meta, children[0], [])

    def call(self, meta, children):
        nodes = _nodes(children)
        return self._call(meta, nodes[0], nodes[1:])

    def call_using(self, meta, children):
        nodes = _nodes(children)
        return self._call(meta, nodes[0], nodes[1:], using=True)

    def call_block(self, meta, children):
        fn, blk = _nodes(children)
        return self._call(meta, fn, [blk], block=True)

    def tapply(self, meta, children):
        nodes = _nodes(children)
        return ast.TypeApply(self._span(meta), nodes[0], nodes[1:])

    def select(self, meta, children):
        return ast.Select(self._span(meta), _nodes(children)[0], _idents(children)[-1])

    def var(self, meta, children):
        return ast.Var(self._span(meta), children[0].value)

    def int_lit(self, meta, children):
        return ast.Literal(self._span(meta), int(children[0].value))

    def str_lit(self, meta, children):
        return ast.Literal(self._span(meta), _unescape(children[0].value))

    def true_lit(self, meta, children):
        return ast.Literal(self._span(meta), True)

    def false_lit(self, meta, children):
        return ast.Literal(self._span(meta), False)

    def unit_lit(self, meta, children):
        return ast.Literal(self._span(meta), None)

    def paren(self, meta, children):
        return _nodes(children)[0]

    def tuple(self, meta, children):
        return ast.TupleExpr(self._span(meta), _nodes(children))

    def summon(self, meta, children):
        return ast.Summon(self._span(meta), _nodes(children)[0])

    def sigma_intro(self, meta, children):
        span = self._span(meta)
        if _idents(children)[0] != "Sigma":
            raise CapError(Code.E_PARSE, span, "only `new Sigma { ... }` is supported")
        fields = {v.name: v.value for v in _nodes(children)}
        if set(fields) != {"a", "b"}:
            raise CapError(Code.E_PARSE, span, "a Sigma literal defines exactly the fields a and b")
        return ast.SigmaIntro(span, fields["a"], fields["b"])


# Parse --------------------------------------------------------------------------------------------

def _expected(e):
    names = sorted(n for n in getattr(e, "expected", ()) or () if not n.startswith("_"))
    return ", ".join(names)

def parse_program(source, file="<input>"):
    """Parse a whole `.cap` source into a Program node, raising CapError(E_PARSE) on failure."""
    source = source.replace("\r\n", "\n")
    try:
        tree = cap_lark().parse(source)
    except UnexpectedCharacters as e:
        char = source[e.pos_in_stream] if 0 <= e.pos_in_stream < len(source) else "?"
        raise CapError(Code.E_PARSE, error_span(e, file), f"illegal character {char!r}")
    except UnexpectedToken as e:
        if e.token.type == "$END":
            raise CapError(Code.E_PARSE, error_span(e, file),
                f"unexpected end of input, expected one of: {_expected(e)}")
        raise CapError(Code.E_PARSE, token_span(e.token, file),
            f"unexpected {e.token.value!r}, expected one of: {_expected(e)}")
    except UnexpectedEOF as e:
        raise CapError(Code.E_PARSE, error_span(e, file),
            f"unexpected end of input, expected one of: {_expected(e)}")
    try:
        program = SurfaceBuilder(file).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, CapError):
            raise e.orig_exc
        raise
    logger.debug("Parsed %s: %d declarations.", file, len(program.decls))
    return program
