#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import os
import logging

from functools import lru_cache

from lark import Lark, Token
from lark.exceptions import UnexpectedCharacters, UnexpectedInput
from lark.lark import PostLex

from capc.diagnostics import Code, CapError
from capc.syntax.span import SourceSpan

logger = logging.getLogger(__name__)

GRAMMAR_FILE = os.path.join(os.path.dirname(__file__), "cap.lark")

# Tokens after which a newline-separated `{` or `(` starts a new statement.
EXPR_END_TOKENS   = {"IDENT", "INT", "STRING", "RPAR", "RSQB", "RBRACE", "TRUE", "FALSE"}
STATEMENT_OPENERS = {"LBRACE", "LPAR"}

# Post Lexer ---------------------------------------------------------------------------------------

class CapPostLex(PostLex):
    """Drop NEWLINE/SEMI tokens, turning a separator run before `{` or `(` into _BLOCKSEP."""
    always_accept = ("NEWLINE", "SEMI")

    def process(self, stream):
        previous  = None
        separated = False
        for tok in stream:
            if tok.type in self.always_accept:
                separated = True
                continue
            if (separated and tok.type in STATEMENT_OPENERS and previous is not None and
                previous.type in EXPR_END_TOKENS):
                yield Token.new_borrow_pos("_BLOCKSEP", "", tok)
            separated = False
            previous  = tok
            yield tok

# Lark Instance ------------------------------------------------------------------------------------

@lru_cache(maxsize=1)
def cap_lark():
    with open(GRAMMAR_FILE, "r", encoding="utf-8") as f:
        grammar = f.read()
    logger.debug("Building LALR tables from %s.", GRAMMAR_FILE)
    return Lark(grammar,
        parser               = "lalr",
        lexer                = "basic",
        postlex              = CapPostLex(),
        propagate_positions  = True,
        maybe_placeholders   = False,
    )

# Spans --------------------------------------------------------------------------------------------

def token_span(tok, file):
    end_line = tok.end_line if tok.end_line is not None else tok.line
    end_col  = (tok.end_column - 1) if tok.end_column is not None else tok.column
    if (end_line, end_col) < (tok.line, tok.column):
        end_line, end_col = tok.line, tok.column
    return SourceSpan(file, tok.line, tok.column, end_line, end_col)

def error_span(e, file):
    line   = getattr(e, "line", None) or 1
    column = getattr(e, "column", None) or 1
    if line < 1:
        line, column = 1, 1
    return SourceSpan(file, line, column, line, column)

# Tokenize -----------------------------------------------------------------------------------------

def tokenize(source, file="<input>"):
    """Return the significant tokens of `source` (comments, blanks and separators dropped)."""
    source = source.replace("\r\n", "\n")
    try:
        return list(cap_lark().lex(source))
    except UnexpectedCharacters as e:
        char = source[e.pos_in_stream] if 0 <= e.pos_in_stream < len(source) else "?"
        raise CapError(Code.E_PARSE, error_span(e, file), f"illegal character {char!r}")
    except UnexpectedInput as e:
        raise CapError(Code.E_PARSE, error_span(e, file), "unexpected input")
