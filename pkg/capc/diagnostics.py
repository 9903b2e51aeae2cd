#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import os
import sys
import json
import enum
import logging

from typing import List, Tuple

from pydantic import BaseModel, ConfigDict

from capc.syntax.span import SourceSpan

logger = logging.getLogger(__name__)

# Codes --------------------------------------------------------------------------------------------

class Code(str, enum.Enum):
    E_PARSE                = "E_PARSE"
    E_DESUGAR              = "E_DESUGAR"
    E_UNKNOWN_METHOD       = "E_UNKNOWN_METHOD"
    E_UNBOUND              = "E_UNBOUND"
    E_TYPE_MISMATCH        = "E_TYPE_MISMATCH"
    E_PATH_MISMATCH        = "E_PATH_MISMATCH"
    E_NO_IMPLICIT          = "E_NO_IMPLICIT"
    E_AMBIGUOUS_IMPLICIT   = "E_AMBIGUOUS_IMPLICIT"
    E_KILLED_USE           = "E_KILLED_USE"
    E_KILL_UNDECLARED      = "E_KILL_UNDECLARED"
    E_ESCAPE               = "E_ESCAPE"
    E_SUBQUAL              = "E_SUBQUAL"
    E_SUBST_PATH           = "E_SUBST_PATH"
    E_UNRESOLVED_TYPEPARAM = "E_UNRESOLVED_TYPEPARAM"
    E_BOUND                = "E_BOUND"
    E_TYPEFUN_STUCK        = "E_TYPEFUN_STUCK"

# Diagnostic ---------------------------------------------------------------------------------------

class Diagnostic(BaseModel):
    """
    A single checker finding.

    Parameters:
    - code (Code)           : Closed diagnostic code.
    - span (SourceSpan)     : Primary location, always inside the checked file.
    - message (str)         : Human readable text.
    - related (list)        : Secondary (span, note) pairs.
    - witness (list)        : Optional explanation chain (printed with --explain).
    """
    model_config = ConfigDict(frozen=True)

    code    : Code
    span    : SourceSpan
    message : str
    related : List[Tuple[SourceSpan, str]] = []
    witness : List[str] = []

    def sort_key(self):
        s = self.span
        return (s.file, s.start_line, s.start_col, self.code.value)

class CapError(Exception):
    """Raised inside a phase; the per-definition driver turns it into a recorded Diagnostic."""
    def __init__(self, code, span, message, related=None, witness=None):
        self.diagnostic = Diagnostic(code=code, span=span, message=message,
            related=list(related or []), witness=list(witness or []))
        super().__init__(f"{code.value}: {message}")

class RuntimeFault(Exception):
    """Interpreter failure: R_GUARD, R_DEADLOCK or R_UNBOUND."""
    def __init__(self, code, message):
        assert code in ("R_GUARD", "R_DEADLOCK", "R_UNBOUND")
        self.code    = code
        self.message = message
        super().__init__(f"{code}: {message}")

def sort_diagnostics(diagnostics):
    return sorted(diagnostics, key=Diagnostic.sort_key)

# Color Constants ----------------------------------------------------------------------------------

ANSI_COLOR_RED    = "\x1b[31m"
ANSI_COLOR_GREEN  = "\x1b[32m"
ANSI_COLOR_YELLOW = "\x1b[33m"
ANSI_COLOR_BLUE   = "\x1b[34m"
ANSI_COLOR_BOLD   = "\x1b[1m"
ANSI_COLOR_RESET  = "\x1b[0m"

def color_enabled(stream=None):
    if os.environ.get("CAPC_COLOR", "1") == "0":
        return False
    stream = stream if stream is not None else sys.stderr
    return hasattr(stream, "isatty") and stream.isatty()

# Render -------------------------------------------------------------------------------------------

def _excerpt(span, source, color):
    lines = source.splitlines()
    if not (1 <= span.start_line <= len(lines)):
        return []
    line   = lines[span.start_line - 1]
    gutter = f"{span.start_line:5d} | "
    end    = span.end_col if span.end_line == span.start_line else len(line)
    width  = max(1, end - span.start_col + 1)
    caret  = " " * (len(gutter) - 2) + "| " + " " * (span.start_col - 1) + "^" * width
    if color:
        caret = caret[:len(gutter)] + ANSI_COLOR_RED + caret[len(gutter):] + ANSI_COLOR_RESET
    return [gutter + line, caret]

def render(d, mode="human", sources=None, color=False, explain=False):
    """Render one diagnostic as human text (with excerpt) or as one JSON line."""
    if mode == "json":
        return json.dumps({
            "code"      : d.code.value,
            "file"      : d.span.file,
            "startLine" : d.span.start_line,
            "startCol"  : d.span.start_col,
            "endLine"   : d.span.end_line,
            "endCol"    : d.span.end_col,
            "message"   : d.message,
        })
    assert mode == "human", mode
    head = f"{d.span}: error[{d.code.value}]: {d.message}"
    if color:
        head = f"{ANSI_COLOR_BOLD}{d.span}: {ANSI_COLOR_RED}error[{d.code.value}]{ANSI_COLOR_RESET}: {d.message}"
    out = [head]
    source = (sources or {}).get(d.span.file)
    if source is not None:
        out += _excerpt(d.span, source, color)
    for span, note in d.related:
        note_line = f"  note: {span}: {note}"
        out.append(f"{ANSI_COLOR_BLUE}{note_line}{ANSI_COLOR_RESET}" if color else note_line)
    if explain and d.witness:
        out.append("  witness: " + " -> ".join(d.witness))
    return "\n".join(out)

# Binder of the first component inside the second component of a Σ type. Users write it `a`.
SIGMA_BINDER = "$a"

def display_name(name):
    """Strip the uniquifying suffix ("f$1" -> "f") from a checker-internal name."""
    if name == SIGMA_BINDER:
        return "a"
    if name.startswith("$"):
        return name
    head, sep, tail = name.rpartition("$")
    if sep and tail.isdigit():
        return head
    return name
