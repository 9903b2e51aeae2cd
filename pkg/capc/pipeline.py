#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Phase ordering: syntax -> desugar -> typer -> ANF -> effects.

Each phase only runs when the previous one reported nothing, so every diagnostic has a single root
cause. The prelude libraries are parsed ahead of the user's file and checked with it.
"""

import logging

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from capc.desugar import KernelProgram, desugar
from capc.diagnostics import CapError, Diagnostic, sort_diagnostics
from capc.effects import effect_check
from capc.prelude import load_prelude, prelude_sources
from capc.syntax.parser import parse_program
from capc.typer.anf import anf_program
from capc.typer.elab import ElabProgram
from capc.typer.recheck import recheck_program
from capc.typer.typer import typecheck

logger = logging.getLogger(__name__)

# Compilation --------------------------------------------------------------------------------------

@dataclass
class Compilation:
    """Everything the phases produced for one file; later fields stay None after a failure."""
    file        : str
    sources     : Dict[str, str]
    diagnostics : List[Diagnostic]        = field(default_factory=list)
    kernel      : Optional[KernelProgram] = None
    typed       : Optional[ElabProgram]   = None
    program     : Optional[ElabProgram]   = None
    phase       : str                     = "syntax"

    @property
    def ok(self):
        return not self.diagnostics

def compile_source(source, file="<input>", scala_compat=False, effects=True):
    """
    Run the front end over one source text.

    `typed` is the elaborated program before ANF (used for direct evaluation), `program` the
    program after ANF; `phase` names the last phase that ran.
    """
    sources = dict(prelude_sources())
    sources[file] = source
    comp = Compilation(file, sources)

    try:
        units = load_prelude() + [(parse_program(source, file), file)]
        comp.phase  = "desugar"
        comp.kernel = desugar(units)
    except CapError as e:
        comp.diagnostics = [e.diagnostic]
        return comp

    comp.phase = "typer"
    typed, diagnostics = typecheck(comp.kernel, scala_compat)
    comp.typed = typed
    if diagnostics:
        comp.diagnostics = diagnostics
        return comp

    comp.phase   = "anf"
    comp.program = anf_program(typed)
    for problem in recheck_program(comp.program, comp.kernel):
        logger.warning("Re-check: %s.", problem)

    if effects:
        comp.phase = "effects"
        comp.diagnostics = effect_check(comp.program, files={file})
    logger.debug("Compiled %s: %d diagnostics.", file, len(comp.diagnostics))
    return comp

def compile_file(path, scala_compat=False, effects=True):
    with open(path, encoding="utf-8") as f:
        source = f.read()
    return compile_source(source, path, scala_compat=scala_compat, effects=effects)

def merge_diagnostics(compilations):
    """Diagnostics of several files in file-then-span order."""
    return sort_diagnostics([d for c in compilations for d in c.diagnostics])
