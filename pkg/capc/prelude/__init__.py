#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""In-language libraries loaded ahead of every user file."""

import os
import functools

from capc.syntax.parser import parse_program

PRELUDE_DIR   = os.path.dirname(__file__)
PRELUDE_FILES = ["core.cap", "file.cap", "lock.cap", "dom.cap", "chan.cap"]

def prelude_file(name):
    return f"<prelude>/{name}"

def is_prelude(file):
    return file.startswith("<prelude>/")

@functools.lru_cache(maxsize=None)
def prelude_sources():
    """(file, source) of every prelude library, in load order."""
    out = []
    for name in PRELUDE_FILES:
        with open(os.path.join(PRELUDE_DIR, name), encoding="utf-8") as f:
            out.append((prelude_file(name), f.read()))
    return tuple(out)

def load_prelude():
    """Parsed prelude units, ready to be passed to `desugar` ahead of the user's units."""
    return [(parse_program(source, file), file) for file, source in prelude_sources()]
