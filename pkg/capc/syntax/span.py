#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

from dataclasses import dataclass

# Source Span --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class SourceSpan:
    """1-based source range; end column is inclusive of the last character."""
    file       : str
    start_line : int
    start_col  : int
    end_line   : int
    end_col    : int

    def __post_init__(self):
        assert (self.start_line, self.start_col) <= (self.end_line, self.end_col), self

    def contains(self, other):
        return (self.file == other.file and
            (self.start_line, self.start_col) <= (other.start_line, other.start_col) and
            (other.end_line, other.end_col) <= (self.end_line, self.end_col))

    def join(self, other):
        return SourceSpan(self.file,
            *min((self.start_line, self.start_col), (other.start_line, other.start_col)),
            *max((self.end_line, self.end_col), (other.end_line, other.end_col)))

    def __str__(self):
        return f"{self.file}:{self.start_line}:{self.start_col}"

NO_SPAN = SourceSpan("<builtin>", 1, 1, 1, 1)
