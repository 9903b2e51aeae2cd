#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""Cap: typestate via revocable capabilities, as a checker and interpreter."""

__version__ = "0.1.0"
