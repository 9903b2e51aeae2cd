#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import random
import unittest

from capc.diagnostics import Code, RuntimeFault
from capc.interp import run_program
from capc.pipeline import compile_source

PROGRAMS = 1000
PER_FILE = 100

# Program Generator --------------------------------------------------------------------------------

def file_def(rng, name):
    """
    One definition walking the naive file API: up to 6 calls over at most 3 files, with handles
    picked by their static type only, so killed handles get reused too.
    """
    lines = [f"def {name}(): Unit = {{"]
    held  = []  # (variable, "Closed" | "Open")
    files = 0

    def fresh(state):
        var = f"v{len(held)}"
        held.append((var, state))
        return var

    for _ in range(rng.randint(1, 6)):
        closed = [v for v, s in held if s == "Closed"]
        opened = [v for v, s in held if s == "Open"]
        ops    = []
        if files < 3:
            ops.append("new")
        if closed:
            ops.append("open")
        if opened:
            ops += ["close", "write", "read"]
        if len(closed) >= 2 or len(opened) >= 2:
            ops.append("alias")
        op = rng.choice(ops)
        if op == "new":
            lines.append(f'  val {fresh("Closed")} = newFile("f{files}.txt")')
            files += 1
        elif op == "open":
            src = rng.choice(closed)
            lines.append(f"  val {fresh('Open')} = open({src})")
        elif op == "close":
            src = rng.choice(opened)
            lines.append(f"  val {fresh('Closed')} = close({src})")
        elif op == "write":
            lines.append(f'  write({rng.choice(opened)}, "x")')
        elif op == "read":
            lines.append(f"  println(read({rng.choice(opened)}))")
        else:
            pools = [(s, vs) for s, vs in (("Closed", closed), ("Open", opened)) if len(vs) >= 2]
            state, pool = rng.choice(pools)
            a, b = rng.sample(pool, 2)
            lines.append(f"  val {fresh(state)} = if (randomInt(2) == 0) {a} else {b}")
    lines += ["  ()", "}"]
    return lines

def fuzz_file(rng, first, count):
    """Source with `count` definitions, and the (name, first line, last line) of each."""
    lines, defs = [], []
    for i in range(first, first + count):
        body = file_def(rng, f"p{i}")
        defs.append((f"p{i}", len(lines) + 1, len(lines) + len(body)))
        lines += body
    return "\n".join(lines) + "\n", defs

def owner(defs, line):
    for name, start, end in defs:
        if start <= line <= end:
            return name
    return None

# Test Fuzz ----------------------------------------------------------------------------------------

class TestFuzz(unittest.TestCase):
    def test_programs(self):
        rng      = random.Random(1)
        accepted = 0
        rejected = 0
        caught   = 0
        for first in range(0, PROGRAMS, PER_FILE):
            source, defs = fuzz_file(rng, first, PER_FILE)
            comp = compile_source(source, "fuzz.cap")
            self.assertEqual(comp.phase, "effects", comp.diagnostics)
            self.assertTrue(all(d.code == Code.E_KILLED_USE for d in comp.diagnostics),
                comp.diagnostics)
            bad = {owner(defs, d.span.start_line): d for d in comp.diagnostics}
            self.assertEqual(len(bad), len(comp.diagnostics))

            # Accepted definitions never trip a runtime guard.
            for name, _, _ in defs:
                if name in bad:
                    continue
                accepted += 1
                try:
                    _, trace = run_program(comp.program, entry=name)
                except RuntimeFault as e:
                    self.fail(f"{name}: {e}")
                self.assertEqual(trace.guards(), [], name)

            # Rejected definitions either fail at run time without the checker or carry a witness.
            unchecked = compile_source(source, "fuzz.cap", effects=False)
            self.assertTrue(unchecked.ok, unchecked.diagnostics)
            for name, d in bad.items():
                rejected += 1
                try:
                    run_program(unchecked.program, entry=name)
                except RuntimeFault as e:
                    if e.code == "R_GUARD":
                        caught += 1
                        continue
                if d.witness:
                    caught += 1
        self.assertEqual(accepted + rejected, PROGRAMS)
        self.assertGreater(accepted, 0)
        self.assertGreater(rejected, 0)
        self.assertGreaterEqual(caught, 0.95 * rejected)

    def test_stale_write_reported_once(self):
        source = "\n".join([
            "def main(): Unit = {",
            '  val v0 = newFile("f0.txt")',
            "  val v1 = open(v0)",
            "  val v2 = close(v1)",
            '  write(v1, "x")',
            '  write(v1, "y")',
            "  ()",
            "}",
            "",
        ])
        comp = compile_source(source, "fuzz.cap")
        self.assertEqual([(d.code, d.span.start_line) for d in comp.diagnostics],
            [(Code.E_KILLED_USE, 5)])
        self.assertEqual(comp.diagnostics[0].witness, ["v1"])

if __name__ == "__main__":
    unittest.main()
