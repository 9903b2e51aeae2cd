#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import json
import unittest

from capc.diagnostics import RuntimeFault
from capc.interp import Interpreter, run_program
from capc.interp.prims import PRIMS
from capc.interp.scheduler import BLOCKED, Scheduler
from capc.interp.values import Instance, Resource, Trace
from capc.pipeline import compile_source
from capc.typer import elab

# Helpers ------------------------------------------------------------------------------------------

def compiled(source, effects=True):
    comp = compile_source(source, "t.cap", effects=effects)
    assert comp.ok, comp.diagnostics
    return comp.program

STALE_WRITE = (
    "def main(): Unit = {\n"
    "  val fOpen = open(newFile(\"a.txt\"))\n"
    "  val fClosed = close(fOpen)\n"
    "  write(fOpen, \"World\")\n"
    "  ()\n"
    "}\n"
)

ECHO_INPUT = (
    "def main(): Unit = {\n"
    "  val first = readLine()\n"
    "  val second = readLine()\n"
    "  println(first ++ second)\n"
    "  println(readLine())\n"
    "}\n"
)

RANDOM = (
    "def main(): Unit = {\n"
    "  println(toString(randomInt(1000)))\n"
    "  println(toString(randomInt(1000)))\n"
    "}\n"
)

# Test Scheduler -----------------------------------------------------------------------------------

class TestScheduler(unittest.TestCase):
    def test_fifo_until_blocked(self):
        log   = []
        sched = Scheduler(Trace())
        def task(name, rounds):
            for i in range(rounds):
                log.append(f"{name}{i}")
                sched.tick()
                yield BLOCKED
        def main():
            sched.spawn(task("b", 2))
            log.append("a")
            sched.tick()
            return "done"
            yield
        self.assertEqual(sched.run(main()), "done")
        self.assertEqual(log, ["a", "b0", "b1"])

    def test_deadlock(self):
        sched = Scheduler(Trace())
        def stuck():
            while True:
                yield BLOCKED
        with self.assertRaises(RuntimeFault) as cm:
            sched.run(stuck())
        self.assertEqual(cm.exception.code, "R_DEADLOCK")

    def test_step_limit(self):
        sched = Scheduler(Trace(), step_limit=10)
        def busy():
            while True:
                sched.tick()
                yield BLOCKED
        with self.assertRaises(RuntimeFault) as cm:
            sched.run(busy())
        self.assertEqual(cm.exception.code, "R_DEADLOCK")

# Test Interpreter ---------------------------------------------------------------------------------

class TestInterpreter(unittest.TestCase):
    def test_guard_on_stale_handle(self):
        program = compiled(STALE_WRITE, effects=False)
        interp  = Interpreter(program)
        with self.assertRaises(RuntimeFault) as cm:
            interp.run()
        self.assertEqual(cm.exception.code, "R_GUARD")
        (guard,) = interp.trace.guards()
        self.assertEqual(guard.detail, "expected Open, actual Closed")

    def test_inputs(self):
        _, trace = run_program(compiled(ECHO_INPUT), inputs=["ab", "cd", "ef"])
        self.assertEqual(trace.outputs(), ["abcd", "ef"])

    def test_inputs_exhausted(self):
        _, trace = run_program(compiled(ECHO_INPUT), inputs=["x"])
        self.assertEqual(trace.outputs(), ["x", ""])

    def test_seeded_random_is_deterministic(self):
        program = compiled(RANDOM)
        _, first  = run_program(program, seed=3)
        _, second = run_program(program, seed=3)
        self.assertEqual(first.to_jsonl(), second.to_jsonl())
        self.assertTrue(all(0 <= int(v) < 1000 for v in first.outputs()))

    def test_step_limit(self):
        with self.assertRaises(RuntimeFault) as cm:
            run_program(compiled(ECHO_INPUT), step_limit=5)
        self.assertEqual(cm.exception.code, "R_DEADLOCK")

    def test_missing_entry(self):
        with self.assertRaises(RuntimeFault) as cm:
            run_program(compiled("def helper(): Int = 1\n"))
        self.assertEqual(cm.exception.code, "R_UNBOUND")

    def test_trace_jsonl(self):
        _, trace = run_program(compiled("def main(): Unit = println(\"hi\")\n"))
        (line,) = trace.to_jsonl().splitlines()
        self.assertEqual(json.loads(line), {"event": "Output", "task": 0, "resource": None, "detail": "hi"})

    def test_future_runs_after_main(self):
        source = (
            "def main(): Unit = {\n"
            "  cFuture {\n"
            "    println(\"task\")\n"
            "  }\n"
            "  println(\"main\")\n"
            "}\n"
        )
        _, trace = run_program(compiled(source))
        self.assertEqual(trace.outputs(), ["main", "task"])
        self.assertIn("TaskSwitch", [e.event for e in trace])

# Test Primitives ----------------------------------------------------------------------------------

class TestPrimitives(unittest.TestCase):
    def setUp(self):
        self.rt = Interpreter(elab.ElabProgram([]))

    def fault(self, fn, *args):
        with self.assertRaises(RuntimeFault) as cm:
            fn(self.rt, *args)
        return cm.exception

    def details(self, resource):
        return [e.detail for e in self.rt.trace if e.resource == resource.id]

    def test_unlock_twice(self):
        table = PRIMS["lock.newTable"](self.rt, 2).a
        PRIMS["lock.lock"](self.rt, table, None, None)
        PRIMS["lock.unlock"](self.rt, table, None, None)
        e = self.fault(PRIMS["lock.unlock"], table, None, None)
        self.assertEqual(e.code, "R_GUARD")
        self.assertEqual(self.details(table), ["lock", "unlock", "expected Held, actual Released"])

    def test_compute_before_lock_row(self):
        table = PRIMS["lock.newTable"](self.rt, 2).a
        PRIMS["lock.lock"](self.rt, table, None, None)
        row = PRIMS["lock.locateRow"](self.rt, table, 1, None).a
        e = self.fault(PRIMS["lock.computeOnRow"], row, None, None)
        self.assertEqual(e.code, "R_GUARD")
        PRIMS["lock.lockRow"](self.rt, table, row, None, None)
        PRIMS["lock.computeOnRow"](self.rt, row, None, None)
        self.assertEqual(self.details(row), ["expected Held, actual Released", "lockRow 1",
            "computeOnRow 1"])

    def dom(self):
        return Resource("DOM", self.rt.new_id(), "Building", payload={"stack": [], "html": []})

    def test_close_mismatched_element(self):
        tree = self.dom()
        PRIMS["dom.open"](self.rt, tree, Instance("DIV"), None)
        e = self.fault(PRIMS["dom.close"], tree, Instance("P"), None)
        self.assertEqual(e.code, "R_GUARD")
        self.assertEqual(tree.payload["stack"], ["div"])
        self.assertEqual(self.rt.trace.guards()[0].detail, "expected p, actual div")

    def test_close_on_empty_stack(self):
        tree = self.dom()
        e = self.fault(PRIMS["dom.close"], tree, Instance("DIV"), None)
        self.assertEqual(e.code, "R_GUARD")
        self.assertEqual(self.rt.trace.guards()[0].detail, "expected div, actual empty")

    def test_recv_without_peer_deadlocks(self):
        first, _ = (end.a for end in PRIMS["chan.newPair"](self.rt, None))
        with self.assertRaises(RuntimeFault) as cm:
            self.rt.scheduler.run(PRIMS["chan.recv"](self.rt, first, None, None))
        self.assertEqual(cm.exception.code, "R_DEADLOCK")

    def test_recursion_markers_emit_nothing(self):
        first, _ = (end.a for end in PRIMS["chan.newPair"](self.rt, None))
        for name in ("chan.recPush", "chan.recTop", "chan.recPop"):
            PRIMS[name](self.rt, first, None, None)
        self.assertEqual(list(self.rt.trace), [])

    def test_channel_duality(self):
        first, second = (end.a for end in PRIMS["chan.newPair"](self.rt, None))
        values   = [1, "two", True]
        received = []
        def receiver():
            for _ in values:
                got = yield from PRIMS["chan.recv"](self.rt, second, None, None)
                received.append(got.a)
        def main():
            self.rt.scheduler.spawn(receiver())
            for v in values:
                PRIMS["chan.send"](self.rt, first, v, None)
            return
            yield
        self.rt.scheduler.run(main())
        self.assertEqual(received, values)
        sent = [d.removeprefix("send ") for d in self.details(first)]
        got  = [d.removeprefix("recv ") for d in self.details(second)]
        self.assertEqual(sent, got)
        self.assertEqual(len(sent), len(values))

if __name__ == "__main__":
    unittest.main()
