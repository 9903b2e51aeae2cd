#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import io
import os
import json
import shutil
import tempfile
import unittest

from contextlib import redirect_stderr, redirect_stdout
from unittest import mock

from pydantic import ValidationError

from capc.cli import EXIT_DIAGNOSTICS, EXIT_INTERNAL, EXIT_OK, DriverConfig, main

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "..", "corpus")

def corpus(name):
    return os.path.join(CORPUS_DIR, name)

# Helpers ------------------------------------------------------------------------------------------

def capc(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()

# Test Driver Config -------------------------------------------------------------------------------

class TestDriverConfig(unittest.TestCase):
    def test_defaults(self):
        config = DriverConfig(command="check", files=["a.cap"])
        self.assertEqual(config.format, "human")
        self.assertEqual(config.phase, "anf")
        self.assertFalse(config.scala_compat)

    def test_camel_case_aliases(self):
        config = DriverConfig.model_validate({"command": "run", "stepLimit": 5, "inputScript": "in.txt"})
        self.assertEqual(config.step_limit, 5)
        self.assertEqual(config.input_script, "in.txt")

    def test_no_effect_check_only_with_run(self):
        with self.assertRaises(ValidationError):
            DriverConfig(command="check", no_effect_check=True)
        DriverConfig(command="run", no_effect_check=True)

    def test_step_limit_positive(self):
        with self.assertRaises(ValidationError):
            DriverConfig(command="run", step_limit=0)

    def test_unknown_format(self):
        with self.assertRaises(ValidationError):
            DriverConfig(command="check", format="xml")

    def test_explain_code(self):
        config = DriverConfig(command="check", files=["a.cap"], explain="E_KILLED_USE")
        self.assertEqual(config.explain, "E_KILLED_USE")
        with self.assertRaises(ValidationError):
            DriverConfig(command="check", files=["a.cap"], explain="E_NOPE")
        with self.assertRaises(ValidationError):
            DriverConfig(command="check")

# Test Commands ------------------------------------------------------------------------------------

class TestCommands(unittest.TestCase):
    def test_check_ok(self):
        code, out, _ = capc("check", corpus("file_ok.cap"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, "")

    def test_check_human(self):
        with mock.patch.dict(os.environ, {"CAPC_COLOR": "0"}):
            code, _, err = capc("check", corpus("stale_write.cap"))
        self.assertEqual(code, EXIT_DIAGNOSTICS)
        self.assertIn("E_KILLED_USE", err)
        self.assertIn("stale_write.cap:13", err)

    def test_check_explain(self):
        path = corpus("alias_kill.cap")
        with mock.patch.dict(os.environ, {"CAPC_COLOR": "0"}):
            for argv, shown in [
                (["--explain", path],                    True),
                ([path, "--explain"],                    True),
                (["--explain", "E_KILLED_USE", path],    True),
                (["--explain", "E_ESCAPE", path],        False),
                ([path],                                 False),
            ]:
                with self.subTest(argv=argv):
                    code, _, err = capc("check", *argv)
                    self.assertEqual(code, EXIT_DIAGNOSTICS)
                    self.assertIn("E_KILLED_USE", err)
                    self.assertEqual("witness:" in err, shown)

    def test_check_json(self):
        code, out, _ = capc("check", "--format", "json", corpus("leak_scoped.cap"))
        self.assertEqual(code, EXIT_DIAGNOSTICS)
        records = [json.loads(line) for line in out.splitlines()]
        self.assertEqual([(r["code"], r["startLine"]) for r in records],
            [("E_ESCAPE", 10), ("E_ESCAPE", 15), ("E_ESCAPE", 23), ("E_ESCAPE", 28)])
        self.assertEqual(set(records[0]),
            {"code", "file", "startLine", "startCol", "endLine", "endCol", "message"})

    def test_check_several_files(self):
        code, out, _ = capc("check", "--format", "json", corpus("file_ok.cap"), corpus("stale_write.cap"))
        self.assertEqual(code, EXIT_DIAGNOSTICS)
        self.assertEqual(len(out.splitlines()), 1)

    def test_run(self):
        code, out, _ = capc("run", corpus("file_ok.cap"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, "Hello\n")

    def test_run_with_input_and_trace(self):
        tmp = tempfile.mkdtemp()
        try:
            script = os.path.join(tmp, "input.txt")
            trace  = os.path.join(tmp, "trace.jsonl")
            with open(script, "w", encoding="utf-8") as f:
                f.write("hello\nmore\nworld\nstop\n")
            code, out, _ = capc("run", corpus("echo.cap"), "--input", script, "--trace", trace)
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(out.splitlines(), ["hello", "world"])
            with open(trace, encoding="utf-8") as f:
                events = [json.loads(line)["event"] for line in f]
            self.assertIn("TaskSwitch", events)
        finally:
            shutil.rmtree(tmp)

    def test_run_without_effect_check_hits_guard(self):
        code, _, err = capc("run", "--no-effect-check", corpus("stale_write.cap"))
        self.assertEqual(code, EXIT_DIAGNOSTICS)
        self.assertIn("R_GUARD", err)

    def test_run_direct(self):
        code, out, _ = capc("run", "--direct", corpus("file_sigma.cap"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, "Hello\n")

    def test_dump_phases(self):
        for phase in ["desugar", "types", "anf", "elab"]:
            code, out, _ = capc("dump", "--phase", phase, corpus("file_ok.cap"))
            self.assertEqual(code, EXIT_OK, phase)
            self.assertIn("main", out, phase)

    def test_test_command(self):
        code, out, _ = capc("test", CORPUS_DIR)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("CAP CORPUS", out)

    def test_missing_file(self):
        code, _, err = capc("check", "does_not_exist.cap")
        self.assertEqual(code, EXIT_INTERNAL)
        self.assertIn("does_not_exist.cap", err)

    def test_test_modules_are_scripts(self):
        test_dir = os.path.dirname(os.path.abspath(__file__))
        for name in sorted(os.listdir(test_dir)):
            if name.startswith("test_") and name.endswith(".py"):
                with open(os.path.join(test_dir, name), encoding="utf-8") as f:
                    self.assertEqual(f.readline(), "#!/usr/bin/env python3\n", name)

    def test_bad_arguments(self):
        self.assertEqual(capc("check", "--no-effect-check", corpus("file_ok.cap"))[0], EXIT_INTERNAL)
        self.assertEqual(capc("frobnicate")[0], EXIT_INTERNAL)
        self.assertEqual(capc("run", "--step-limit", "0", corpus("file_ok.cap"))[0], EXIT_INTERNAL)

if __name__ == "__main__":
    unittest.main()
