#!/usr/bin/env python3

#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

import sys
import logging
import argparse

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator
from pydantic.alias_generators import to_camel

from capc.corpus import run_corpus
from capc.diagnostics import Code, RuntimeFault, color_enabled, render
from capc.interp import Interpreter
from capc.interp.scheduler import DEFAULT_STEP_LIMIT
from capc.pipeline import compile_file, merge_diagnostics
from capc.syntax import printer
from capc.typer import elab
from capc.typesys.types import show

logger = logging.getLogger(__name__)

# Exit Codes ---------------------------------------------------------------------------------------

EXIT_OK          = 0
EXIT_DIAGNOSTICS = 1
EXIT_INTERNAL    = 2

EXPLAIN_ALL = "all"

# Driver Config ------------------------------------------------------------------------------------

class DriverConfig(BaseModel):
    """
    Validated command line.

    Parameters:
    - command (str)         : check, run, dump or test.
    - files (list)          : Input .cap files (the corpus directory for `test`).
    - phase (str)           : Phase printed by `dump`.
    - format (str)          : Diagnostic format, human or json.
    - scala_compat (bool)   : Resolve implicits without filtering killed candidates.
    - no_effect_check (bool): Skip the effect checker (run only).
    - explain (str)         : Print witnesses: "all", one diagnostic code, or None for none.
    - input_script (str)    : File whose lines feed readLine.
    - seed (int)            : Seed of randomInt.
    - step_limit (int)      : Interpreter step limit.
    """
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, frozen=True)

    command         : Literal["check", "run", "dump", "test"]
    files           : List[str]                                   = []
    phase           : Literal["desugar", "types", "anf", "elab"] = "anf"
    format          : Literal["human", "json"]                    = "human"
    scala_compat    : bool                                        = False
    no_effect_check : bool                                        = False
    explain         : Optional[str]                               = None
    direct          : bool                                        = False
    input_script    : Optional[str]                               = None
    trace           : Optional[str]                               = None
    seed            : int                                         = 0
    step_limit      : int                                         = DEFAULT_STEP_LIMIT

    @model_validator(mode="after")
    def check_flags(self):
        if self.no_effect_check and self.command != "run":
            raise ValueError("--no-effect-check is only allowed with run")
        if self.step_limit <= 0:
            raise ValueError("--step-limit must be positive")
        if self.command == "check" and not self.files:
            raise ValueError("check needs at least one file")
        if self.explain not in (None, EXPLAIN_ALL) and self.explain not in Code.__members__:
            raise ValueError(f"--explain: unknown diagnostic code {self.explain}")
        return self

# Commands -----------------------------------------------------------------------------------------

def explains(config, d):
    return config.explain == EXPLAIN_ALL or config.explain == d.code.value

def print_diagnostics(comps, config, stream=None):
    diagnostics = merge_diagnostics(comps)
    if config.format == "json":
        for d in diagnostics:
            print(render(d, mode="json"))
        return diagnostics
    stream  = stream if stream is not None else sys.stderr
    sources = {}
    for c in comps:
        sources.update(c.sources)
    color = color_enabled(stream)
    for d in diagnostics:
        print(render(d, sources=sources, color=color, explain=explains(config, d)), file=stream)
    return diagnostics

def cmd_check(config):
    comps = [compile_file(f, scala_compat=config.scala_compat) for f in config.files]
    return EXIT_DIAGNOSTICS if print_diagnostics(comps, config) else EXIT_OK

def cmd_run(config):
    comp = compile_file(config.files[0], scala_compat=config.scala_compat,
        effects=not config.no_effect_check)
    if print_diagnostics([comp], config):
        return EXIT_DIAGNOSTICS

    inputs = []
    if config.input_script is not None:
        with open(config.input_script, encoding="utf-8") as f:
            inputs = f.read().splitlines()

    program = comp.typed if config.direct else comp.program
    interp  = Interpreter(program, inputs=inputs, seed=config.seed, step_limit=config.step_limit)
    fault  = None
    try:
        interp.run()
    except RuntimeFault as e:
        fault = e

    # Outputs and trace up to the fault are still reported.
    for text in interp.trace.outputs():
        print(text)
    if config.trace is not None:
        with open(config.trace, "w", encoding="utf-8") as f:
            f.write(interp.trace.to_jsonl())
    if fault is not None:
        print(f"capc: runtime fault {fault}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    return EXIT_OK

def dump_desugar(comp):
    out = []
    for d in comp.kernel.user_defs(comp.file):
        if d.constructor is not None:
            out.append(f"def {d.mangled}: {show(d.type)} = new {d.constructor}")
        elif d.body is None:
            out.append(f"def {d.mangled}: {show(d.type)} = extern {d.prim!r}")
        else:
            out.append(f"def {d.mangled}: {show(d.type)} = {printer.print_expr(d.body)}")
    return "\n\n".join(out) + ("\n" if out else "")

def cmd_dump(config):
    comp = compile_file(config.files[0], scala_compat=config.scala_compat, effects=False)
    if config.phase == "desugar" and comp.kernel is not None:
        sys.stdout.write(dump_desugar(comp))
        return EXIT_OK
    if print_diagnostics([comp], config):
        return EXIT_DIAGNOSTICS
    if config.phase == "types":
        for d in comp.typed.user_defs(comp.file):
            print(f"{d.mangled}: {show(d.type)}")
    elif config.phase == "elab":
        sys.stdout.write(elab.print_program(comp.typed, comp.file))
    else:
        sys.stdout.write(elab.print_program(comp.program, comp.file))
    return EXIT_OK

def cmd_test(config):
    directory = config.files[0] if config.files else "corpus"
    report    = run_corpus(directory)
    for line in report.lines(color=color_enabled(sys.stdout)):
        print(line)
    return EXIT_OK if report.passed else EXIT_DIAGNOSTICS

COMMANDS = {
    "check" : cmd_check,
    "run"   : cmd_run,
    "dump"  : cmd_dump,
    "test"  : cmd_test,
}

# Argument Parsing ---------------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="capc", description="Cap checker and interpreter.")
    parser.add_argument("--verbose", action="store_true", help="Enable debug logging.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="Type and effect check files.")
    check.add_argument("files", nargs="*",                                           help="Input .cap files.")
    check.add_argument("--format",       default="human", choices=["human", "json"], help="Diagnostic format.")
    check.add_argument("--scala-compat", action="store_true",                        help="Unfiltered implicit resolution.")
    check.add_argument("--explain",      nargs="?", const=EXPLAIN_ALL, metavar="CODE", help="Print saturation witnesses (only for CODE if given).")

    run = sub.add_parser("run", help="Check and run a file.")
    run.add_argument("file",                                                      help="Input .cap file.")
    run.add_argument("--input",           default=None,                           help="Input script (one readLine per line).")
    run.add_argument("--seed",            default=0, type=int,                    help="Random seed.")
    run.add_argument("--trace",           default=None,                           help="Write the trace as JSON lines.")
    run.add_argument("--step-limit",      default=DEFAULT_STEP_LIMIT, type=int,   help="Interpreter step limit.")
    run.add_argument("--no-effect-check", action="store_true",                    help="Skip the effect checker.")
    run.add_argument("--direct",          action="store_true",                    help="Run the program before ANF.")
    run.add_argument("--scala-compat",    action="store_true",                    help="Unfiltered implicit resolution.")

    dump = sub.add_parser("dump", help="Print an intermediate representation.")
    dump.add_argument("file",                                                                help="Input .cap file.")
    dump.add_argument("--phase",        default="anf", choices=["desugar", "types", "anf", "elab"], help="Phase to print.")
    dump.add_argument("--scala-compat", action="store_true",                                  help="Unfiltered implicit resolution.")

    test = sub.add_parser("test", help="Run the golden corpus.")
    test.add_argument("dir", nargs="?", default="corpus", help="Corpus directory.")
    return parser

def make_config(args):
    files = getattr(args, "files", None)
    if files is None:
        files = [args.file] if hasattr(args, "file") else [args.dir]
    explain = getattr(args, "explain", None)
    if explain not in (None, EXPLAIN_ALL) and explain not in Code.__members__:
        # `--explain file.cap`: the optional code swallowed the first file.
        files, explain = [explain] + files, EXPLAIN_ALL
    return DriverConfig(
        command         = args.command,
        files           = files,
        phase           = getattr(args, "phase",           "anf"),
        format          = getattr(args, "format",          "human"),
        scala_compat    = getattr(args, "scala_compat",    False),
        no_effect_check = getattr(args, "no_effect_check", False),
        explain         = explain,
        direct          = getattr(args, "direct",          False),
        input_script    = getattr(args, "input",           None),
        trace           = getattr(args, "trace",           None),
        seed            = getattr(args, "seed",            0),
        step_limit      = getattr(args, "step_limit",      DEFAULT_STEP_LIMIT),
    )

# Main ---------------------------------------------------------------------------------------------

def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INTERNAL

    logging.basicConfig(
        level  = logging.DEBUG if args.verbose else logging.WARNING,
        format = "%(levelname)s %(name)s: %(message)s",
        stream = sys.stderr,
    )

    try:
        config = make_config(args)
    except ValidationError as e:
        for error in e.errors():
            print(f"capc: {error['msg']}", file=sys.stderr)
        return EXIT_INTERNAL

    try:
        return COMMANDS[config.command](config)
    except OSError as e:
        print(f"capc: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        logger.exception("Internal error.")
        return EXIT_INTERNAL

if __name__ == "__main__":
    sys.exit(main())
