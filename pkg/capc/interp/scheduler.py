#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Cooperative FIFO scheduler.

Tasks are generators produced by the interpreter; a task yields BLOCKED when it cannot make
progress (receiving on an empty channel) and is then moved to the back of the queue. A task runs
until it blocks or finishes.
"""

import logging

from collections import deque
from dataclasses import dataclass
from typing import Any, Generator

from capc.diagnostics import RuntimeFault

logger = logging.getLogger(__name__)

BLOCKED            = object()
DEFAULT_STEP_LIMIT = 100000

# Task ---------------------------------------------------------------------------------------------

@dataclass
class Task:
    id     : int
    gen    : Generator
    done   : bool = False
    result : Any  = None

# Scheduler ----------------------------------------------------------------------------------------

class Scheduler:
    def __init__(self, trace, step_limit=DEFAULT_STEP_LIMIT):
        self.trace      = trace
        self.step_limit = step_limit
        self.steps      = 0
        self.tasks      = []
        self.queue      = deque()
        self.current    = None

    @property
    def task_id(self):
        return self.current.id if self.current is not None else 0

    def spawn(self, gen):
        task = Task(len(self.tasks), gen)
        self.tasks.append(task)
        self.queue.append(task)
        logger.debug("Spawned task %d.", task.id)
        return task

    def tick(self):
        """Count one evaluation step."""
        self.steps += 1
        if self.steps > self.step_limit:
            raise RuntimeFault("R_DEADLOCK", f"step limit of {self.step_limit} exceeded")

    def run(self, main):
        """Run `main` (task 0) and every task it spawns to completion; returns main's result."""
        first = self.spawn(main)
        idle  = 0
        while self.queue:
            task = self.queue.popleft()
            if self.current is not None and task is not self.current:
                self.trace.append("TaskSwitch", task.id)
                logger.debug("Switch to task %d.", task.id)
            self.current = task
            before = self.steps
            try:
                signal = next(task.gen)
            except StopIteration as stop:
                task.done   = True
                task.result = stop.value
                idle        = 0
                logger.debug("Task %d finished.", task.id)
                continue
            assert signal is BLOCKED, signal
            self.queue.append(task)
            idle = idle + 1 if self.steps == before else 0
            if idle > len(self.queue):
                blocked = ", ".join(str(t.id) for t in self.queue)
                raise RuntimeFault("R_DEADLOCK", f"every task is blocked (tasks {blocked})")
        return first.result
