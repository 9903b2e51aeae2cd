#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Runtime values.

Unit, Bool, Int and String are the Python values None, bool, int and str; tuples are Python tuples.
Capabilities have no runtime representation of their own: they are Unit tokens, and the state
they stand for lives in the tag of the Resource they talk about.
"""

import json

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, Optional, Tuple

from pydantic import BaseModel

from capc.typer import elab

# Values -------------------------------------------------------------------------------------------

@dataclass
class Closure:
    param   : str
    body    : elab.ElabNode
    env     : Dict[str, Any] = field(repr=False, compare=False)
    by_name : bool           = False

@dataclass
class Partial:
    """A primitive or constructor waiting for the rest of its arguments."""
    defn : elab.ElabDef
    args : Tuple[Any, ...] = ()

@dataclass
class Instance:
    """Object of a plain class (`DIV()`)."""
    class_tag: str

@dataclass
class Resource:
    """Simulated resource; `state` is the dynamic tag the guards compare against."""
    class_tag : str
    id        : int
    state     : str
    payload   : Any = None

@dataclass
class ChannelEnd:
    id      : int
    peer    : Optional["ChannelEnd"] = field(default=None, repr=False, compare=False)
    inbox   : Deque[tuple]           = field(default_factory=deque)
    state   : str                    = "Open"

    class_tag = "Chan"

@dataclass
class SigmaVal:
    a : Any
    b : Any

def show_value(v):
    if v is None:
        return "()"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, str)):
        return str(v)
    if isinstance(v, tuple):
        return "(" + ", ".join(show_value(x) for x in v) + ")"
    if isinstance(v, (Resource, ChannelEnd)):
        return f"{v.class_tag}#{v.id}"
    if isinstance(v, Instance):
        return f"{v.class_tag}()"
    if isinstance(v, SigmaVal):
        return f"Sigma({show_value(v.a)}, {show_value(v.b)})"
    return "<function>"

# Trace --------------------------------------------------------------------------------------------

class TraceEvent(BaseModel):
    """
    One observable step of a run.

    Parameters:
    - event (str)       : PrimCall, Guard, TaskSwitch or Output.
    - task (int)        : Task that produced the event.
    - resource (int)    : Resource id, when the event concerns one.
    - detail (str)      : Operation and arguments, guard states or output text.
    """
    event    : str
    task     : int
    resource : Optional[int] = None
    detail   : str           = ""

class Trace:
    """Append-only list of events."""
    def __init__(self):
        self.events = []

    def append(self, event, task, resource=None, detail=""):
        self.events.append(TraceEvent(event=event, task=task, resource=resource, detail=detail))

    def outputs(self):
        return [e.detail for e in self.events if e.event == "Output"]

    def guards(self):
        return [e for e in self.events if e.event == "Guard"]

    def to_jsonl(self):
        return "".join(json.dumps(e.model_dump()) + "\n" for e in self.events)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)
