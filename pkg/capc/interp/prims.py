#
# This file is part of Cap.
#
# Copyright (c) 2025 Cap Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Primitives behind the prelude's `extern def`s.

A primitive receives the interpreter and every argument of its curried signature, implicit
capability tokens included (they are Unit at runtime). Primitives that call back into the program
or wait on a channel are generators and are driven with `yield from`.
"""

import logging

from capc.diagnostics import RuntimeFault
from capc.interp.scheduler import BLOCKED
from capc.interp.values import ChannelEnd, Instance, Resource, SigmaVal, show_value

logger = logging.getLogger(__name__)

PRIMS = {}

def prim(name):
    def register(fn):
        PRIMS[name] = fn
        return fn
    return register

def guard(rt, resource, expected):
    """Compare the dynamic state of `resource` with `expected`; a mismatch aborts the run."""
    actual = resource.state
    if actual != expected:
        rt.emit("Guard", resource.id, f"expected {expected}, actual {actual}")
        raise RuntimeFault("R_GUARD",
            f"{resource.class_tag}#{resource.id}: expected {expected}, actual {actual}")

def transition(rt, resource, expected, new, op):
    guard(rt, resource, expected)
    resource.state = new
    rt.emit("PrimCall", resource.id, op)

# Capabilities erase to Unit.
CAP = None

def _done():
    return SigmaVal(None, CAP)

# Core ---------------------------------------------------------------------------------------------

@prim("core.println")
def println(rt, s):
    rt.emit("Output", None, show_value(s))

@prim("core.readLine")
def read_line(rt, _unit):
    return rt.inputs.popleft() if rt.inputs else ""

@prim("core.toString")
def to_string(rt, x):
    return show_value(x)

@prim("core.randomInt")
def random_int(rt, bound):
    return rt.random.randrange(bound) if bound > 0 else 0

@prim("core.eq")
def eq(rt, a, b):
    return a == b

@prim("core.neq")
def neq(rt, a, b):
    return a != b

@prim("core.lt")
def lt(rt, a, b):
    return a < b

@prim("core.plus")
def plus(rt, a, b):
    return a + b

@prim("core.minus")
def minus(rt, a, b):
    return a - b

@prim("core.times")
def times(rt, a, b):
    return a * b

@prim("core.concat")
def concat(rt, a, b):
    return a + b

@prim("core.fst")
def fst(rt, p):
    return p[0]

@prim("core.snd")
def snd(rt, p):
    return p[1]

@prim("core.cFuture")
def c_future(rt, body):
    rt.scheduler.spawn(rt.call(body, None))

# Files --------------------------------------------------------------------------------------------

def _new_file(rt, name):
    rt.files.setdefault(name, "")
    return Resource("File", rt.new_id(), "Closed", payload=name)

def _open(rt, f):
    transition(rt, f, "Closed", "Open", f"open {f.payload}")

def _close(rt, f):
    transition(rt, f, "Open", "Closed", f"close {f.payload}")

def _write(rt, f, text):
    guard(rt, f, "Open")
    rt.files[f.payload] += text
    rt.emit("PrimCall", f.id, f"write {text}")

@prim("file.newFile")
def new_file(rt, name):
    return _new_file(rt, name)

@prim("file.newFileSigma")
def new_file_sigma(rt, name):
    return SigmaVal(_new_file(rt, name), CAP)

@prim("file.open")
def open_file(rt, f):
    _open(rt, f)
    return f

@prim("file.openCap")
def open_cap(rt, f, _c):
    _open(rt, f)
    return CAP

@prim("file.openSigma")
def open_sigma(rt, f, _c):
    _open(rt, f)
    return _done()

@prim("file.close")
def close_file(rt, f):
    _close(rt, f)
    return f

@prim("file.closeCap")
def close_cap(rt, f, _c):
    _close(rt, f)
    return CAP

@prim("file.closeSigma")
def close_sigma(rt, f, _c):
    _close(rt, f)
    return _done()

@prim("file.read")
def read_file(rt, f, *_caps):
    guard(rt, f, "Open")
    rt.emit("PrimCall", f.id, f"read {f.payload}")
    return rt.files[f.payload]

@prim("file.write")
def write_file(rt, f, text, *_caps):
    _write(rt, f, text)

@prim("file.writeUsing")
def write_using(rt, text, f):
    _write(rt, f, text)

@prim("file.withFile")
def with_file(rt, name, op):
    f = _new_file(rt, name)
    _open(rt, f)
    result = yield from rt.call(op, f)
    _close(rt, f)
    return result

@prim("file.ensureClosed")
def ensure_closed(rt, name, op):
    returned = yield from rt.call(op, _new_file(rt, name))
    guard(rt, returned, "Closed")

@prim("file.ensureClosedDep")
def ensure_closed_dep(rt, name, op):
    f = _new_file(rt, name)
    yield from rt.call(op, f, CAP)
    guard(rt, f, "Closed")

@prim("file.ensureClosedSigma")
def ensure_closed_sigma(rt, name, op):
    f = _new_file(rt, name)
    result = yield from rt.call(op, f, CAP)
    guard(rt, f, "Closed")
    assert isinstance(result, SigmaVal), result
    return result.a

# Locks --------------------------------------------------------------------------------------------

@prim("lock.newTable")
def new_table(rt, rows):
    return SigmaVal(Resource("Table", rt.new_id(), "Released", payload=rows), CAP)

@prim("lock.lock")
def lock(rt, table, _unit, _c):
    transition(rt, table, "Released", "Held", "lock")
    return _done()

@prim("lock.unlock")
def unlock(rt, table, _unit, _c):
    transition(rt, table, "Held", "Released", "unlock")
    return _done()

@prim("lock.locateRow")
def locate_row(rt, table, n, _c):
    guard(rt, table, "Held")
    row = Resource("Row", rt.new_id(), "Released", payload=n)
    rt.emit("PrimCall", table.id, f"locateRow {n}")
    return SigmaVal(row, CAP)

@prim("lock.lockRow")
def lock_row(rt, table, row, _held, _c):
    guard(rt, table, "Held")
    transition(rt, row, "Released", "Held", f"lockRow {row.payload}")
    return _done()

@prim("lock.unlockRow")
def unlock_row(rt, row, _unit, _c):
    transition(rt, row, "Held", "Released", f"unlockRow {row.payload}")
    return _done()

@prim("lock.computeOnRow")
def compute_on_row(rt, row, _unit, _c):
    guard(rt, row, "Held")
    rt.emit("PrimCall", row.id, f"computeOnRow {row.payload}")

# DOM ----------------------------------------------------------------------------------------------

def _tag(elem):
    assert isinstance(elem, Instance), elem
    return elem.class_tag.lower()

def _top(tree):
    stack = tree.payload["stack"]
    return stack[-1] if stack else "empty"

def _guard_top(rt, tree, expected):
    actual = _top(tree)
    if actual != expected:
        rt.emit("Guard", tree.id, f"expected {expected}, actual {actual}")
        raise RuntimeFault("R_GUARD", f"DOM#{tree.id}: expected {expected}, actual {actual}")

@prim("dom.makeDOM")
def make_dom(rt, body):
    tree = Resource("DOM", rt.new_id(), "Building", payload={"stack": [], "html": []})
    yield from rt.call(body, tree, CAP)
    _guard_top(rt, tree, "empty")
    tree.state = "Done"
    rt.emit("Output", tree.id, "".join(tree.payload["html"]))

@prim("dom.open")
def dom_open(rt, tree, elem, _c):
    tag = _tag(elem)
    tree.payload["stack"].append(tag)
    tree.payload["html"].append(f"<{tag}>")
    rt.emit("PrimCall", tree.id, f"open {tag}")
    return _done()

@prim("dom.close")
def dom_close(rt, tree, elem, _c):
    tag = _tag(elem)
    _guard_top(rt, tree, tag)
    tree.payload["stack"].pop()
    tree.payload["html"].append(f"</{tag}>")
    rt.emit("PrimCall", tree.id, f"close {tag}")
    return _done()

@prim("dom.addText")
def dom_add_text(rt, tree, elem, text, _c):
    _guard_top(rt, tree, _tag(elem))
    tree.payload["html"].append(text)
    rt.emit("PrimCall", tree.id, f"addText {text}")

# Channels -----------------------------------------------------------------------------------------

def _post(rt, chan, kind, value, op):
    guard(rt, chan, "Open")
    chan.peer.inbox.append((kind, value))
    rt.emit("PrimCall", chan.id, op)

def _take(rt, chan, kind):
    """Wait for the next message on `chan` (a generator); it must be of the given kind."""
    guard(rt, chan, "Open")
    while not chan.inbox:
        yield BLOCKED
    got, value = chan.inbox.popleft()
    if got != kind:
        rt.emit("Guard", chan.id, f"expected {kind}, actual {got}")
        raise RuntimeFault("R_GUARD", f"Chan#{chan.id}: expected {kind}, actual {got}")
    return value

@prim("chan.newPair")
def new_pair(rt, _unit):
    first  = ChannelEnd(rt.new_id())
    second = ChannelEnd(rt.new_id(), peer=first)
    first.peer = second
    return (SigmaVal(first, CAP), SigmaVal(second, CAP))

@prim("chan.send")
def send(rt, chan, x, _c):
    _post(rt, chan, "value", x, f"send {show_value(x)}")
    return _done()

@prim("chan.recv")
def recv(rt, chan, _unit, _c):
    value = yield from _take(rt, chan, "value")
    rt.emit("PrimCall", chan.id, f"recv {show_value(value)}")
    return SigmaVal(value, CAP)

@prim("chan.close")
def close_chan(rt, chan, _unit, _c):
    transition(rt, chan, "Open", "Closed", "close")

@prim("chan.left")
def left(rt, chan, _unit, _c):
    _post(rt, chan, "choice", "left", "select left")
    return _done()

@prim("chan.right")
def right(rt, chan, _unit, _c):
    _post(rt, chan, "choice", "right", "select right")
    return _done()

@prim("chan.branch")
def branch(rt, chan, _c, on_left, on_right):
    choice = yield from _take(rt, chan, "choice")
    rt.emit("PrimCall", chan.id, f"branch {choice}")
    result = yield from rt.call(on_left if choice == "left" else on_right, CAP)
    return result

@prim("chan.recPush")
@prim("chan.recTop")
@prim("chan.recPop")
def rec_marker(rt, chan, _unit, _c):
    return _done()
