from capc.interp.interpreter import Interpreter, run_program
from capc.interp.values import Trace, TraceEvent
