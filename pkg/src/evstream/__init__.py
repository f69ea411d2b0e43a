"""Composable event stream processors with an extensible SQL-like query language."""
from .basic import Cumulative, Fork, FunctionProcessor, Passthrough, average, moment, mutator
from .core import (
    CallbackSink, CollectSink, ConstantSource, GroupProcessor, IterSource, ListSource,
    Processor, PullStatus, chain, connect, run_pull, run_push,
)
from .errors import (
    BuildError, ConcurrencyError, EngineError, EvaluationError, ParseError,
    PipeConnectionError, PipelineError, PullModeError,
)
from .esql import Interpreter
from .events import FF, TT, UNK, WILDCARD, Troolean, Tuple, events_equal, kind_of, traces_equal
from .grammar import Grammar, ParseNode
from .trace_ops import Decimate, Dispatcher, Filter, Freeze, Prefix, Slicer, Trim, Unpack, Window

__version__ = "0.1.0"

__all__ = [
    "Processor", "GroupProcessor", "PullStatus", "connect", "chain", "run_push", "run_pull",
    "ListSource", "IterSource", "ConstantSource", "CollectSink", "CallbackSink",
    "FunctionProcessor", "Cumulative", "Fork", "Passthrough", "mutator", "moment", "average",
    "Decimate", "Trim", "Freeze", "Prefix", "Filter", "Dispatcher", "Unpack", "Window", "Slicer",
    "Grammar", "ParseNode", "Interpreter",
    "Troolean", "TT", "FF", "UNK", "Tuple", "WILDCARD", "kind_of", "events_equal", "traces_equal",
    "EngineError", "PipeConnectionError", "PipelineError", "EvaluationError", "PullModeError",
    "ConcurrencyError", "ParseError", "BuildError",
]
