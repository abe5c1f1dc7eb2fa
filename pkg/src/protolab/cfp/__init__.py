from .ast import Atom, Choice, CfpExpr, Epsilon, GlobalTrace, Rec, Seq, Shuffle, Var, print_cfp
from .scribble_parser import parse_scribble, print_scribble
from .trace_parser import parse_trace
from .transforms import eliminate_shuffle, enumerate_traces

__all__ = [
    "Atom",
    "Choice",
    "CfpExpr",
    "Epsilon",
    "GlobalTrace",
    "Rec",
    "Seq",
    "Shuffle",
    "Var",
    "print_cfp",
    "parse_scribble",
    "print_scribble",
    "parse_trace",
    "eliminate_shuffle",
    "enumerate_traces",
]
