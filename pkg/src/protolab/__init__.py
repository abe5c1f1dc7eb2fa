"""Workbench for multiagent communication protocol languages: information
protocols, trace expressions, a session-calculus subset, and flat guarded
state machines, with realizability checking, decentralized-enactment
simulation, commitments, and a comparative evaluation matrix."""

__version__ = "0.1.0"
