"""Graph to low-level-language compiler.

A pure syntax-directed translation: each block maps to one instruction and
the result is rendered by the canonical printer, so equal graphs compile to
byte-equal output and parsing the output recovers the graph's AST image.
"""

from __future__ import annotations

from kitrobot.catalog import Catalog
from kitrobot.diagnostics import Diagnostic
from kitrobot.graph import (
    ACTION,
    BREAK,
    EVENT,
    IF,
    IFELSE,
    PARALLEL,
    REPEAT,
    START,
    STOP,
    WAIT,
    WHILE,
    ProgramGraph,
    validate_graph,
)
from kitrobot.lll.nodes import (
    Action,
    ActionInterrupt,
    Break,
    Event,
    IfElse,
    Instr,
    Parallel,
    Program,
    Repeat,
    Wait,
    While,
)
from kitrobot.lll.printer import print_canonical


class GraphValidationError(Exception):
    """compile_graph refused an invalid graph; carries the diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics))


def _instr_of(graph: ProgramGraph, vid: str) -> Instr:
    v = graph.vertices[vid]
    if v.kind == ACTION:
        return ActionInterrupt(v.call) if v.interrupt else Action(v.call)
    if v.kind == REPEAT:
        return Repeat(v.count, _seq_of(graph, v.slots[0]))
    if v.kind == WHILE:
        return While(v.cond, _seq_of(graph, v.slots[0]))
    if v.kind == IF:
        return IfElse(v.cond, _seq_of(graph, v.slots[0]), None)
    if v.kind == IFELSE:
        return IfElse(v.cond, _seq_of(graph, v.slots[0]), _seq_of(graph, v.slots[1]))
    if v.kind == WAIT:
        return Wait(v.ticks)
    if v.kind == BREAK:
        return Break()
    if v.kind == PARALLEL:
        return Parallel(tuple(_seq_of(graph, slot) for slot in v.slots))
    if v.kind == EVENT:
        return Event(v.cond, _seq_of(graph, v.slots[0]))
    raise ValueError(f"vertex kind {v.kind} has no instruction image")


def _seq_of(graph: ProgramGraph, ids: list[str]) -> tuple[Instr, ...]:
    return tuple(_instr_of(graph, vid) for vid in ids)


def ast_of(graph: ProgramGraph) -> Program:
    """The structural AST image of a graph (no validation)."""
    body = [vid for vid in graph.top if graph.vertices[vid].kind not in (START, STOP)]
    return Program(_seq_of(graph, body))


def compile_graph(graph: ProgramGraph, catalog: Catalog) -> str:
    """Compile a validated graph to canonical low-level-language text.

    Raises GraphValidationError carrying the diagnostics when validation
    fails. The Start/Stop-only graph compiles to the empty string.
    """
    diags = validate_graph(graph, catalog)
    if diags:
        raise GraphValidationError(diags)
    return print_canonical(ast_of(graph))
