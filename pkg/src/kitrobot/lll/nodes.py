"""AST node types for the robot low-level language.

Every node carries a source span, excluded from equality so that parsed
and programmatically built trees compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from kitrobot.diagnostics import DUMMY_SPAN, Span


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    object: str
    method: str
    args: tuple["Expr", ...] = ()
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


Expr = IntLit | Call | Not | And | Or


@dataclass(frozen=True)
class Action:
    call: Call
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ActionInterrupt:
    call: Call
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Repeat:
    count: int
    body: tuple["Instr", ...]
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Instr", ...]
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class IfElse:
    cond: Expr
    then_body: tuple["Instr", ...]
    else_body: tuple["Instr", ...] | None = None
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Event:
    cond: Expr
    body: tuple["Instr", ...]
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Parallel:
    branches: tuple[tuple["Instr", ...], ...]
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Wait:
    ticks: int
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Break:
    span: Span = field(default=DUMMY_SPAN, compare=False, repr=False)


Instr = Action | ActionInterrupt | Repeat | While | IfElse | Event | Parallel | Wait | Break


@dataclass(frozen=True)
class Program:
    top: tuple[Instr, ...]
    source_name: str = field(default="<string>", compare=False)


def contains_interrupt(instrs: tuple[Instr, ...]) -> bool:
    """True if the sequence lexically contains an interrupt action at any depth."""
    for ins in instrs:
        if isinstance(ins, ActionInterrupt):
            return True
        if isinstance(ins, (Repeat, While, Event)) and contains_interrupt(ins.body):
            return True
        if isinstance(ins, IfElse):
            if contains_interrupt(ins.then_body):
                return True
            if ins.else_body is not None and contains_interrupt(ins.else_body):
                return True
        if isinstance(ins, Parallel) and any(contains_interrupt(b) for b in ins.branches):
            return True
    return False
