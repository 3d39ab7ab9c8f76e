"""The robot low-level language: AST, parser, canonical printer, typechecker."""

from kitrobot.lll.nodes import (
    Action,
    ActionInterrupt,
    And,
    Break,
    Call,
    Event,
    IfElse,
    IntLit,
    Not,
    Or,
    Parallel,
    Program,
    Repeat,
    Wait,
    While,
)
from kitrobot.lll.lexer import ParseError
from kitrobot.lll.parser import parse
from kitrobot.lll.printer import print_canonical
from kitrobot.lll.typecheck import typecheck

__all__ = [
    "Action",
    "ActionInterrupt",
    "And",
    "Break",
    "Call",
    "Event",
    "IfElse",
    "IntLit",
    "Not",
    "Or",
    "Parallel",
    "ParseError",
    "Program",
    "Repeat",
    "Wait",
    "While",
    "parse",
    "print_canonical",
    "typecheck",
]
