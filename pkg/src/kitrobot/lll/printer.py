"""Canonical printer: the inverse of parse, and the compiler's output format.

Canonical form terminates every instruction with ';', puts single spaces
around '&' and '|' and nothing else, and parenthesizes conditions only
where precedence demands it.
"""

from __future__ import annotations

from kitrobot.lll.lexer import INTERRUPT_MARK
from kitrobot.lll.nodes import (
    Action,
    ActionInterrupt,
    And,
    Break,
    Call,
    Event,
    Expr,
    IfElse,
    Instr,
    IntLit,
    Not,
    Or,
    Parallel,
    Program,
    Repeat,
    Wait,
    While,
)

_PREC_OR = 1
_PREC_AND = 2
_PREC_ATOM = 3


def print_expr(expr: Expr, min_prec: int = _PREC_OR) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, Call):
        args = ",".join(print_expr(a) for a in expr.args)
        return f"{expr.object}.{expr.method}({args})"
    if isinstance(expr, Not):
        return f"!({print_expr(expr.operand)})"
    if isinstance(expr, And):
        text = f"{print_expr(expr.left, _PREC_AND)} & {print_expr(expr.right, _PREC_ATOM)}"
        return f"({text})" if min_prec > _PREC_AND else text
    if isinstance(expr, Or):
        text = f"{print_expr(expr.left, _PREC_OR)} | {print_expr(expr.right, _PREC_AND)}"
        return f"({text})" if min_prec > _PREC_OR else text
    raise TypeError(f"not an expression node: {expr!r}")


def print_instr(instr: Instr) -> str:
    if isinstance(instr, Action):
        return print_expr(instr.call)
    if isinstance(instr, ActionInterrupt):
        return f"{INTERRUPT_MARK}{print_expr(instr.call)}{INTERRUPT_MARK}"
    if isinstance(instr, Repeat):
        return f"{instr.count}*({print_seq(instr.body)})"
    if isinstance(instr, While):
        return f"*[{print_expr(instr.cond)}]({print_seq(instr.body)})"
    if isinstance(instr, IfElse):
        text = f"[{print_expr(instr.cond)}]({print_seq(instr.then_body)})"
        if instr.else_body is not None:
            text += f"!({print_seq(instr.else_body)})"
        return text
    if isinstance(instr, Event):
        return f"<{print_expr(instr.cond)}>({print_seq(instr.body)})"
    if isinstance(instr, Parallel):
        return "//(" + ",".join(print_seq(b) for b in instr.branches) + ")"
    if isinstance(instr, Wait):
        return f"WAIT({instr.ticks})"
    if isinstance(instr, Break):
        return "BREAK"
    raise TypeError(f"not an instruction node: {instr!r}")


def print_seq(instrs: tuple[Instr, ...]) -> str:
    return "".join(print_instr(i) + ";" for i in instrs)


def print_canonical(program: Program) -> str:
    """Render a program in canonical form; parse(print_canonical(p)) equals p."""
    return print_seq(program.top)
