"""Catalog-driven type checker for the robot low-level language.

Collects every problem instead of stopping at the first; diagnostics come
back ordered by source position. Rules enforced:

  * every call resolves against the catalog (object, method, arity, kinds);
  * action positions call void methods; condition positions are bool-typed;
  * integer literal arguments lie inside their parameter's range;
  * BREAK only inside a repetition/while body of the same parallel branch;
  * interrupt actions only inside a parallel branch.
"""

from __future__ import annotations

from kitrobot.catalog import BOOL, INT, VOID, Catalog
from kitrobot.diagnostics import Diagnostic, sort_by_position
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


class _Checker:
    def __init__(self, catalog: Catalog):
        self.catalog = catalog
        self.diags: list[Diagnostic] = []

    def report(self, code: str, message: str, node) -> None:
        self.diags.append(Diagnostic(code, message, node.span))

    def check_seq(self, instrs: tuple[Instr, ...], loop_depth: int, in_parallel: bool) -> None:
        for ins in instrs:
            self.check_instr(ins, loop_depth, in_parallel)

    def check_instr(self, ins: Instr, loop_depth: int, in_parallel: bool) -> None:
        if isinstance(ins, Action):
            self.check_action(ins.call)
        elif isinstance(ins, ActionInterrupt):
            if not in_parallel:
                self.report(
                    "interrupt-outside-parallel",
                    "interrupt action is only allowed inside a parallel branch",
                    ins,
                )
            self.check_action(ins.call)
        elif isinstance(ins, Repeat):
            self.check_seq(ins.body, loop_depth + 1, in_parallel)
        elif isinstance(ins, While):
            self.check_cond(ins.cond)
            self.check_seq(ins.body, loop_depth + 1, in_parallel)
        elif isinstance(ins, IfElse):
            self.check_cond(ins.cond)
            self.check_seq(ins.then_body, loop_depth, in_parallel)
            if ins.else_body is not None:
                self.check_seq(ins.else_body, loop_depth, in_parallel)
        elif isinstance(ins, Event):
            self.check_cond(ins.cond)
            self.check_seq(ins.body, loop_depth, in_parallel)
        elif isinstance(ins, Parallel):
            for branch in ins.branches:
                # A branch is a fresh scope: BREAK may not unwind out of it.
                self.check_seq(branch, 0, True)
        elif isinstance(ins, Wait):
            pass
        elif isinstance(ins, Break):
            if loop_depth == 0:
                self.report(
                    "break-outside-loop",
                    "BREAK is only allowed inside a repetition or while body",
                    ins,
                )
        else:
            raise TypeError(f"not an instruction node: {ins!r}")

    def check_action(self, call: Call) -> None:
        returns = self.check_call(call)
        if returns is not None and returns != VOID:
            self.report(
                "not-void",
                f"action must call a void method; {call.object}.{call.method} returns {returns}",
                call,
            )

    def check_cond(self, expr: Expr) -> None:
        t = self.type_of(expr)
        if t is not None and t != BOOL:
            self.report("cond-type", f"condition must be bool-typed, got {t}", expr)

    def type_of(self, expr: Expr) -> str | None:
        """Type an expression, reporting problems; None means already diagnosed."""
        if isinstance(expr, IntLit):
            return INT
        if isinstance(expr, Not):
            self.check_cond(expr.operand)
            return BOOL
        if isinstance(expr, (And, Or)):
            self.check_cond(expr.left)
            self.check_cond(expr.right)
            return BOOL
        if isinstance(expr, Call):
            return self.check_call(expr)
        raise TypeError(f"not an expression node: {expr!r}")

    def check_call(self, call: Call) -> str | None:
        arg_types = [self.type_of(a) for a in call.args]
        ospec = self.catalog.object(call.object)
        if ospec is None:
            self.report("unknown-object", f"unknown object: {call.object}", call)
            return None
        mspec = ospec.method(call.method)
        if mspec is None:
            self.report("unknown-method", f"unknown method: {call.object}.{call.method}", call)
            return None
        if len(call.args) != len(mspec.params):
            self.report(
                "arity-mismatch",
                f"{call.object}.{call.method} expects {len(mspec.params)} argument(s), "
                f"got {len(call.args)}",
                call,
            )
            return mspec.returns
        for param, arg, at in zip(mspec.params, call.args, arg_types):
            if at is None:
                continue
            if at != param.kind:
                self.report(
                    "kind-mismatch",
                    f"{call.object}.{call.method}: parameter {param.name} expects "
                    f"{param.kind}, got {at}",
                    arg,
                )
                continue
            if param.kind == INT and isinstance(arg, IntLit):
                if not (param.lo <= arg.value <= param.hi):
                    self.report(
                        "range",
                        f"{call.object}.{call.method}: value {arg.value} is outside "
                        f"[{param.lo},{param.hi}] for parameter {param.name}",
                        arg,
                    )
        return mspec.returns


def typecheck(program: Program, catalog: Catalog) -> list[Diagnostic]:
    checker = _Checker(catalog)
    checker.check_seq(program.top, 0, False)
    return sort_by_position(checker.diags)
