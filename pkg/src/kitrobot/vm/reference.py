"""Brute-force reference interpreter.

Executes programs by direct recursive evaluation: one Python generator per
parallel branch, yielding once per consumed scheduler step, with an explicit
task tree visited children-before-parent in declaration order once per tick.
Kept deliberately simple; the frame machine in machine.py must produce
byte-identical traces.

Tick accounting (shared with the frame machine, pinned by golden traces):

  * an action, a wait entry, a while/if condition evaluation, a BREAK and a
    parallel spawn each consume their branch's single step for the tick;
  * repetition entry and exit, sequence bookkeeping and wait wake-up are
    free: execution flows on to the next consuming primitive in the same tick;
  * an event consumes its entry step silently, then one condition evaluation
    per tick; the body starts the tick after the first true evaluation;
  * a parallel completes once every non-interruptible branch is done (or all
    branches, if every one is interruptible); still-live branches are then
    aborted before their next step and the parent resumes in the same tick.
"""

from __future__ import annotations

from kitrobot.catalog import Catalog
from kitrobot.devices import DeviceBackend, DeviceFault
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
    contains_interrupt,
)
from kitrobot.trace import (
    KIND_ACTION,
    KIND_ACTION_ABORTED,
    KIND_BRANCH_ABORTED,
    KIND_BRANCH_END,
    KIND_BRANCH_START,
    KIND_COND_EVAL,
    KIND_WAIT_END,
    KIND_WAIT_START,
    TraceRecord,
)

_LIVE = "live"
_SLEEPING = "sleeping"
_DONE = "done"
_ABORTED = "aborted"


class _BreakLoop(Exception):
    pass


class _Task:
    def __init__(self, gen, index: int | None, interruptible: bool):
        self.gen = gen
        self.index = index
        self.interruptible = interruptible
        self.status = _LIVE
        self.wake = 0
        self.children: list[_Task] = []


class ReferenceMachine:
    """One agent's program, interpreted the simple way."""

    def __init__(self, program: Program, catalog: Catalog, agent: str, trace: list | None = None):
        self.catalog = catalog
        self.agent = agent
        self.clock = 0
        self.trace = trace if trace is not None else []
        self.done = False
        self.failed = False
        self.finished_tick = 0
        self.variables: dict[str, int | bool] = {}
        for obj in catalog.variables():
            self.variables[obj.name] = 0 if obj.vartype == "integer" else False
        self.backend: DeviceBackend | None = None
        self.root = _Task(self._exec_seq(program.top), None, contains_interrupt(program.top))
        if not program.top:
            self.done = True

    # -- scheduling -----------------------------------------------------

    def step_tick(self, backend: DeviceBackend) -> None:
        if self.done:
            raise RuntimeError("machine already done")
        self.backend = backend
        self._visit(self.root)
        self.clock += 1

    def _visit(self, task: _Task) -> None:
        if self.done:
            return
        if task.children:
            for child in task.children:
                self._visit(child)
                if self.done:
                    return
            self._check_join(task)
            return
        if task.status == _SLEEPING:
            if self.clock >= task.wake:
                task.status = _LIVE
                self._rec(KIND_WAIT_END)
                self._resume(task)
            return
        if task.status == _LIVE:
            self._resume(task)

    def _resume(self, task: _Task) -> None:
        try:
            cmd = next(task.gen)
        except StopIteration:
            self._finish(task)
            return
        except DeviceFault as fault:
            self._fail(fault)
            return
        if cmd[0] == "sleep":
            task.status = _SLEEPING
            task.wake = cmd[1]
        elif cmd[0] == "spawn":
            task.children = [
                _Task(self._exec_seq(branch), i, contains_interrupt(branch))
                for i, branch in enumerate(cmd[1])
            ]
        # a plain "step" leaves the task live

    def _check_join(self, task: _Task) -> None:
        non_interruptible = [c for c in task.children if not c.interruptible]
        pool = non_interruptible if non_interruptible else task.children
        if not all(c.status == _DONE for c in pool):
            return
        for child in task.children:
            self._abort_live(child)
        task.children = []
        self._resume(task)

    def _abort_live(self, task: _Task) -> None:
        if task.status in (_DONE, _ABORTED):
            return
        self._rec(KIND_BRANCH_ABORTED, value=task.index)
        task.status = _ABORTED
        task.gen.close()
        for child in task.children:
            self._abort_live(child)
        task.children = []

    def _finish(self, task: _Task) -> None:
        task.status = _DONE
        if task is self.root:
            self.done = True
            self.finished_tick = self.clock
        else:
            self._rec(KIND_BRANCH_END, value=task.index)

    def _fail(self, fault: DeviceFault) -> None:
        self.trace.append(
            TraceRecord(
                self.clock,
                self.agent,
                KIND_ACTION_ABORTED,
                object=fault.object,
                method=fault.method,
                args=fault.call_args,
            )
        )
        self.failed = True
        self.done = True
        self.finished_tick = self.clock

    def _rec(self, kind: str, call: Call | None = None, args=None, value=None) -> None:
        self.trace.append(
            TraceRecord(
                self.clock,
                self.agent,
                kind,
                object=call.object if call else None,
                method=call.method if call else None,
                args=args,
                value=value,
            )
        )

    # -- evaluation -----------------------------------------------------

    def _eval(self, expr: Expr) -> int | bool:
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, Not):
            return not self._eval(expr.operand)
        if isinstance(expr, And):
            left = self._eval(expr.left)
            right = self._eval(expr.right)
            return left and right
        if isinstance(expr, Or):
            left = self._eval(expr.left)
            right = self._eval(expr.right)
            return left or right
        if isinstance(expr, Call):
            args = tuple(self._eval(a) for a in expr.args)
            spec = self.catalog.object(expr.object)
            if spec is not None and spec.kind == "variable":
                value = self.variables[expr.object]
                if expr.method == "Get":
                    return value
                if expr.method == "IsTrue":
                    return bool(value)
                return not value  # IsFalse
            assert self.backend is not None
            return self.backend.read_sensor(self.agent, expr.object, expr.method, args)
        raise TypeError(f"not an expression node: {expr!r}")

    def _apply(self, call: Call) -> None:
        args = tuple(self._eval(a) for a in call.args)
        spec = self.catalog.object(call.object)
        if spec is not None and spec.kind == "variable":
            if call.method == "Set":
                self.variables[call.object] = max(0, min(100, args[0]))
            elif call.method == "SetTrue":
                self.variables[call.object] = True
            else:  # SetFalse
                self.variables[call.object] = False
        else:
            assert self.backend is not None
            self.backend.apply_action(self.agent, call.object, call.method, args)
        self._rec(KIND_ACTION, call=call, args=args)

    # -- direct recursive execution --------------------------------------

    def _exec_seq(self, instrs: tuple[Instr, ...]):
        for ins in instrs:
            yield from self._exec_instr(ins)

    def _exec_instr(self, ins: Instr):
        if isinstance(ins, (Action, ActionInterrupt)):
            self._apply(ins.call)
            yield ("step",)
        elif isinstance(ins, Wait):
            self._rec(KIND_WAIT_START, value=ins.ticks)
            if ins.ticks == 0:
                self._rec(KIND_WAIT_END)
                yield ("step",)
            else:
                yield ("sleep", self.clock + ins.ticks)
                # wait-end is recorded by the scheduler at wake-up
        elif isinstance(ins, Repeat):
            for _ in range(ins.count):
                try:
                    yield from self._exec_seq(ins.body)
                except _BreakLoop:
                    break
        elif isinstance(ins, While):
            while True:
                value = self._eval(ins.cond)
                self._rec(KIND_COND_EVAL, value=bool(value))
                yield ("step",)
                if not value:
                    break
                try:
                    yield from self._exec_seq(ins.body)
                except _BreakLoop:
                    break
        elif isinstance(ins, IfElse):
            value = self._eval(ins.cond)
            self._rec(KIND_COND_EVAL, value=bool(value))
            yield ("step",)
            if value:
                yield from self._exec_seq(ins.then_body)
            elif ins.else_body is not None:
                yield from self._exec_seq(ins.else_body)
        elif isinstance(ins, Event):
            yield ("step",)
            while True:
                value = self._eval(ins.cond)
                self._rec(KIND_COND_EVAL, value=bool(value))
                yield ("step",)
                if value:
                    break
            yield from self._exec_seq(ins.body)
        elif isinstance(ins, Parallel):
            for i in range(len(ins.branches)):
                self._rec(KIND_BRANCH_START, value=i)
            yield ("spawn", ins.branches)
        elif isinstance(ins, Break):
            yield ("step",)
            raise _BreakLoop()
        else:
            raise TypeError(f"not an instruction node: {ins!r}")
