"""Deterministic tick-based frame machine for the robot low-level language.

State is explicit: each parallel branch owns a frame with a control stack
(sequence positions, active loop entries) and a status; frames are visited
once per tick, children before parent in declaration order, and each takes
at most one consuming step. Tick accounting is documented in reference.py
and must match it record for record.
"""

from __future__ import annotations

from kitrobot.catalog import Catalog
from kitrobot.devices import DeviceBackend, DeviceFault
from kitrobot.diagnostics import Diagnostic
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
from kitrobot.lll.parser import parse
from kitrobot.lll.typecheck import typecheck
from kitrobot.trace import (
    KIND_ACTION,
    KIND_ACTION_ABORTED,
    KIND_BRANCH_ABORTED,
    KIND_BRANCH_END,
    KIND_BRANCH_START,
    KIND_COND_EVAL,
    KIND_PROGRAM_END,
    KIND_WAIT_END,
    KIND_WAIT_START,
    STATUS_BUDGET,
    STATUS_COMPLETED,
    STATUS_FAILED,
    TraceRecord,
)

RUNNABLE = "runnable"
WAITING = "waiting"
BLOCKED_EVENT = "blocked-on-event"
DONE = "done"
ABORTED = "aborted"


class ProgramCheckError(Exception):
    """A program failed to parse or typecheck when loading."""

    def __init__(self, diagnostics: list[Diagnostic], source_name: str = "<string>"):
        self.diagnostics = diagnostics
        self.source_name = source_name
        lines = "; ".join(d.message for d in diagnostics)
        super().__init__(f"{source_name}: {lines}")


class BranchFrame:
    """Execution state of one branch: control stack plus scheduler status."""

    def __init__(self, instrs: tuple[Instr, ...], index: int | None):
        self.stack: list[list] = [["seq", instrs, 0]]
        self.status = RUNNABLE
        self.index = index
        self.interruptible = contains_interrupt(instrs)
        self.wake = 0
        self.event_cond: Expr | None = None
        self.event_body: tuple[Instr, ...] | None = None
        self.children: list[BranchFrame] = []


class Machine:
    """One agent's loaded program plus its run state and trace."""

    def __init__(self, program: Program, catalog: Catalog, agent: str, trace: list | None = None):
        self.program = program
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
        self.root = BranchFrame(program.top, None)
        if not program.top:
            self.done = True
            self.root.status = DONE

    # -- scheduling -----------------------------------------------------

    def step_tick(self, backend: DeviceBackend) -> None:
        """Run one tick: every frame takes at most one step, then the clock advances."""
        if self.done:
            raise RuntimeError("machine already done")
        self.backend = backend
        try:
            self._visit(self.root)
        except DeviceFault as fault:
            self._fail(fault)
        self.clock += 1

    def _visit(self, frame: BranchFrame) -> None:
        if self.done:
            return
        if frame.children:
            for child in frame.children:
                self._visit(child)
                if self.done:
                    return
            self._join(frame)
            return
        if frame.status == WAITING:
            if self.clock >= frame.wake:
                frame.status = RUNNABLE
                self._rec(KIND_WAIT_END)
                self._run(frame)
            return
        if frame.status == BLOCKED_EVENT:
            value = bool(self._eval(frame.event_cond))
            self._rec(KIND_COND_EVAL, value=value)
            if value:
                frame.stack.append(["seq", frame.event_body, 0])
                frame.event_cond = None
                frame.event_body = None
                frame.status = RUNNABLE
            return
        if frame.status == RUNNABLE:
            self._run(frame)

    def _run(self, frame: BranchFrame) -> None:
        """Unfold free transitions until one consuming step happens or the frame ends."""
        while True:
            if not frame.stack:
                self._finish(frame)
                return
            top = frame.stack[-1]
            kind = top[0]
            if kind == "seq":
                if top[2] >= len(top[1]):
                    frame.stack.pop()
                    continue
                ins = top[1][top[2]]
                top[2] += 1
                if self._dispatch(frame, ins):
                    return
                continue
            if kind == "repeat":
                if top[1] == 0:
                    frame.stack.pop()
                    continue
                top[1] -= 1
                frame.stack.append(["seq", top[2], 0])
                continue
            # while entry: evaluating the guard consumes the step
            value = bool(self._eval(top[1]))
            self._rec(KIND_COND_EVAL, value=value)
            if value:
                frame.stack.append(["seq", top[2], 0])
            else:
                frame.stack.pop()
            return

    def _dispatch(self, frame: BranchFrame, ins: Instr) -> bool:
        """Execute one instruction; True if it consumed the frame's step."""
        if isinstance(ins, (Action, ActionInterrupt)):
            self._apply(ins.call)
            return True
        if isinstance(ins, Wait):
            self._rec(KIND_WAIT_START, value=ins.ticks)
            if ins.ticks == 0:
                self._rec(KIND_WAIT_END)
            else:
                frame.status = WAITING
                frame.wake = self.clock + ins.ticks
            return True
        if isinstance(ins, Repeat):
            frame.stack.append(["repeat", ins.count, ins.body])
            return False
        if isinstance(ins, While):
            frame.stack.append(["while", ins.cond, ins.body])
            return False
        if isinstance(ins, IfElse):
            value = bool(self._eval(ins.cond))
            self._rec(KIND_COND_EVAL, value=value)
            if value:
                frame.stack.append(["seq", ins.then_body, 0])
            elif ins.else_body is not None:
                frame.stack.append(["seq", ins.else_body, 0])
            return True
        if isinstance(ins, Event):
            frame.status = BLOCKED_EVENT
            frame.event_cond = ins.cond
            frame.event_body = ins.body
            return True
        if isinstance(ins, Parallel):
            for i in range(len(ins.branches)):
                self._rec(KIND_BRANCH_START, value=i)
            frame.children = [BranchFrame(branch, i) for i, branch in enumerate(ins.branches)]
            return True
        if isinstance(ins, Break):
            while frame.stack:
                entry = frame.stack.pop()
                if entry[0] in ("repeat", "while"):
                    break
            return True
        raise TypeError(f"not an instruction node: {ins!r}")

    def _join(self, frame: BranchFrame) -> None:
        non_interruptible = [c for c in frame.children if not c.interruptible]
        pool = non_interruptible if non_interruptible else frame.children
        if not all(c.status == DONE for c in pool):
            return
        for child in frame.children:
            self._abort_live(child)
        frame.children = []
        self._run(frame)

    def _abort_live(self, frame: BranchFrame) -> None:
        if frame.status in (DONE, ABORTED):
            return
        self._rec(KIND_BRANCH_ABORTED, value=frame.index)
        frame.status = ABORTED
        for child in frame.children:
            self._abort_live(child)
        frame.children = []

    def _finish(self, frame: BranchFrame) -> None:
        frame.status = DONE
        if frame is self.root:
            self.done = True
            self.finished_tick = self.clock
        else:
            self._rec(KIND_BRANCH_END, value=frame.index)

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
        if isinstance(expr, (And, Or)):
            left = bool(self._eval(expr.left))
            right = bool(self._eval(expr.right))
            return (left and right) if isinstance(expr, And) else (left or right)
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


def load_program(text: str, catalog: Catalog, agent: str, source_name: str = "<string>") -> Machine:
    """Parse, typecheck and load a program; raises ProgramCheckError on diagnostics."""
    program = parse(text, source_name)
    diags = typecheck(program, catalog)
    if diags:
        raise ProgramCheckError(diags, source_name)
    return Machine(program, catalog, agent)


def run(machine, backend: DeviceBackend, max_ticks: int, after_tick=None):
    """Drive a machine (frame machine or reference) to completion or budget.

    Appends the program-end record carrying the completion status and
    returns (machine, trace). `after_tick` lets a harness advance backend
    state between ticks, mirroring the scenario driver's physics phase.
    """
    if max_ticks <= 0:
        raise ValueError("max_ticks must be positive")
    while not machine.done and machine.clock < max_ticks:
        machine.step_tick(backend)
        if after_tick is not None:
            after_tick()
    if machine.done:
        status = STATUS_FAILED if machine.failed else STATUS_COMPLETED
        end_tick = machine.finished_tick
    else:
        status = STATUS_BUDGET
        end_tick = max_ticks
    machine.trace.append(TraceRecord(end_tick, machine.agent, KIND_PROGRAM_END, value=status))
    return machine, machine.trace
