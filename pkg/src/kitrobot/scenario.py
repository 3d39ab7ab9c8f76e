"""Multi-agent scenario driver.

Global tick order, pinned by the golden traces: every agent's machine takes
its tick in world declaration order, then physics advances once. All
machines share one trace list, so records interleave deterministically.
"""

from __future__ import annotations

from kitrobot.catalog import Catalog
from kitrobot.diagnostics import Diagnostic
from kitrobot.lll.parser import parse
from kitrobot.lll.typecheck import typecheck
from kitrobot.trace import (
    KIND_PROGRAM_END,
    STATUS_BUDGET,
    STATUS_COMPLETED,
    STATUS_FAILED,
    TraceRecord,
)
from kitrobot.vm.machine import Machine
from kitrobot.world import WorldState


class ScenarioError(Exception):
    pass


class ScenarioCheckError(ScenarioError):
    """One or more agent programs failed to typecheck."""

    def __init__(self, by_agent: dict[str, list[Diagnostic]]):
        self.by_agent = by_agent
        parts = ", ".join(f"{agent}: {len(diags)} problem(s)" for agent, diags in by_agent.items())
        super().__init__(f"programs failed to typecheck ({parts})")


class ScenarioRunner:
    """Steps a world plus one machine per programmed agent, one global tick at a time."""

    def __init__(
        self,
        world: WorldState,
        programs: dict[str, str],
        catalogs: dict[str, Catalog],
        max_ticks: int,
        machine_factory=Machine,
        source_names: dict[str, str] | None = None,
    ):
        if max_ticks <= 0:
            raise ScenarioError("max_ticks must be positive")
        unknown = sorted(set(programs) - set(world.agent_order))
        if unknown:
            raise ScenarioError(f"programs for agents not in the world: {', '.join(unknown)}")
        missing = sorted(set(programs) - set(catalogs))
        if missing:
            raise ScenarioError(f"no catalog for agents: {', '.join(missing)}")

        self.world = world
        self.max_ticks = max_ticks
        self.trace: list[TraceRecord] = []
        self.tick = 0
        self.finished = False

        names = source_names or {}
        parsed = {}
        problems: dict[str, list[Diagnostic]] = {}
        for agent in world.agent_order:
            if agent not in programs:
                continue
            program = parse(programs[agent], names.get(agent, agent))
            diags = typecheck(program, catalogs[agent])
            if diags:
                problems[agent] = diags
            parsed[agent] = program
        if problems:
            raise ScenarioCheckError(problems)

        self.machines: list[tuple[str, object]] = []
        for agent in world.agent_order:
            if agent in parsed:
                machine = machine_factory(parsed[agent], catalogs[agent], agent, trace=self.trace)
                self.machines.append((agent, machine))
        self._ended: set[str] = set()
        for agent, machine in self.machines:
            if machine.done:  # empty program is complete before the first tick
                self._emit_end(agent, machine)
        if all(m.done for _, m in self.machines):
            self.finished = True

    @property
    def failed(self) -> bool:
        return any(m.failed for _, m in self.machines)

    def _emit_end(self, agent: str, machine) -> None:
        if agent in self._ended:
            return
        self._ended.add(agent)
        status = STATUS_FAILED if machine.failed else STATUS_COMPLETED
        self.trace.append(
            TraceRecord(machine.finished_tick, agent, KIND_PROGRAM_END, value=status)
        )

    def step(self) -> bool:
        """Advance one global tick. Returns False once the scenario is finished."""
        if self.finished:
            return False
        for agent, machine in self.machines:
            if not machine.done:
                machine.step_tick(self.world)
                if machine.done:
                    self._emit_end(agent, machine)
        self.world.advance_physics()
        self.tick += 1
        if all(m.done for _, m in self.machines):
            self.finished = True
        elif self.tick >= self.max_ticks:
            for agent, machine in self.machines:
                if not machine.done:
                    self._ended.add(agent)
                    self.trace.append(
                        TraceRecord(self.max_ticks, agent, KIND_PROGRAM_END, value=STATUS_BUDGET)
                    )
            self.finished = True
        return not self.finished

    def run(self) -> None:
        while self.step():
            pass
