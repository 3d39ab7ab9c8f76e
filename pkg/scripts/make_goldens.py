#!/usr/bin/env python3
"""Regenerate the golden fixtures under tests/goldens/.

Grammar goldens are canonical source files; trace goldens come from the
simple reference interpreter (reviewed by hand before freezing), so the
frame machine is always checked against independently produced output.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from support import (  # noqa: E402
    DATA_DIR,
    GOLDEN_DIR,
    INTERRUPT_CASES,
    MockBackend,
    carrier_catalog,
    station_catalog,
)

from kitrobot.lll.parser import parse  # noqa: E402
from kitrobot.lll.printer import print_canonical  # noqa: E402
from kitrobot.scenario import ScenarioRunner  # noqa: E402
from kitrobot.trace import to_jsonl  # noqa: E402
from kitrobot.vm.machine import run  # noqa: E402
from kitrobot.vm.reference import ReferenceMachine  # noqa: E402
from kitrobot.world import world_from_spec  # noqa: E402

GRAMMAR_GOLDENS = {
    "action.lll": "wheel.Advance(50);",
    "interrupt.lll": "//(°motor.Turn(10)°;,WAIT(1););",
    "repeat.lll": "3*(wheel.Advance(50););",
    "while.lll": "*[button.IsPressed()](door.Open(););",
    "if.lll": "[captor.EqualTo(7)](light.LightOn(););",
    "ifelse.lll": "[captor.EqualTo(7)](light.LightOn();)!(light.LightOff(););",
    "event.lll": "<button.IsPressed()>(door.Open(););",
    "parallel.lll": "//(WAIT(1);,WAIT(2););",
    "wait.lll": "WAIT(5);",
    "break.lll": "3*([button.IsPressed()](BREAK;););",
    "conds.lll": "*[!(button.IsPressed()) & captor.LessThan(9) | flag.IsTrue()](WAIT(1););",
    "multiarg.lll": "motor.AbsoluteTurn(30,60);",
    "intarg.lll": "wheel.Advance(count.Get());",
}

DEMO_MARGIN = 24  # ticks of slack on top of the observed mission tick


def write_grammar_goldens() -> None:
    out = GOLDEN_DIR / "grammar"
    out.mkdir(parents=True, exist_ok=True)
    for name, text in GRAMMAR_GOLDENS.items():
        rendered = print_canonical(parse(text))
        if rendered != text:
            raise SystemExit(f"{name}: text is not canonical:\n  {text}\n  {rendered}")
        (out / name).write_bytes(text.encode())
    print(f"wrote {len(GRAMMAR_GOLDENS)} grammar goldens")


def write_interrupt_goldens() -> None:
    out = GOLDEN_DIR / "interrupt"
    out.mkdir(parents=True, exist_ok=True)
    catalog = carrier_catalog()
    for name, source, scripts, expected_aborts in INTERRUPT_CASES:
        machine = ReferenceMachine(parse(source), catalog, "c1")
        run(machine, MockBackend(seed=7, scripts=scripts), 64)
        aborted = [r.value for r in machine.trace if r.kind == "branch-aborted"]
        if aborted != expected_aborts:
            raise SystemExit(f"{name}: aborted branches {aborted} != expected {expected_aborts}")
        (out / f"{name}.lll").write_bytes(source.encode())
        (out / f"{name}.jsonl").write_bytes(to_jsonl(machine.trace).encode())
    print(f"wrote {len(INTERRUPT_CASES)} interrupt goldens")


def demo_runner(max_ticks: int) -> tuple[ScenarioRunner, int | None]:
    world = world_from_spec((DATA_DIR / "demo-world.xml").read_text())
    carrier = carrier_catalog()
    station = station_catalog()
    programs = {
        "c1": (DATA_DIR / "carrier.lll").read_text(),
        "c2": (DATA_DIR / "carrier.lll").read_text(),
        "L": (DATA_DIR / "loader.lll").read_text(),
        "U": (DATA_DIR / "unloader.lll").read_text(),
    }
    catalogs = {"c1": carrier, "c2": carrier, "L": station, "U": station}
    runner = ScenarioRunner(world, programs, catalogs, max_ticks, machine_factory=ReferenceMachine)
    mission_tick = None
    while True:
        counts = {s.name: s.count for s in world.stores}
        if mission_tick is None and counts["A"] == 0 and counts["B"] == 5:
            mission_tick = runner.tick
        if not runner.step():
            break
    return runner, mission_tick


def write_demo_golden() -> None:
    out = GOLDEN_DIR / "demo"
    out.mkdir(parents=True, exist_ok=True)
    _, mission_tick = demo_runner(2000)
    if mission_tick is None:
        raise SystemExit("demo mission did not complete within 2000 ticks")
    budget = mission_tick + DEMO_MARGIN
    runner, mission_again = demo_runner(budget)
    if mission_again != mission_tick:
        raise SystemExit("mission tick changed between probe and budget run")
    counts = {s.name: s.count for s in runner.world.stores}
    meta = {
        "budget": budget,
        "mission_tick": mission_tick,
        "final_counts": counts,
        "loaded_carriers": sum(1 for c in runner.world.carriers if c.loaded),
    }
    (out / "scenario.jsonl").write_bytes(to_jsonl(runner.trace).encode())
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"demo golden: mission tick {mission_tick}, budget {budget}, counts {counts}")


if __name__ == "__main__":
    write_grammar_goldens()
    write_interrupt_goldens()
    write_demo_golden()
