"""Shared test machinery: deterministic fuzzers, a scripted device backend,
and the interrupt golden-case table."""

from __future__ import annotations

import hashlib
import random
from pathlib import Path

from kitrobot.catalog import Catalog, load_catalog
from kitrobot.devices import DeviceFault
from kitrobot.graph import GraphBuilder, ProgramGraph
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

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "kitrobot" / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "goldens"


def carrier_catalog() -> Catalog:
    return load_catalog(
        (DATA_DIR / "constructors.xml").read_text(),
        (DATA_DIR / "carrier.xml").read_text(),
    )


def station_catalog() -> Catalog:
    return load_catalog(None, (DATA_DIR / "station.xml").read_text())


def _stable_bits(*parts) -> int:
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


class MockBackend:
    """Deterministic device backend for interpreter tests.

    Sensor reads consume a per-(object, method) stream: scripted values when
    provided, otherwise values derived from a stable hash of the seed and the
    read count. Methods named Get return ints in [0,100]; everything else
    returns bools. Actions are recorded; objects listed in `missing` fault.
    """

    def __init__(self, seed: int = 0, scripts: dict | None = None, missing: tuple = ()):
        self.seed = seed
        self.scripts = scripts or {}
        self.missing = set(missing)
        self.counts: dict[tuple[str, str], int] = {}
        self.actions: list[tuple[str, str, str, tuple]] = []

    def apply_action(self, agent, obj, method, args):
        if obj in self.missing:
            raise DeviceFault(agent, obj, method, args)
        self.actions.append((agent, obj, method, args))

    def read_sensor(self, agent, obj, method, args):
        if obj in self.missing:
            raise DeviceFault(agent, obj, method, args)
        key = (obj, method)
        n = self.counts.get(key, 0)
        self.counts[key] = n + 1
        if key in self.scripts:
            seq = self.scripts[key]
            return seq[n] if n < len(seq) else seq[-1]
        bits = _stable_bits(self.seed, obj, method, args, n)
        if method == "Get":
            return bits % 101
        return bits % 3 == 0


# -- syntactic fuzzer (round-trip tests; shape only, no catalog) -------------

_IDENT_POOL = ("motor", "wheel", "door", "light", "s", "x_1", "Captor", "_a", "reader", "b2")
_METHOD_POOL = ("Advance", "Stop", "IsOn", "Get", "Set", "EqualTo", "do_it", "M")


def _syn_expr(rng: random.Random, depth: int) -> Expr:
    if depth <= 0 or rng.random() < 0.4:
        if rng.random() < 0.3:
            return IntLit(rng.randint(0, 9999))
        return Call(
            rng.choice(_IDENT_POOL),
            rng.choice(_METHOD_POOL),
            tuple(_syn_expr(rng, 0) for _ in range(rng.randint(0, 2))),
        )
    pick = rng.random()
    if pick < 0.33:
        return Not(_syn_expr(rng, depth - 1))
    if pick < 0.66:
        return And(_syn_expr(rng, depth - 1), _syn_expr(rng, depth - 1))
    return Or(_syn_expr(rng, depth - 1), _syn_expr(rng, depth - 1))


def _syn_seq(rng: random.Random, depth: int, budget: list[int]) -> tuple[Instr, ...]:
    count = rng.randint(1, 3)
    return tuple(_syn_instr(rng, depth, budget) for _ in range(count))


def _syn_instr(rng: random.Random, depth: int, budget: list[int]) -> Instr:
    budget[0] -= 1
    simple = depth <= 0 or budget[0] <= 0
    pick = rng.randint(0, 8 if not simple else 3)
    if pick == 0:
        return Wait(rng.randint(0, 50))
    if pick == 1:
        return Break()
    if pick in (2, 3):
        call = Call(
            rng.choice(_IDENT_POOL),
            rng.choice(_METHOD_POOL),
            tuple(_syn_expr(rng, 2) for _ in range(rng.randint(0, 3))),
        )
        return ActionInterrupt(call) if pick == 3 else Action(call)
    if pick == 4:
        return Repeat(rng.randint(0, 9), _syn_seq(rng, depth - 1, budget))
    if pick == 5:
        return While(_syn_expr(rng, 2), _syn_seq(rng, depth - 1, budget))
    if pick == 6:
        else_body = _syn_seq(rng, depth - 1, budget) if rng.random() < 0.5 else None
        return IfElse(_syn_expr(rng, 2), _syn_seq(rng, depth - 1, budget), else_body)
    if pick == 7:
        return Event(_syn_expr(rng, 2), _syn_seq(rng, depth - 1, budget))
    branches = tuple(_syn_seq(rng, depth - 1, budget) for _ in range(rng.randint(1, 3)))
    return Parallel(branches)


def syntactic_program(rng: random.Random) -> Program:
    budget = [rng.randint(1, 25)]
    instrs = []
    while budget[0] > 0:
        instrs.append(_syn_instr(rng, 3, budget))
    return Program(tuple(instrs))


# -- typed fuzzer (runs against the carrier catalog and MockBackend) ---------


def _typed_int(rng: random.Random) -> Expr:
    if rng.random() < 0.8:
        return IntLit(rng.randint(0, 100))
    return Call("count", "Get")


_BOOL_ATOMS = (
    ("button", "IsPressed", 0),
    ("button", "IsReleased", 0),
    ("captor", "EqualTo", 1),
    ("captor", "LessThan", 1),
    ("captor", "GreaterThan", 1),
    ("lightsensor", "IsRed", 0),
    ("lightsensor", "IsGreen", 0),
    ("lightsensor", "IsBlue", 0),
    ("flag", "IsTrue", 0),
    ("flag", "IsFalse", 0),
)

_VOID_CALLS = (
    ("wheel", "Advance", 1),
    ("wheel", "Reverse", 1),
    ("wheel", "Stop", 0),
    ("motor", "Turn", 1),
    ("motor", "AbsoluteTurn", 2),
    ("motor", "Stop", 0),
    ("door", "Open", 0),
    ("door", "Close", 0),
    ("light", "LightOn", 0),
    ("light", "LightOff", 0),
    ("switch", "SwitchOn", 0),
    ("switch", "SwitchOff", 0),
    ("count", "Set", 1),
    ("flag", "SetTrue", 0),
    ("flag", "SetFalse", 0),
)


def typed_bool(rng: random.Random, depth: int = 2) -> Expr:
    if depth <= 0 or rng.random() < 0.55:
        obj, method, arity = rng.choice(_BOOL_ATOMS)
        return Call(obj, method, tuple(_typed_int(rng) for _ in range(arity)))
    pick = rng.random()
    if pick < 0.34:
        return Not(typed_bool(rng, depth - 1))
    if pick < 0.67:
        return And(typed_bool(rng, depth - 1), typed_bool(rng, depth - 1))
    return Or(typed_bool(rng, depth - 1), typed_bool(rng, depth - 1))


def typed_void_call(rng: random.Random) -> Call:
    obj, method, arity = rng.choice(_VOID_CALLS)
    return Call(obj, method, tuple(_typed_int(rng) for _ in range(arity)))


def _typed_seq(rng, depth, budget, in_loop, in_par) -> tuple[Instr, ...]:
    count = rng.randint(1, 3)
    return tuple(_typed_instr(rng, depth, budget, in_loop, in_par) for _ in range(count))


def _typed_instr(rng, depth, budget, in_loop, in_par) -> Instr:
    budget[0] -= 1
    simple = depth <= 0 or budget[0] <= 0
    top = 4 if simple else 10
    pick = rng.randint(0, top)
    if pick == 0:
        return Wait(rng.randint(0, 4))
    if pick == 1 and in_loop:
        return Break()
    if pick <= 3:
        if in_par and rng.random() < 0.4:
            return ActionInterrupt(typed_void_call(rng))
        return Action(typed_void_call(rng))
    if pick == 4:
        return Action(typed_void_call(rng))
    if pick == 5:
        return Repeat(rng.randint(0, 3), _typed_seq(rng, depth - 1, budget, True, in_par))
    if pick == 6:
        return While(typed_bool(rng), _typed_seq(rng, depth - 1, budget, True, in_par))
    if pick == 7:
        else_body = (
            _typed_seq(rng, depth - 1, budget, in_loop, in_par) if rng.random() < 0.5 else None
        )
        return IfElse(typed_bool(rng), _typed_seq(rng, depth - 1, budget, in_loop, in_par), else_body)
    if pick == 8:
        return Event(typed_bool(rng), _typed_seq(rng, depth - 1, budget, in_loop, in_par))
    branches = tuple(
        _typed_seq(rng, depth - 1, budget, False, True) for _ in range(rng.randint(1, 3))
    )
    return Parallel(branches)


def typed_program(rng: random.Random, max_instrs: int = 40) -> Program:
    budget = [rng.randint(1, max_instrs)]
    instrs = []
    while budget[0] > 0:
        instrs.append(_typed_instr(rng, 3, budget, False, False))
    return Program(tuple(instrs))


# -- typed graph fuzzer -------------------------------------------------------


def _graph_seq(rng, b: GraphBuilder, depth, budget, in_loop, in_par) -> list[str]:
    count = rng.randint(1, 3)
    return [_graph_vertex(rng, b, depth, budget, in_loop, in_par) for _ in range(count)]


def _graph_vertex(rng, b: GraphBuilder, depth, budget, in_loop, in_par) -> str:
    budget[0] -= 1
    simple = depth <= 0 or budget[0] <= 0
    pick = rng.randint(0, 4 if simple else 10)
    if pick == 0:
        return b.wait(rng.randint(0, 9))
    if pick == 1 and in_loop:
        return b.break_()
    if pick <= 4:
        call = typed_void_call(rng)
        interrupt = in_par and rng.random() < 0.3
        return b.action(call.object, call.method, call.args, interrupt=interrupt)
    if pick == 5:
        return b.repeat(rng.randint(0, 3), _graph_seq(rng, b, depth - 1, budget, True, in_par))
    if pick == 6:
        return b.while_(typed_bool(rng), _graph_seq(rng, b, depth - 1, budget, True, in_par))
    if pick == 7:
        if rng.random() < 0.5:
            return b.if_then(typed_bool(rng), _graph_seq(rng, b, depth - 1, budget, in_loop, in_par))
        return b.if_then_else(
            typed_bool(rng),
            _graph_seq(rng, b, depth - 1, budget, in_loop, in_par),
            _graph_seq(rng, b, depth - 1, budget, in_loop, in_par),
        )
    if pick == 8:
        return b.event(typed_bool(rng), _graph_seq(rng, b, depth - 1, budget, in_loop, in_par))
    branches = [_graph_seq(rng, b, depth - 1, budget, False, True) for _ in range(rng.randint(1, 3))]
    return b.parallel(branches)


def typed_graph(rng: random.Random, max_blocks: int = 30) -> ProgramGraph:
    b = GraphBuilder()
    budget = [rng.randint(0, max_blocks)]
    top = []
    while budget[0] > 0:
        top.append(_graph_vertex(rng, b, 3, budget, False, False))
    graph = b.build(top)
    if rng.random() < 0.3:  # sprinkle geometry so round-trips cover it
        for v in graph.vertices.values():
            if rng.random() < 0.5:
                v.x = rng.randint(0, 1600)
                v.y = rng.randint(0, 900)
    return graph


# -- range-violation corpus ----------------------------------------------------

_RANGE_TEMPLATES = (
    lambda v: f"wheel.Advance({v});",
    lambda v: f"motor.AbsoluteTurn({v},50);",
    lambda v: f"motor.AbsoluteTurn(10,{v});",
    lambda v: f"count.Set({v});",
    lambda v: f"3*(wheel.Reverse({v}););",
    lambda v: f"*[captor.EqualTo({v})](WAIT(1););",
    lambda v: f"[captor.LessThan({v})](wheel.Stop(););",
    lambda v: f"<captor.GreaterThan({v})>(door.Open(););",
    lambda v: f"//(WAIT(1);,motor.Turn({v}););",
    lambda v: f"count.Set(count.Get());wheel.Advance({v});",
)


def range_violation_case(rng: random.Random, i: int) -> str:
    value = rng.randint(101, 99999)
    return _RANGE_TEMPLATES[i % len(_RANGE_TEMPLATES)](value)


# -- interrupt golden cases ----------------------------------------------------

# name, program, scripted sensor streams, expected aborted branch indexes
# (in record order). Abort expectations follow from the rule that a parallel
# ends once its non-interruptible branches are done (or all, when every
# branch is interruptible), at which point still-live branches are aborted.
INTERRUPT_CASES = [
    (
        "basic-abort",
        "//(WAIT(2);, °light.LightOn()°; *[flag.IsFalse()](WAIT(1);););",
        {},
        [1],
    ),
    (
        "all-interruptible-no-abort",
        "//(°light.LightOn()°;, °door.Open()°; WAIT(3););",
        {},
        [],
    ),
    (
        "single-interruptible",
        "//(°wheel.Stop()°;);",
        {},
        [],
    ),
    (
        "interruptible-finishes-first",
        "//(WAIT(5);, °door.Open()°;);",
        {},
        [],
    ),
    (
        "inner-parallel-abort",
        "//(WAIT(4);, //(WAIT(1);, °light.LightOn()°; *[flag.IsFalse()](WAIT(1););););",
        {},
        [1],
    ),
    (
        "abort-cascades-into-subtree",
        "//(WAIT(2);, //(WAIT(9);, °light.LightOn()°; *[flag.IsFalse()](WAIT(1););););",
        {},
        [1, 0, 1],
    ),
    (
        "interruptible-blocked-on-event",
        "//(WAIT(2);, °light.LightOn()°; <flag.IsTrue()>(door.Open();););",
        {},
        [1],
    ),
    (
        "break-finishes-before-abort",
        "//(WAIT(8);, °light.LightOn()°; *[flag.IsFalse()]([button.IsPressed()](BREAK;);WAIT(0);););",
        {("button", "IsPressed"): [False, True]},
        [],
    ),
    (
        "three-branches-one-abort",
        "//(WAIT(1);, WAIT(4);, °switch.SwitchOn()°; *[flag.IsFalse()](WAIT(1);););",
        {},
        [2],
    ),
    (
        "interrupt-deep-in-branch",
        "//(WAIT(3);, [flag.IsFalse()](°light.LightOn()°; *[flag.IsFalse()](WAIT(1););););",
        {},
        [1],
    ),
]
