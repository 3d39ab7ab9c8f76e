import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kitrobot.lll import parse
from kitrobot.trace import to_jsonl
from kitrobot.vm import Machine, ProgramCheckError, ReferenceMachine, load_program, run
from support import GOLDEN_DIR, INTERRUPT_CASES, MockBackend, typed_program


def lines(trace):
    return to_jsonl(trace).splitlines()


def test_load_program_initial_state(catalog):
    machine = load_program("WAIT(1);", catalog, "c1")
    assert machine.clock == 0 and not machine.done
    assert machine.variables == {"count": 0, "flag": False}


def test_load_program_propagates_diagnostics(catalog):
    with pytest.raises(ProgramCheckError) as err:
        load_program("wheel.Advance(150);", catalog, "c1")
    assert [d.code for d in err.value.diagnostics] == ["range"]


def test_empty_program_is_done_immediately(catalog):
    machine = load_program("", catalog, "c1")
    assert machine.done
    run(machine, MockBackend(), 10)
    assert lines(machine.trace) == ['{"tick":0,"agent":"c1","kind":"program-end","value":"completed"}']


def test_repeat_runs_body_exactly_n_times(catalog):
    machine, _ = run(load_program("3*(motor.Turn(10););", catalog, "c1"), MockBackend(), 20)
    actions = [r for r in machine.trace if r.kind == "action"]
    assert [(r.tick, r.object, r.method) for r in actions] == [
        (0, "motor", "Turn"),
        (1, "motor", "Turn"),
        (2, "motor", "Turn"),
    ]
    assert machine.finished_tick == 3


def test_repeat_zero_skips_body(catalog):
    machine, _ = run(load_program("0*(motor.Turn(10););", catalog, "c1"), MockBackend(), 20)
    assert all(r.kind != "action" for r in machine.trace)
    assert machine.finished_tick == 0


def test_wait_completes_at_its_tick(catalog):
    machine, _ = run(load_program("WAIT(3);", catalog, "c1"), MockBackend(), 10)
    assert lines(machine.trace) == [
        '{"tick":0,"agent":"c1","kind":"wait-start","value":3}',
        '{"tick":3,"agent":"c1","kind":"wait-end"}',
        '{"tick":3,"agent":"c1","kind":"program-end","value":"completed"}',
    ]


def test_wait_zero_consumes_one_step(catalog):
    machine, _ = run(load_program("WAIT(0);motor.Stop();", catalog, "c1"), MockBackend(), 10)
    action = [r for r in machine.trace if r.kind == "action"][0]
    assert action.tick == 1


def test_budget_exhaustion(catalog):
    machine, _ = run(load_program("*[flag.IsFalse()](WAIT(1););", catalog, "c1"), MockBackend(), 5)
    assert not machine.failed
    assert lines(machine.trace)[-1] == (
        '{"tick":5,"agent":"c1","kind":"program-end","value":"tick-budget-exhausted"}'
    )


def test_while_with_false_guard_never_runs_body(catalog):
    src = "*[button.IsPressed()](BREAK;);"
    machine, _ = run(
        load_program(src, catalog, "c1"),
        MockBackend(scripts={("button", "IsPressed"): [False]}),
        10,
    )
    assert lines(machine.trace) == [
        '{"tick":0,"agent":"c1","kind":"cond-eval","value":false}',
        '{"tick":1,"agent":"c1","kind":"program-end","value":"completed"}',
    ]


def test_event_fires_on_first_true_evaluation(catalog):
    src = "<button.IsPressed()>(door.Open(););"
    backend = MockBackend(scripts={("button", "IsPressed"): [False, False, False, True]})
    machine, _ = run(load_program(src, catalog, "c1"), backend, 10)
    assert lines(machine.trace) == [
        '{"tick":1,"agent":"c1","kind":"cond-eval","value":false}',
        '{"tick":2,"agent":"c1","kind":"cond-eval","value":false}',
        '{"tick":3,"agent":"c1","kind":"cond-eval","value":false}',
        '{"tick":4,"agent":"c1","kind":"cond-eval","value":true}',
        '{"tick":5,"agent":"c1","kind":"action","object":"door","method":"Open","args":[]}',
        '{"tick":6,"agent":"c1","kind":"program-end","value":"completed"}',
    ]


def test_device_fault_aborts_the_run(catalog):
    src = "WAIT(1);door.Open();light.LightOn();"
    machine, _ = run(load_program(src, catalog, "c1"), MockBackend(missing=("light",)), 20)
    assert machine.failed and machine.done
    assert lines(machine.trace)[-2:] == [
        '{"tick":2,"agent":"c1","kind":"action-aborted","object":"light","method":"LightOn","args":[]}',
        '{"tick":2,"agent":"c1","kind":"program-end","value":"failed"}',
    ]


def test_step_on_done_machine_is_rejected(catalog):
    machine = load_program("", catalog, "c1")
    with pytest.raises(RuntimeError):
        machine.step_tick(MockBackend())


def test_variable_set_clamps_to_range(catalog):
    machine, _ = run(
        load_program("count.Set(count.Get());count.Set(100);", catalog, "c1"),
        MockBackend(),
        10,
    )
    assert machine.variables["count"] == 100


def test_break_exits_only_innermost_loop(catalog):
    src = "2*(*[flag.IsFalse()](BREAK;wheel.Stop(););motor.Stop(););"
    machine, _ = run(load_program(src, catalog, "c1"), MockBackend(), 20)
    actions = [(r.tick, r.object) for r in machine.trace if r.kind == "action"]
    # the outer repeat still runs both passes; the inner while is left at once
    assert actions == [(2, "motor"), (5, "motor")]


def test_cond_eval_does_not_touch_backend_actions(catalog):
    backend = MockBackend()
    machine, _ = run(load_program("*[button.IsPressed()](WAIT(1););", catalog, "c1"), backend, 6)
    assert backend.actions == []


def interrupt_golden(name):
    source = (GOLDEN_DIR / "interrupt" / f"{name}.lll").read_text()
    expected = (GOLDEN_DIR / "interrupt" / f"{name}.jsonl").read_bytes()
    return source, expected


@pytest.mark.parametrize("name,source,scripts,expected_aborts", INTERRUPT_CASES, ids=[c[0] for c in INTERRUPT_CASES])
def test_interrupt_golden_suite(catalog, name, source, scripts, expected_aborts):
    golden_source, expected = interrupt_golden(name)
    assert golden_source == source
    machine, _ = run(Machine(parse(source), catalog, "c1"), MockBackend(seed=7, scripts=scripts), 64)
    assert to_jsonl(machine.trace).encode() == expected
    aborted = [r.value for r in machine.trace if r.kind == "branch-aborted"]
    assert aborted == expected_aborts


def test_aborted_branch_emits_no_further_actions(catalog):
    source = "//(WAIT(2);, °light.LightOn()°; *[flag.IsFalse()](WAIT(1);););"
    machine, _ = run(Machine(parse(source), catalog, "c1"), MockBackend(), 64)
    abort_index = next(
        i for i, r in enumerate(machine.trace) if r.kind == "branch-aborted"
    )
    assert all(r.kind != "action" for r in machine.trace[abort_index + 1 :])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_aborts_happen_the_tick_a_sibling_finishes(catalog, seed):
    # a parallel completes exactly when the last branch of its termination
    # pool reports done, so every abort shares a tick with an earlier
    # branch-end record
    rng = random.Random(seed)
    program = typed_program(rng, max_instrs=20)
    machine, _ = run(Machine(program, catalog, "a"), MockBackend(seed=seed), 120)
    trace = machine.trace
    for i, record in enumerate(trace):
        if record.kind == "branch-aborted":
            assert any(r.kind == "branch-end" and r.tick == record.tick for r in trace[:i])


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_integer_variables_stay_in_range(catalog, seed):
    rng = random.Random(seed)
    machine = Machine(typed_program(rng, max_instrs=25), catalog, "a")
    backend = MockBackend(seed=seed)
    for _ in range(80):
        if machine.done:
            break
        machine.step_tick(backend)
        assert 0 <= machine.variables["count"] <= 100
        assert machine.variables["flag"] in (True, False)
