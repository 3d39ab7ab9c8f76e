import random

from hypothesis import given, settings
from hypothesis import strategies as st

from kitrobot.lll import parse, typecheck
from support import range_violation_case, typed_program


def codes(diags):
    return [d.code for d in diags]


def test_clean_program(catalog):
    assert typecheck(parse("3*(wheel.Advance(count.Get()););"), catalog) == []


def test_range_violation(catalog):
    diags = typecheck(parse("wheel.Advance(150);"), catalog)
    assert codes(diags) == ["range"]
    assert "150" in diags[0].message


def test_break_outside_loop(catalog):
    diags = typecheck(parse("BREAK;"), catalog)
    assert codes(diags) == ["break-outside-loop"]


def test_break_inside_loop_ok(catalog):
    assert typecheck(parse("3*(BREAK;);"), catalog) == []
    assert typecheck(parse("*[flag.IsTrue()](BREAK;);"), catalog) == []


def test_break_does_not_escape_parallel_branch(catalog):
    # the loop is outside the branch, so the branch-local BREAK has no loop
    diags = typecheck(parse("3*(//(BREAK;,WAIT(1);););"), catalog)
    assert codes(diags) == ["break-outside-loop"]


def test_interrupt_needs_parallel(catalog):
    diags = typecheck(parse("°motor.Turn(10)°;"), catalog)
    assert codes(diags) == ["interrupt-outside-parallel"]
    assert typecheck(parse("//(°motor.Turn(10)°;);"), catalog) == []


def test_interrupt_deep_inside_branch_ok(catalog):
    assert typecheck(parse("//(WAIT(1);,3*(°motor.Turn(10)°;););"), catalog) == []


def test_unknown_object_and_method(catalog):
    assert codes(typecheck(parse("teleporter.Go();"), catalog)) == ["unknown-object"]
    assert codes(typecheck(parse("wheel.Warp();"), catalog)) == ["unknown-method"]


def test_arity_and_kind_mismatch(catalog):
    assert codes(typecheck(parse("wheel.Advance();"), catalog)) == ["arity-mismatch"]
    assert codes(typecheck(parse("wheel.Advance(flag.IsTrue());"), catalog)) == ["kind-mismatch"]


def test_action_must_be_void(catalog):
    assert codes(typecheck(parse("captor.EqualTo(5);"), catalog)) == ["not-void"]


def test_cond_must_be_bool(catalog):
    assert codes(typecheck(parse("*[5](WAIT(1););"), catalog)) == ["cond-type"]
    assert codes(typecheck(parse("*[count.Get()](WAIT(1););"), catalog)) == ["cond-type"]


def test_bool_operators_need_bool_operands(catalog):
    diags = typecheck(parse("*[flag.IsTrue() & 3](WAIT(1););"), catalog)
    assert codes(diags) == ["cond-type"]


def test_void_call_as_argument_is_kind_mismatch(catalog):
    diags = typecheck(parse("wheel.Advance(wheel.Stop());"), catalog)
    assert codes(diags) == ["kind-mismatch"]


def test_diagnostics_ordered_by_position(catalog):
    diags = typecheck(parse("wheel.Advance(150);BREAK;teleporter.Go();"), catalog)
    assert codes(diags) == ["range", "break-outside-loop", "unknown-object"]
    starts = [d.span.start for d in diags]
    assert starts == sorted(starts)


def test_diagnostic_spans_within_bounds(catalog):
    text = "wheel.Advance(150);BREAK;"
    limit = len(text.encode("utf-8"))
    for d in typecheck(parse(text), catalog):
        assert 0 <= d.span.start <= d.span.end <= limit


def test_range_corpus_sample(catalog):
    rng = random.Random(5)
    for i in range(50):
        diags = typecheck(parse(range_violation_case(rng, i)), catalog)
        assert codes(diags) == ["range"]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_typed_fuzzer_output_typechecks(catalog, seed):
    assert typecheck(typed_program(random.Random(seed)), catalog) == []
