import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kitrobot.graph import (
    GraphBuilder,
    KrtInvariantError,
    KrtSchemaError,
    KrtVersionError,
    ProgramGraph,
    Vertex,
    load_krt,
    save_krt,
    structurally_equal,
    validate_graph,
    validate_structure,
)
from kitrobot.lll.nodes import Call, IntLit
from support import typed_graph


def minimal_graph():
    return GraphBuilder().build([])


def wait_graph(ticks=5):
    b = GraphBuilder()
    return b.build([b.wait(ticks)])


def test_minimal_graph_is_valid(catalog):
    assert validate_graph(minimal_graph(), catalog) == []


def test_two_stops_rejected(catalog):
    g = minimal_graph()
    g.vertices["zz"] = Vertex("zz", "stop")
    g.top.append("zz")
    diags = validate_graph(g, catalog)
    assert any("multiple Stop vertices" in d.message for d in diags)


def test_missing_start_rejected():
    g = wait_graph()
    start_id = g.top[0]
    del g.vertices[start_id]
    g.top.remove(start_id)
    diags = validate_structure(g)
    assert any("missing Start" in d.message for d in diags)


def test_vertex_owned_twice_rejected():
    b = GraphBuilder()
    w = b.wait(1)
    g = b.build([w])
    g.top.insert(1, w)
    diags = validate_structure(g)
    assert any("owned twice" in d.message for d in diags)


def test_unreachable_vertex_rejected():
    g = wait_graph()
    g.vertices["orphan"] = Vertex("orphan", "wait", ticks=1)
    diags = validate_structure(g)
    assert any("unreachable" in d.message for d in diags)


def test_empty_slot_rejected(catalog):
    b = GraphBuilder()
    r = b.repeat(3, [])
    diags = validate_graph(b.build([r]), catalog)
    assert any(d.code == "empty-slot" for d in diags)


def test_break_in_top_mirrors_typecheck(catalog):
    from kitrobot.codegen import ast_of
    from kitrobot.lll.typecheck import typecheck

    b = GraphBuilder()
    g = b.build([b.break_()])
    graph_codes = {d.code for d in validate_graph(g, catalog)}
    source_codes = {d.code for d in typecheck(ast_of(g), catalog)}
    assert graph_codes == source_codes == {"break-outside-loop"}


def test_interrupt_flag_needs_parallel(catalog):
    b = GraphBuilder()
    g = b.build([b.action("motor", "Turn", (IntLit(10),), interrupt=True)])
    assert {d.code for d in validate_graph(g, catalog)} == {"interrupt-outside-parallel"}
    b2 = GraphBuilder()
    g2 = b2.build([b2.parallel([[b2.action("motor", "Turn", (IntLit(10),), interrupt=True)]])])
    assert validate_graph(g2, catalog) == []


def test_action_typecheck_carries_vertex_id(catalog):
    b = GraphBuilder()
    a = b.action("wheel", "Advance", (IntLit(150),))
    diags = validate_graph(b.build([a]), catalog)
    assert [d.code for d in diags] == ["range"]
    assert diags[0].vertex == a


def test_save_wait_graph_schema():
    text = save_krt(wait_graph())
    assert '<krt version="1">' in text
    assert '<wait ticks="5" />' in text or '<wait ticks="5"/>' in text


def test_save_load_round_trip_simple():
    g = wait_graph()
    assert structurally_equal(load_krt(save_krt(g)), g)


def test_save_refuses_invalid_graph():
    g = wait_graph()
    g.top.pop()  # drop Stop
    del g.vertices[[vid for vid in g.vertices if g.vertices[vid].kind == "stop"][0]]
    with pytest.raises(KrtInvariantError):
        save_krt(g)


def test_save_is_deterministic():
    b1 = GraphBuilder()
    g1 = b1.build([b1.repeat(3, [b1.action("wheel", "Advance", (IntLit(50),))])])
    b2 = GraphBuilder()
    g2 = b2.build([b2.repeat(3, [b2.action("wheel", "Advance", (IntLit(50),))])])
    assert save_krt(g1) == save_krt(g2)


def test_load_version_99_rejected():
    with pytest.raises(KrtVersionError, match="99"):
        load_krt('<krt version="99"><program><start/><stop/></program></krt>')


def test_load_duplicate_id_rejected():
    text = (
        '<krt version="1"><program><start/>'
        '<wait ticks="1" id="w"/><wait ticks="2" id="w"/>'
        "<stop/></program></krt>"
    )
    with pytest.raises(KrtInvariantError, match="owned twice"):
        load_krt(text)


def test_load_unknown_element_rejected():
    with pytest.raises(KrtSchemaError, match="unexpected element"):
        load_krt('<krt version="1"><program><start/><gosub/><stop/></program></krt>')


def test_load_document_without_start_rejected():
    with pytest.raises(KrtInvariantError):
        load_krt('<krt version="1"><program><wait ticks="1"/><stop/></program></krt>')


def test_geometry_survives_round_trip():
    b = GraphBuilder()
    w = b.wait(2)
    g = b.build([w])
    g.vertices[w].x = 120
    g.vertices[w].y = 44
    loaded = load_krt(save_krt(g))
    assert structurally_equal(loaded, g)
    reloaded = [v for v in loaded.vertices.values() if v.kind == "wait"][0]
    assert (reloaded.x, reloaded.y) == (120, 44)


def test_cond_and_nested_arg_round_trip(catalog):
    b = GraphBuilder()
    body = [b.action("wheel", "Advance", (Call("count", "Get"),))]
    w = b.while_(Call("flag", "IsTrue"), body)
    g = b.build([w])
    assert validate_graph(g, catalog) == []
    assert structurally_equal(load_krt(save_krt(g)), g)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_krt_round_trip_property(seed):
    g = typed_graph(random.Random(seed))
    assert structurally_equal(load_krt(save_krt(g)), g)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fuzzed_graphs_validate(catalog, seed):
    g = typed_graph(random.Random(seed))
    assert validate_graph(g, catalog) == []
