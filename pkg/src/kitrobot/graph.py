"""The visual program graph: blocks between Start and Stop, persisted as .krt.

Ownership is tree shaped: a vertex sits either in the top sequence or in
exactly one slot of one parent, which guarantees the well-nested control
flow the target language needs. Vertex ids identify blocks in diagnostics;
they are not part of structural equality and are not written to .krt files
(documents may still carry explicit ids, and duplicates are rejected).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from kitrobot.catalog import Catalog
from kitrobot.diagnostics import Diagnostic
from kitrobot.lll.nodes import And, Call, Expr, IntLit, Not, Or
from kitrobot.lll.typecheck import _Checker

KRT_VERSION = 1

START = "start"
STOP = "stop"
ACTION = "action"
REPEAT = "repeat"
WHILE = "while"
IF = "if"
IFELSE = "ifelse"
WAIT = "wait"
BREAK = "break"
PARALLEL = "parallel"
EVENT = "event"

# kind -> (fixed slot count or None for parallel's 1-or-more, slot tags)
_SLOT_SHAPE = {
    START: 0,
    STOP: 0,
    ACTION: 0,
    REPEAT: 1,
    WHILE: 1,
    IF: 1,
    IFELSE: 2,
    WAIT: 0,
    BREAK: 0,
    PARALLEL: None,
    EVENT: 1,
}

_LOOP_KINDS = (REPEAT, WHILE)


class KrtError(Exception):
    """Base class for .krt load/save failures."""


class KrtParseError(KrtError):
    pass


class KrtVersionError(KrtError):
    pass


class KrtSchemaError(KrtError):
    pass


class KrtInvariantError(KrtError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics))


@dataclass
class Vertex:
    id: str
    kind: str
    call: Call | None = None
    interrupt: bool = False
    count: int | None = None
    ticks: int | None = None
    cond: Expr | None = None
    slots: list[list[str]] = field(default_factory=list)
    x: int | None = None
    y: int | None = None


@dataclass
class ProgramGraph:
    vertices: dict[str, Vertex]
    top: list[str]
    version: int = KRT_VERSION

    def vertex(self, vid: str) -> Vertex:
        return self.vertices[vid]


class GraphBuilder:
    """Convenience construction API; allocates ids and assembles the graph."""

    def __init__(self) -> None:
        self._n = 0
        self.vertices: dict[str, Vertex] = {}

    def _add(self, vertex: Vertex) -> str:
        self.vertices[vertex.id] = vertex
        return vertex.id

    def _fresh(self) -> str:
        self._n += 1
        return f"n{self._n}"

    def action(self, obj: str, method: str, args: tuple[Expr, ...] = (), interrupt: bool = False) -> str:
        return self._add(Vertex(self._fresh(), ACTION, call=Call(obj, method, tuple(args)), interrupt=interrupt))

    def repeat(self, count: int, body: list[str]) -> str:
        return self._add(Vertex(self._fresh(), REPEAT, count=count, slots=[body]))

    def while_(self, cond: Expr, body: list[str]) -> str:
        return self._add(Vertex(self._fresh(), WHILE, cond=cond, slots=[body]))

    def if_then(self, cond: Expr, body: list[str]) -> str:
        return self._add(Vertex(self._fresh(), IF, cond=cond, slots=[body]))

    def if_then_else(self, cond: Expr, then_body: list[str], else_body: list[str]) -> str:
        return self._add(Vertex(self._fresh(), IFELSE, cond=cond, slots=[then_body, else_body]))

    def wait(self, ticks: int) -> str:
        return self._add(Vertex(self._fresh(), WAIT, ticks=ticks))

    def break_(self) -> str:
        return self._add(Vertex(self._fresh(), BREAK))

    def parallel(self, branches: list[list[str]]) -> str:
        return self._add(Vertex(self._fresh(), PARALLEL, slots=branches))

    def event(self, cond: Expr, body: list[str]) -> str:
        return self._add(Vertex(self._fresh(), EVENT, cond=cond, slots=[body]))

    def build(self, top: list[str]) -> ProgramGraph:
        start = self._add(Vertex(self._fresh(), START))
        stop = self._add(Vertex(self._fresh(), STOP))
        return ProgramGraph(dict(self.vertices), [start, *top, stop])


# -- validation -------------------------------------------------------------


def validate_structure(graph: ProgramGraph) -> list[Diagnostic]:
    """Check the shape invariants (sentinels, tree ownership, slot arity)."""
    diags: list[Diagnostic] = []

    def report(code: str, message: str, vid: str | None = None) -> None:
        diags.append(Diagnostic(code, message, vertex=vid))

    starts = [vid for vid, v in graph.vertices.items() if v.kind == START]
    stops = [vid for vid, v in graph.vertices.items() if v.kind == STOP]
    if len(starts) != 1:
        report("sentinel", "multiple Start vertices" if starts else "missing Start vertex")
    if len(stops) != 1:
        report("sentinel", "multiple Stop vertices" if stops else "missing Stop vertex")

    if not graph.top:
        report("sentinel", "top sequence is empty")
    else:
        first = graph.vertices.get(graph.top[0])
        last = graph.vertices.get(graph.top[-1])
        if first is None or first.kind != START:
            report("sentinel", "top sequence must begin with Start")
        if last is None or last.kind != STOP:
            report("sentinel", "top sequence must end with Stop")
        for vid in graph.top[1:-1]:
            v = graph.vertices.get(vid)
            if v is not None and v.kind in (START, STOP):
                report("sentinel", f"{v.kind} vertex in the middle of the top sequence", vid)

    seen: dict[str, int] = {}

    def walk_ref(vid: str) -> None:
        seen[vid] = seen.get(vid, 0) + 1
        if seen[vid] > 1:
            report("ownership", f"vertex owned twice: {vid}", vid)
            return
        v = graph.vertices.get(vid)
        if v is None:
            report("ownership", f"reference to unknown vertex: {vid}")
            return
        for slot in v.slots:
            for child in slot:
                walk_ref(child)

    for vid in graph.top:
        walk_ref(vid)
    for vid in graph.vertices:
        if vid not in seen:
            report("ownership", f"vertex unreachable from Start: {vid}", vid)

    for vid, v in graph.vertices.items():
        if v.kind not in _SLOT_SHAPE:
            report("kind", f"unknown vertex kind: {v.kind}", vid)
            continue
        shape = _SLOT_SHAPE[v.kind]
        if shape is None:
            if len(v.slots) < 1:
                report("arity", "parallel block needs at least one branch slot", vid)
        elif len(v.slots) != shape:
            report("arity", f"{v.kind} block must have exactly {shape} slot(s), has {len(v.slots)}", vid)
        for slot in v.slots:
            if not slot:
                report("empty-slot", f"{v.kind} block has an empty slot", vid)
        if v.kind == ACTION and v.call is None:
            report("payload", "action block is missing its call", vid)
        if v.kind == REPEAT and (v.count is None or v.count < 0):
            report("payload", "repeat block needs a non-negative count", vid)
        if v.kind == WAIT and (v.ticks is None or v.ticks < 0):
            report("payload", "wait block needs a non-negative tick count", vid)
        if v.kind in (WHILE, IF, IFELSE, EVENT) and v.cond is None:
            report("payload", f"{v.kind} block is missing its condition", vid)
        if v.kind in (START, STOP) and (v.slots or v.call or v.cond or v.count or v.ticks):
            report("payload", f"{v.kind} vertex carries no payload or slots", vid)
        if v.interrupt and v.kind != ACTION:
            report("payload", "only action blocks can carry the interrupt flag", vid)

    return diags


def validate_graph(graph: ProgramGraph, catalog: Catalog) -> list[Diagnostic]:
    """Structural checks plus catalog typing, break placement and interrupt placement."""
    diags = validate_structure(graph)
    if diags:
        return diags

    checker = _Checker(catalog)

    def check_seq(ids: list[str], loop_depth: int, in_parallel: bool) -> None:
        for vid in ids:
            v = graph.vertices[vid]
            before = len(checker.diags)
            if v.kind == ACTION:
                checker.check_action(v.call)
                if v.interrupt and not in_parallel:
                    diags.append(
                        Diagnostic(
                            "interrupt-outside-parallel",
                            "interrupt flag is only allowed inside a parallel branch",
                            vertex=vid,
                        )
                    )
            elif v.kind == BREAK:
                if loop_depth == 0:
                    diags.append(
                        Diagnostic(
                            "break-outside-loop",
                            "break block is only allowed inside a repetition or while body",
                            vertex=vid,
                        )
                    )
            elif v.kind in (WHILE, IF, IFELSE, EVENT):
                checker.check_cond(v.cond)
            for d in checker.diags[before:]:
                diags.append(Diagnostic(d.code, d.message, vertex=vid))
            del checker.diags[before:]

            if v.kind == PARALLEL:
                for slot in v.slots:
                    check_seq(slot, 0, True)
            elif v.kind in _LOOP_KINDS:
                for slot in v.slots:
                    check_seq(slot, loop_depth + 1, in_parallel)
            else:
                for slot in v.slots:
                    check_seq(slot, loop_depth, in_parallel)

    check_seq(graph.top[1:-1], 0, False)
    return diags


# -- structural equality ------------------------------------------------------


def _fingerprint(graph: ProgramGraph, vid: str):
    v = graph.vertices[vid]
    payload = (v.kind, v.call, v.interrupt, v.count, v.ticks, v.cond, v.x, v.y)
    return payload, tuple(
        tuple(_fingerprint(graph, child) for child in slot) for slot in v.slots
    )


def structurally_equal(a: ProgramGraph, b: ProgramGraph) -> bool:
    """Equality up to vertex id renaming; geometry and payloads included."""
    if a.version != b.version or len(a.top) != len(b.top):
        return False
    return all(_fingerprint(a, x) == _fingerprint(b, y) for x, y in zip(a.top, b.top))


# -- .krt serialization -------------------------------------------------------


def _expr_to_xml(expr: Expr) -> ET.Element:
    if isinstance(expr, IntLit):
        return ET.Element("int", {"value": str(expr.value)})
    if isinstance(expr, Call):
        elem = ET.Element("call", {"object": expr.object, "method": expr.method})
        for arg in expr.args:
            elem.append(_arg_to_xml(arg))
        return elem
    if isinstance(expr, Not):
        elem = ET.Element("not")
        elem.append(_expr_to_xml(expr.operand))
        return elem
    if isinstance(expr, (And, Or)):
        elem = ET.Element("and" if isinstance(expr, And) else "or")
        elem.append(_expr_to_xml(expr.left))
        elem.append(_expr_to_xml(expr.right))
        return elem
    raise TypeError(f"not an expression node: {expr!r}")


def _arg_to_xml(arg: Expr) -> ET.Element:
    if isinstance(arg, IntLit):
        return ET.Element("arg", {"int": str(arg.value)})
    elem = ET.Element("arg")
    cond = ET.SubElement(elem, "cond")
    cond.append(_expr_to_xml(arg))
    return elem


def _cond_payload_to_xml(expr: Expr) -> ET.Element:
    elem = ET.Element("cond")
    elem.append(_expr_to_xml(expr))
    return elem


def _vertex_to_xml(graph: ProgramGraph, vid: str) -> ET.Element:
    v = graph.vertices[vid]
    attrs: dict[str, str] = {}
    if v.x is not None:
        attrs["x"] = str(v.x)
    if v.y is not None:
        attrs["y"] = str(v.y)
    if v.kind == ACTION:
        call_attrs = {"object": v.call.object, "method": v.call.method}
        if v.interrupt:
            call_attrs["interrupt"] = "true"
        elem = ET.Element("action", call_attrs | attrs)
        for arg in v.call.args:
            elem.append(_arg_to_xml(arg))
        return elem
    if v.kind == REPEAT:
        elem = ET.Element("repeat", {"count": str(v.count)} | attrs)
        body = ET.SubElement(elem, "body")
        _extend_seq(graph, body, v.slots[0])
        return elem
    if v.kind == WHILE:
        elem = ET.Element("while", attrs)
        elem.append(_cond_payload_to_xml(v.cond))
        body = ET.SubElement(elem, "body")
        _extend_seq(graph, body, v.slots[0])
        return elem
    if v.kind == IF:
        elem = ET.Element("if", attrs)
        elem.append(_cond_payload_to_xml(v.cond))
        then = ET.SubElement(elem, "then")
        _extend_seq(graph, then, v.slots[0])
        return elem
    if v.kind == IFELSE:
        elem = ET.Element("ifelse", attrs)
        elem.append(_cond_payload_to_xml(v.cond))
        then = ET.SubElement(elem, "then")
        _extend_seq(graph, then, v.slots[0])
        els = ET.SubElement(elem, "else")
        _extend_seq(graph, els, v.slots[1])
        return elem
    if v.kind == WAIT:
        return ET.Element("wait", {"ticks": str(v.ticks)} | attrs)
    if v.kind == BREAK:
        return ET.Element("break", attrs)
    if v.kind == PARALLEL:
        elem = ET.Element("parallel", attrs)
        for slot in v.slots:
            branch = ET.SubElement(elem, "branch")
            _extend_seq(graph, branch, slot)
        return elem
    if v.kind == EVENT:
        elem = ET.Element("event", attrs)
        elem.append(_cond_payload_to_xml(v.cond))
        body = ET.SubElement(elem, "body")
        _extend_seq(graph, body, v.slots[0])
        return elem
    if v.kind in (START, STOP):
        return ET.Element(v.kind, attrs)
    raise KrtSchemaError(f"unknown vertex kind: {v.kind}")


def _extend_seq(graph: ProgramGraph, parent: ET.Element, ids: list[str]) -> None:
    for vid in ids:
        parent.append(_vertex_to_xml(graph, vid))


def save_krt(graph: ProgramGraph) -> str:
    """Serialize a structurally valid graph to .krt XML (byte-deterministic)."""
    diags = validate_structure(graph)
    if diags:
        raise KrtInvariantError(diags)
    root = ET.Element("krt", {"version": str(graph.version)})
    program = ET.SubElement(root, "program")
    _extend_seq(graph, program, graph.top)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


# -- .krt loading -------------------------------------------------------------


class _Loader:
    def __init__(self) -> None:
        self.vertices: dict[str, Vertex] = {}
        self.used_ids: set[str] = set()
        self._n = 0

    def take_id(self, elem: ET.Element) -> str:
        explicit = elem.attrib.get("id")
        if explicit is not None:
            if explicit in self.used_ids:
                raise KrtInvariantError(
                    [Diagnostic("ownership", f"vertex owned twice: {explicit}", vertex=explicit)]
                )
            self.used_ids.add(explicit)
            return explicit
        while True:
            self._n += 1
            vid = f"v{self._n}"
            if vid not in self.used_ids:
                self.used_ids.add(vid)
                return vid

    def geometry(self, elem: ET.Element) -> tuple[int | None, int | None]:
        x = elem.attrib.get("x")
        y = elem.attrib.get("y")
        return (int(x) if x is not None else None, int(y) if y is not None else None)

    def check_attrs(self, elem: ET.Element, allowed: set[str]) -> None:
        allowed = allowed | {"id", "x", "y"}
        for key in elem.attrib:
            if key not in allowed:
                raise KrtSchemaError(f"unexpected attribute on <{elem.tag}>: {key}")

    def expr_from(self, elem: ET.Element) -> Expr:
        if elem.tag == "int":
            return IntLit(int(elem.attrib["value"]))
        if elem.tag == "call":
            args = []
            for arg in elem:
                if arg.tag != "arg":
                    raise KrtSchemaError(f"unexpected element in <call>: <{arg.tag}>")
                args.append(self.arg_from(arg))
            return Call(elem.attrib["object"], elem.attrib["method"], tuple(args))
        if elem.tag == "not":
            children = list(elem)
            if len(children) != 1:
                raise KrtSchemaError("<not> needs exactly one child expression")
            return Not(self.expr_from(children[0]))
        if elem.tag in ("and", "or"):
            children = list(elem)
            if len(children) != 2:
                raise KrtSchemaError(f"<{elem.tag}> needs exactly two child expressions")
            cls = And if elem.tag == "and" else Or
            return cls(self.expr_from(children[0]), self.expr_from(children[1]))
        raise KrtSchemaError(f"unexpected expression element: <{elem.tag}>")

    def arg_from(self, elem: ET.Element) -> Expr:
        if "int" in elem.attrib:
            if len(elem):
                raise KrtSchemaError("<arg int=...> may not have children")
            return IntLit(int(elem.attrib["int"]))
        children = list(elem)
        if len(children) != 1 or children[0].tag != "cond":
            raise KrtSchemaError("<arg> carries either int=\"...\" or one nested <cond>")
        return self.cond_from(children[0])

    def cond_from(self, elem: ET.Element) -> Expr:
        children = list(elem)
        if len(children) != 1:
            raise KrtSchemaError("<cond> needs exactly one child expression")
        return self.expr_from(children[0])

    def seq_from(self, parent: ET.Element) -> list[str]:
        return [self.vertex_from(child) for child in parent]

    def named_child(self, elem: ET.Element, index: int, tag: str) -> ET.Element:
        children = list(elem)
        if index >= len(children) or children[index].tag != tag:
            raise KrtSchemaError(f"<{elem.tag}> needs a <{tag}> child at position {index}")
        return children[index]

    def vertex_from(self, elem: ET.Element) -> str:
        tag = elem.tag
        if tag == "action":
            self.check_attrs(elem, {"object", "method", "interrupt"})
            args = []
            for child in elem:
                if child.tag != "arg":
                    raise KrtSchemaError(f"unexpected element in <action>: <{child.tag}>")
                args.append(self.arg_from(child))
            call = Call(elem.attrib["object"], elem.attrib["method"], tuple(args))
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            interrupt = elem.attrib.get("interrupt", "false") == "true"
            self.vertices[vid] = Vertex(vid, ACTION, call=call, interrupt=interrupt, x=x, y=y)
            return vid
        if tag == "repeat":
            self.check_attrs(elem, {"count"})
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            body = self.seq_from(self.named_child(elem, 0, "body"))
            if len(list(elem)) != 1:
                raise KrtSchemaError("<repeat> has exactly one <body> child")
            self.vertices[vid] = Vertex(
                vid, REPEAT, count=int(elem.attrib["count"]), slots=[body], x=x, y=y
            )
            return vid
        if tag in ("while", "event"):
            self.check_attrs(elem, set())
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            cond = self.cond_from(self.named_child(elem, 0, "cond"))
            body = self.seq_from(self.named_child(elem, 1, "body"))
            if len(list(elem)) != 2:
                raise KrtSchemaError(f"<{tag}> has exactly <cond> and <body> children")
            kind = WHILE if tag == "while" else EVENT
            self.vertices[vid] = Vertex(vid, kind, cond=cond, slots=[body], x=x, y=y)
            return vid
        if tag == "if":
            self.check_attrs(elem, set())
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            cond = self.cond_from(self.named_child(elem, 0, "cond"))
            then = self.seq_from(self.named_child(elem, 1, "then"))
            if len(list(elem)) != 2:
                raise KrtSchemaError("<if> has exactly <cond> and <then> children")
            self.vertices[vid] = Vertex(vid, IF, cond=cond, slots=[then], x=x, y=y)
            return vid
        if tag == "ifelse":
            self.check_attrs(elem, set())
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            cond = self.cond_from(self.named_child(elem, 0, "cond"))
            then = self.seq_from(self.named_child(elem, 1, "then"))
            els = self.seq_from(self.named_child(elem, 2, "else"))
            if len(list(elem)) != 3:
                raise KrtSchemaError("<ifelse> has exactly <cond>, <then> and <else> children")
            self.vertices[vid] = Vertex(vid, IFELSE, cond=cond, slots=[then, els], x=x, y=y)
            return vid
        if tag == "wait":
            self.check_attrs(elem, {"ticks"})
            if len(elem):
                raise KrtSchemaError("<wait> has no children")
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            self.vertices[vid] = Vertex(vid, WAIT, ticks=int(elem.attrib["ticks"]), x=x, y=y)
            return vid
        if tag == "break":
            self.check_attrs(elem, set())
            if len(elem):
                raise KrtSchemaError("<break> has no children")
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            self.vertices[vid] = Vertex(vid, BREAK, x=x, y=y)
            return vid
        if tag == "parallel":
            self.check_attrs(elem, set())
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            branches = []
            for child in elem:
                if child.tag != "branch":
                    raise KrtSchemaError(f"unexpected element in <parallel>: <{child.tag}>")
                branches.append(self.seq_from(child))
            self.vertices[vid] = Vertex(vid, PARALLEL, slots=branches, x=x, y=y)
            return vid
        if tag in ("start", "stop"):
            self.check_attrs(elem, set())
            if len(elem):
                raise KrtSchemaError(f"<{tag}> has no children")
            vid = self.take_id(elem)
            x, y = self.geometry(elem)
            self.vertices[vid] = Vertex(vid, tag, x=x, y=y)
            return vid
        raise KrtSchemaError(f"unexpected element: <{tag}>")


def load_krt(xml_text: str | bytes) -> ProgramGraph:
    """Load a .krt document into a validated ProgramGraph."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise KrtParseError(f"malformed XML (line {line}, column {col + 1})") from exc
    if root.tag != "krt":
        raise KrtSchemaError(f"expected <krt> root, found <{root.tag}>")
    version_raw = root.attrib.get("version")
    if version_raw is None:
        raise KrtSchemaError("<krt> is missing required attribute: version")
    try:
        version = int(version_raw)
    except ValueError:
        raise KrtSchemaError(f"version must be an integer, got {version_raw!r}")
    if version > KRT_VERSION or version < 1:
        raise KrtVersionError(f"unknown format version: {version}")
    programs = list(root)
    if len(programs) != 1 or programs[0].tag != "program":
        raise KrtSchemaError("<krt> has exactly one <program> child")
    loader = _Loader()
    top = loader.seq_from(programs[0])
    graph = ProgramGraph(loader.vertices, top, version)
    diags = validate_structure(graph)
    if diags:
        raise KrtInvariantError(diags)
    return graph
