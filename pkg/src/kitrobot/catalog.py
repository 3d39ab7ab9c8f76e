"""XML catalogs of program constructors and robot objects.

The two catalogs drive everything else: the palette the editor shows, the
calls the typechecker accepts, and the devices the simulator binds. Catalog
values are immutable after loading and safe to share between threads.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

INT = "int"
BOOL = "bool"
VOID = "void"

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
RESERVED_WORDS = frozenset({"WAIT", "BREAK"})

CONSTRUCTOR_KINDS = (
    "Repetition",
    "While",
    "IfThen",
    "IfThenElse",
    "Wait",
    "Break",
    "And",
    "Or",
    "Not",
    "Parallelism",
    "Branch",
    "Interrupt",
)

# kind -> (body slot count, takes a count, takes a condition).
# For Parallelism the slot count is the minimum; branches can be added.
_KIND_SHAPE = {
    "Repetition": (1, True, False),
    "While": (1, False, True),
    "IfThen": (1, False, True),
    "IfThenElse": (2, False, True),
    "Wait": (0, True, False),
    "Break": (0, False, False),
    "And": (0, False, False),
    "Or": (0, False, False),
    "Not": (0, False, False),
    "Parallelism": (1, False, False),
    "Branch": (0, False, False),
    "Interrupt": (0, False, False),
}


class CatalogError(Exception):
    """Base class for catalog loading and lookup failures."""


class CatalogParseError(CatalogError):
    """The XML document itself could not be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class CatalogSchemaError(CatalogError):
    """Well-formed XML that does not satisfy the catalog schema."""


class UnknownObjectError(CatalogError):
    def __init__(self, obj: str):
        self.object = obj
        super().__init__(f"unknown object: {obj}")


class UnknownMethodError(CatalogError):
    def __init__(self, obj: str, method: str):
        self.object = obj
        self.method = method
        super().__init__(f"unknown method: {obj}.{method}")


class ArityMismatchError(CatalogError):
    def __init__(self, obj: str, method: str, expected: int, got: int):
        self.object = obj
        self.method = method
        self.expected = expected
        self.got = got
        super().__init__(f"{obj}.{method}: expected {expected} argument(s), got {got}")


class KindMismatchError(CatalogError):
    def __init__(self, obj: str, method: str, param: str, expected: str, got: str):
        self.object = obj
        self.method = method
        self.param = param
        self.expected = expected
        self.got = got
        super().__init__(f"{obj}.{method}: parameter {param} expects {expected}, got {got}")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # INT or BOOL
    lo: int = 0
    hi: int = 100


@dataclass(frozen=True)
class MethodSpec:
    name: str
    params: tuple[ParamSpec, ...]
    returns: str  # VOID, INT or BOOL
    pure: bool


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    kind: str  # actuator | sensor | variable
    methods: tuple[MethodSpec, ...]
    vartype: str | None = None  # integer | boolean, variables only
    label: str | None = None

    def method(self, name: str) -> MethodSpec | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class ConstructorSpec:
    kind: str
    label: str
    body_slots: int
    takes_count: bool
    takes_cond: bool


@dataclass
class Catalog:
    constructors: tuple[ConstructorSpec, ...]
    objects: tuple[ObjectSpec, ...]
    source_paths: tuple[str | None, str | None] = field(default=(None, None), compare=False)

    def __post_init__(self) -> None:
        self._by_name = {o.name: o for o in self.objects}

    def object(self, name: str) -> ObjectSpec | None:
        return self._by_name.get(name)

    def variables(self) -> list[ObjectSpec]:
        return [o for o in self.objects if o.kind == "variable"]


def _pos_of(exc: ET.ParseError) -> tuple[int, int]:
    line, col = exc.position
    return line, col + 1


def _parse_xml(text: str | bytes) -> ET.Element:
    try:
        return ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = _pos_of(exc)
        raise CatalogParseError(f"malformed XML: {exc.msg.split(':')[0]}", line, col) from exc


def _check_attrs(elem: ET.Element, allowed: set[str], required: set[str]) -> None:
    for key in elem.attrib:
        if key not in allowed:
            raise CatalogSchemaError(f"unexpected attribute on <{elem.tag}>: {key}")
    for key in required:
        if key not in elem.attrib:
            raise CatalogSchemaError(f"<{elem.tag}> is missing required attribute: {key}")


def _check_identifier(name: str, what: str) -> str:
    if not IDENT_RE.match(name):
        raise CatalogSchemaError(f"invalid {what} identifier: {name!r}")
    if name in RESERVED_WORDS:
        raise CatalogSchemaError(f"{what} name {name!r} is a reserved word")
    return name


def load_constructors(xml_text: str | bytes) -> list[ConstructorSpec]:
    """Load the program-constructor palette from its XML document.

    Returns the constructor entries in document order. Unknown kinds and
    unknown elements are rejected outright.
    """
    root = _parse_xml(xml_text)
    if root.tag != "constructors":
        raise CatalogSchemaError(f"expected <constructors> root, found <{root.tag}>")
    _check_attrs(root, set(), set())
    specs: list[ConstructorSpec] = []
    for child in root:
        if child.tag != "constructor":
            raise CatalogSchemaError(f"unexpected element: <{child.tag}>")
        _check_attrs(child, {"kind", "label"}, {"kind"})
        kind = child.attrib["kind"]
        if kind not in _KIND_SHAPE:
            raise CatalogSchemaError(f"unknown constructor kind: {kind}")
        label = child.attrib.get("label") or kind
        slots, takes_count, takes_cond = _KIND_SHAPE[kind]
        specs.append(ConstructorSpec(kind, label, slots, takes_count, takes_cond))
    return specs


def _synth_variable_methods(vartype: str) -> tuple[MethodSpec, ...]:
    if vartype == "integer":
        return (
            MethodSpec("Set", (ParamSpec("value", INT, 0, 100),), VOID, pure=False),
            MethodSpec("Get", (), INT, pure=True),
        )
    return (
        MethodSpec("SetTrue", (), VOID, pure=False),
        MethodSpec("SetFalse", (), VOID, pure=False),
        MethodSpec("IsTrue", (), BOOL, pure=True),
        MethodSpec("IsFalse", (), BOOL, pure=True),
    )


def _load_param(elem: ET.Element, obj: str, method: str) -> ParamSpec:
    _check_attrs(elem, {"name", "type", "min", "max"}, {"name", "type"})
    name = _check_identifier(elem.attrib["name"], "parameter")
    ptype = elem.attrib["type"]
    if ptype == "int":
        lo = int(elem.attrib.get("min", "0"))
        hi = int(elem.attrib.get("max", "100"))
        if not (0 <= lo <= hi <= 100):
            raise CatalogSchemaError(
                f"{obj}.{method}: parameter {name} range [{lo},{hi}] must lie within [0,100]"
            )
        return ParamSpec(name, INT, lo, hi)
    if ptype == "bool":
        if "min" in elem.attrib or "max" in elem.attrib:
            raise CatalogSchemaError(f"{obj}.{method}: bool parameter {name} takes no range")
        return ParamSpec(name, BOOL)
    raise CatalogSchemaError(f"{obj}.{method}: unknown parameter type: {ptype}")


def _load_method(elem: ET.Element, obj: str, obj_kind: str) -> MethodSpec:
    _check_attrs(elem, {"name", "returns", "pure"}, {"name", "returns"})
    name = _check_identifier(elem.attrib["name"], "method")
    returns = elem.attrib["returns"]
    if returns not in (VOID, INT, BOOL):
        raise CatalogSchemaError(f"{obj}.{name}: unknown return type: {returns}")
    pure_default = obj_kind == "sensor"
    pure_attr = elem.attrib.get("pure")
    pure = pure_default if pure_attr is None else pure_attr == "true"
    if obj_kind == "actuator":
        if returns != VOID:
            raise CatalogSchemaError(f"actuator method {obj}.{name} must return void, not {returns}")
        if pure:
            raise CatalogSchemaError(f"actuator method {obj}.{name} cannot be pure")
    if obj_kind == "sensor":
        if returns == VOID:
            raise CatalogSchemaError(f"sensor method {obj}.{name} must return bool or int")
        if not pure:
            raise CatalogSchemaError(f"sensor method {obj}.{name} must be pure")
    params = []
    for child in elem:
        if child.tag != "param":
            raise CatalogSchemaError(f"unexpected element: <{child.tag}>")
        params.append(_load_param(child, obj, name))
    return MethodSpec(name, tuple(params), returns, pure)


def load_robot_objects(xml_text: str | bytes) -> list[ObjectSpec]:
    """Load a robot-objects catalog: the actuators, sensors and variables of one robot.

    Variable objects carry no <method> children; their fixed method sets are
    synthesized here (integer: Set/Get, boolean: SetTrue/SetFalse/IsTrue/IsFalse).
    """
    root = _parse_xml(xml_text)
    if root.tag != "robot":
        raise CatalogSchemaError(f"expected <robot> root, found <{root.tag}>")
    _check_attrs(root, {"name"}, {"name"})
    objects: list[ObjectSpec] = []
    seen: set[str] = set()
    for child in root:
        if child.tag != "object":
            raise CatalogSchemaError(f"unexpected element: <{child.tag}>")
        _check_attrs(child, {"name", "kind", "vartype", "label"}, {"name", "kind"})
        name = _check_identifier(child.attrib["name"], "object")
        if name in seen:
            raise CatalogSchemaError(f"duplicate object: {name}")
        seen.add(name)
        kind = child.attrib["kind"]
        label = child.attrib.get("label")
        if kind == "variable":
            vartype = child.attrib.get("vartype")
            if vartype not in ("integer", "boolean"):
                raise CatalogSchemaError(f"variable {name} needs vartype integer or boolean")
            if len(child):
                raise CatalogSchemaError(f"variable {name} may not declare methods")
            objects.append(ObjectSpec(name, kind, _synth_variable_methods(vartype), vartype, label))
            continue
        if kind not in ("actuator", "sensor"):
            raise CatalogSchemaError(f"unknown object kind: {kind}")
        if "vartype" in child.attrib:
            raise CatalogSchemaError(f"{kind} {name} may not declare vartype")
        methods: list[MethodSpec] = []
        method_names: set[str] = set()
        for m in child:
            if m.tag != "method":
                raise CatalogSchemaError(f"unexpected element: <{m.tag}>")
            spec = _load_method(m, name, kind)
            if spec.name in method_names:
                raise CatalogSchemaError(f"duplicate method: {name}.{spec.name}")
            method_names.add(spec.name)
            methods.append(spec)
        objects.append(ObjectSpec(name, kind, tuple(methods), None, label))
    return objects


def load_catalog(
    constructors_xml: str | bytes | None,
    robot_xml: str | bytes,
    constructors_path: str | None = None,
    robot_path: str | None = None,
) -> Catalog:
    constructors = tuple(load_constructors(constructors_xml)) if constructors_xml is not None else ()
    objects = tuple(load_robot_objects(robot_xml))
    return Catalog(constructors, objects, (constructors_path, robot_path))


def resolve_call(catalog: Catalog, obj: str, method: str, arg_kinds: list[str]) -> MethodSpec:
    """Return the MethodSpec for obj.method if it accepts arguments of the given kinds.

    Each failure mode raises its own error type carrying the offending
    identifiers: UnknownObjectError, UnknownMethodError, ArityMismatchError,
    KindMismatchError.
    """
    ospec = catalog.object(obj)
    if ospec is None:
        raise UnknownObjectError(obj)
    mspec = ospec.method(method)
    if mspec is None:
        raise UnknownMethodError(obj, method)
    if len(arg_kinds) != len(mspec.params):
        raise ArityMismatchError(obj, method, len(mspec.params), len(arg_kinds))
    for param, kind in zip(mspec.params, arg_kinds):
        if kind != param.kind:
            raise KindMismatchError(obj, method, param.name, param.kind, kind)
    return mspec


def constructors_to_xml(specs: list[ConstructorSpec] | tuple[ConstructorSpec, ...]) -> str:
    root = ET.Element("constructors")
    for spec in specs:
        ET.SubElement(root, "constructor", {"kind": spec.kind, "label": spec.label})
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def robot_objects_to_xml(objects: list[ObjectSpec] | tuple[ObjectSpec, ...], robot_name: str = "robot") -> str:
    root = ET.Element("robot", {"name": robot_name})
    for obj in objects:
        attrs = {"name": obj.name, "kind": obj.kind}
        if obj.vartype is not None:
            attrs["vartype"] = obj.vartype
        if obj.label is not None:
            attrs["label"] = obj.label
        oelem = ET.SubElement(root, "object", attrs)
        if obj.kind == "variable":
            continue
        for m in obj.methods:
            melem = ET.SubElement(
                oelem,
                "method",
                {"name": m.name, "returns": m.returns, "pure": "true" if m.pure else "false"},
            )
            for p in m.params:
                pattrs = {"name": p.name, "type": p.kind}
                if p.kind == INT:
                    pattrs["min"] = str(p.lo)
                    pattrs["max"] = str(p.hi)
                ET.SubElement(melem, "param", pattrs)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"
