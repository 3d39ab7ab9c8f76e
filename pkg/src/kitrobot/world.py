"""Simulated transport world: a ring track with carriers, stations and stores.

Kinematics are exact: carriers accumulate speed/100 of a section per tick in
a Fraction, so traces are identical across platforms. Collision and presence
flags are recomputed once per physics step; sensors read the stored flags.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from fractions import Fraction

from kitrobot.devices import DeviceFault

FORWARD = 1
BACKWARD = -1


class WorldSpecError(Exception):
    """The world XML is malformed or violates a world invariant."""


@dataclass
class TrackSection:
    index: int
    sign: int
    station: str | None = None


@dataclass
class Carrier:
    name: str
    section: int
    sub: Fraction = Fraction(0)
    direction: int = FORWARD
    speed: int = 0
    loaded: bool = False
    collided: bool = False


@dataclass
class Station:
    name: str
    role: str  # loader | unloader
    section: int
    door_open: bool = False
    presence: bool = False


@dataclass
class Store:
    name: str
    count: int
    station: str


@dataclass
class WorldState:
    sections: list[TrackSection]
    carriers: list[Carrier]
    stations: list[Station]
    stores: list[Store]
    tick: int = 0
    bindings: dict[str, str] = field(default_factory=dict)
    device_state: dict[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._carriers = {c.name: c for c in self.carriers}
        self._stations = {s.name: s for s in self.stations}
        self._station_store = {s.station: s for s in self.stores}
        self.agent_order = [c.name for c in self.carriers] + [s.name for s in self.stations]
        self.refresh_flags()

    # -- device backend ---------------------------------------------------

    def apply_action(self, agent: str, obj: str, method: str, args: tuple) -> None:
        carrier = self._carriers.get(agent)
        if carrier is not None:
            if obj == "wheel":
                if method == "Advance":
                    carrier.speed = args[0]
                    carrier.direction = FORWARD
                elif method == "Reverse":
                    carrier.speed = args[0]
                    carrier.direction = BACKWARD
                elif method == "Stop":
                    carrier.speed = 0
                else:
                    raise DeviceFault(agent, obj, method, args)
                return
            if obj in ("motor", "light", "switch", "door"):
                self._record_state(agent, obj, method, args)
                return
            raise DeviceFault(agent, obj, method, args)
        station = self._stations.get(agent)
        if station is not None:
            if obj == "belt":
                if method == "Load":
                    self._belt_load(station)
                elif method == "Unload":
                    self._belt_unload(station)
                else:
                    raise DeviceFault(agent, obj, method, args)
                return
            if obj == "door":
                if method not in ("Open", "Close"):
                    raise DeviceFault(agent, obj, method, args)
                station.door_open = method == "Open"
                return
            raise DeviceFault(agent, obj, method, args)
        raise DeviceFault(agent, obj, method, args)

    def read_sensor(self, agent: str, obj: str, method: str, args: tuple) -> int | bool:
        carrier = self._carriers.get(agent)
        if carrier is not None:
            if obj == "captor":
                sign = self.sections[carrier.section].sign
                if method == "EqualTo":
                    return sign == args[0]
                if method == "LessThan":
                    return sign < args[0]
                if method == "GreaterThan":
                    return sign > args[0]
                raise DeviceFault(agent, obj, method, args)
            if obj == "button":
                if method == "IsPressed":
                    return carrier.collided
                if method == "IsReleased":
                    return not carrier.collided
                raise DeviceFault(agent, obj, method, args)
            if obj == "lightsensor":
                if method in ("IsRed", "IsGreen", "IsBlue"):
                    return False  # no color stimulus is modeled
                raise DeviceFault(agent, obj, method, args)
            raise DeviceFault(agent, obj, method, args)
        station = self._stations.get(agent)
        if station is not None:
            if obj == "button":
                if method == "IsPressed":
                    return station.presence
                if method == "IsReleased":
                    return not station.presence
                raise DeviceFault(agent, obj, method, args)
            if obj == "store":
                store = self._station_store.get(station.name)
                if store is None or method != "Get":
                    raise DeviceFault(agent, obj, method, args)
                return min(store.count, 100)
            raise DeviceFault(agent, obj, method, args)
        raise DeviceFault(agent, obj, method, args)

    def _record_state(self, agent: str, obj: str, method: str, args: tuple) -> None:
        rendered = f"{method}({','.join(str(a) for a in args)})"
        self.device_state[(agent, obj)] = rendered

    def _belt_load(self, station: Station) -> None:
        store = self._station_store.get(station.name)
        if store is None:
            raise DeviceFault(station.name, "belt", "Load", ())
        if not station.presence or store.count <= 0:
            return
        carrier = self._waiting_carrier(station, loaded=False)
        if carrier is None:
            return
        store.count -= 1
        carrier.loaded = True

    def _belt_unload(self, station: Station) -> None:
        store = self._station_store.get(station.name)
        if store is None:
            raise DeviceFault(station.name, "belt", "Unload", ())
        if not station.presence:
            return
        carrier = self._waiting_carrier(station, loaded=True)
        if carrier is None:
            return
        store.count += 1
        carrier.loaded = False

    def _waiting_carrier(self, station: Station, loaded: bool) -> Carrier | None:
        for carrier in self.carriers:  # declaration order settles ties
            if carrier.section == station.section and carrier.speed == 0 and carrier.loaded == loaded:
                return carrier
        return None

    # -- physics ----------------------------------------------------------

    def advance_physics(self) -> None:
        """One physics step: move carriers, then recompute derived flags."""
        count = len(self.sections)
        for carrier in self.carriers:
            if carrier.speed == 0:
                continue
            carrier.sub += Fraction(carrier.speed, 100) * carrier.direction
            if carrier.sub >= 1:
                carrier.sub -= 1
                carrier.section = (carrier.section + 1) % count
            elif carrier.sub < 0:
                carrier.sub += 1
                carrier.section = (carrier.section - 1) % count
        self.refresh_flags()
        self.tick += 1

    def refresh_flags(self) -> None:
        occupancy: dict[int, int] = {}
        for carrier in self.carriers:
            occupancy[carrier.section] = occupancy.get(carrier.section, 0) + 1
        for carrier in self.carriers:
            carrier.collided = occupancy[carrier.section] > 1
        for station in self.stations:
            station.presence = any(
                c.section == station.section and c.speed == 0 for c in self.carriers
            )

    # -- observation --------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "tick": self.tick,
            "sections": [
                {"index": s.index, "sign": s.sign, "station": s.station} for s in self.sections
            ],
            "carriers": [
                {
                    "name": c.name,
                    "section": c.section,
                    "sub": str(c.sub),
                    "direction": "forward" if c.direction == FORWARD else "backward",
                    "speed": c.speed,
                    "loaded": c.loaded,
                    "collided": c.collided,
                }
                for c in self.carriers
            ],
            "stations": [
                {
                    "name": s.name,
                    "role": s.role,
                    "section": s.section,
                    "door_open": s.door_open,
                    "presence": s.presence,
                }
                for s in self.stations
            ],
            "stores": [{"name": s.name, "count": s.count, "station": s.station} for s in self.stores],
            "devices": {f"{agent}.{obj}": v for (agent, obj), v in sorted(self.device_state.items())},
        }


def _attr_int(elem: ET.Element, name: str) -> int:
    raw = elem.attrib.get(name)
    if raw is None:
        raise WorldSpecError(f"<{elem.tag}> is missing required attribute: {name}")
    try:
        return int(raw)
    except ValueError:
        raise WorldSpecError(f"<{elem.tag}> attribute {name} must be an integer, got {raw!r}")


def _attr(elem: ET.Element, name: str) -> str:
    raw = elem.attrib.get(name)
    if raw is None:
        raise WorldSpecError(f"<{elem.tag}> is missing required attribute: {name}")
    return raw


def world_from_spec(xml_text: str | bytes) -> WorldState:
    """Build and validate an initial world from its XML document."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise WorldSpecError(f"malformed XML (line {line}, column {col + 1})") from exc
    if root.tag != "world":
        raise WorldSpecError(f"expected <world> root, found <{root.tag}>")
    section_count = _attr_int(root, "sections")
    if section_count < 1:
        raise WorldSpecError("a world needs at least one section")

    sections: dict[int, TrackSection] = {}
    carriers: list[Carrier] = []
    stations: list[Station] = []
    stores: list[Store] = []
    bindings: dict[str, str] = {}
    names: set[str] = set()

    def fresh_name(name: str) -> str:
        if name in names:
            raise WorldSpecError(f"duplicate agent or store name: {name}")
        names.add(name)
        return name

    for child in root:
        if child.tag == "section":
            index = _attr_int(child, "index")
            sign = _attr_int(child, "sign")
            if not (0 <= index < section_count):
                raise WorldSpecError(f"section index {index} outside 0..{section_count - 1}")
            if index in sections:
                raise WorldSpecError(f"duplicate section index: {index}")
            if not (0 <= sign <= 100):
                raise WorldSpecError(f"section {index}: sign {sign} outside [0,100]")
            sections[index] = TrackSection(index, sign)
        elif child.tag == "carrier":
            name = fresh_name(_attr(child, "name"))
            section = _attr_int(child, "section")
            loaded = child.attrib.get("loaded", "false") == "true"
            carriers.append(Carrier(name, section, loaded=loaded))
        elif child.tag == "station":
            name = fresh_name(_attr(child, "name"))
            role = _attr(child, "role")
            if role not in ("loader", "unloader"):
                raise WorldSpecError(f"station {name}: unknown role {role!r}")
            stations.append(Station(name, role, _attr_int(child, "section")))
        elif child.tag == "store":
            name = fresh_name(_attr(child, "name"))
            count = _attr_int(child, "count")
            if count < 0:
                raise WorldSpecError(f"store {name}: count must not be negative")
            stores.append(Store(name, count, _attr(child, "station")))
        elif child.tag == "bind":
            agent = _attr(child, "agent")
            if agent in bindings:
                raise WorldSpecError(f"duplicate bind for agent: {agent}")
            bindings[agent] = _attr(child, "objects")
        else:
            raise WorldSpecError(f"unexpected element: <{child.tag}>")

    missing = [i for i in range(section_count) if i not in sections]
    if missing:
        raise WorldSpecError(f"missing section elements for indices: {missing}")
    section_list = [sections[i] for i in range(section_count)]

    station_names = {s.name for s in stations}
    station_sections: set[int] = set()
    for station in stations:
        if not (0 <= station.section < section_count):
            raise WorldSpecError(f"station {station.name}: section out of range")
        if station.section in station_sections:
            raise WorldSpecError(f"two stations share section {station.section}")
        station_sections.add(station.section)
        section_list[station.section].station = station.name
    for carrier in carriers:
        if not (0 <= carrier.section < section_count):
            raise WorldSpecError(f"carrier {carrier.name}: section out of range")
    stored: set[str] = set()
    for store in stores:
        if store.station not in station_names:
            raise WorldSpecError(f"store {store.name}: unknown station {store.station}")
        if store.station in stored:
            raise WorldSpecError(f"station {store.station} has more than one store")
        stored.add(store.station)
    agent_names = {c.name for c in carriers} | station_names
    for agent in bindings:
        if agent not in agent_names:
            raise WorldSpecError(f"bind for unknown agent: {agent}")

    world = WorldState(section_list, carriers, stations, stores, bindings=bindings)
    for carrier in world.carriers:
        if carrier.collided:
            raise WorldSpecError(f"carrier {carrier.name} starts collided")
    return world
