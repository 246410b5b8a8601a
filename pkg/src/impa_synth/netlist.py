"""Ladder netlists seen from a single reflection port, and their JSON form.

Serialized layout (schema ``netlist-v1``)::

    {
      "schema": "netlist-v1",
      "elements": [
        {"kind": "port", "z0_ohm": 50.0},
        {"kind": "series_c", "c_f": 7.06e-13},
        {"kind": "shunt_lc", "l_h": 1.14e-10, "c_f": 4.5e-12},
        {"kind": "shunt_r", "r_ohm": -33.7}
      ],
      "design": {"f0_hz": 6.5e9, "w": 0.0769, "band_hz": [6.25e9, 6.75e9]}
    }

Elements run from the port towards the open far end. A series capacitor
starts a new node; shunt elements attach to the current node. ``r_ohm`` may
be ``null`` for an uncalibrated resistor placeholder, which is treated as an
open circuit. ``design`` is optional metadata.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

from .errors import NetlistError

SCHEMA = "netlist-v1"


@dataclass(frozen=True)
class PortTermination:
    z0: float


@dataclass(frozen=True)
class SeriesCapacitor:
    c: float


@dataclass(frozen=True)
class ShuntParallelLC:
    l: float
    c: float

    @property
    def resonance(self) -> float:
        return 1.0 / (2 * math.pi * math.sqrt(self.l * self.c))


@dataclass(frozen=True)
class ShuntResistor:
    r: float | None

    @property
    def is_placeholder(self) -> bool:
        return self.r is None


Element = Union[PortTermination, SeriesCapacitor, ShuntParallelLC, ShuntResistor]


@dataclass(frozen=True)
class Netlist:
    elements: tuple[Element, ...]
    design: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        els = self.elements
        if not els or not isinstance(els[0], PortTermination):
            raise NetlistError("a netlist must start with a PortTermination")
        if any(isinstance(e, PortTermination) for e in els[1:]):
            raise NetlistError("only one PortTermination is allowed")
        if not els[0].z0 > 0:
            raise NetlistError(f"port impedance must be positive, got {els[0].z0!r}")
        last_node = self.node_count - 1
        active = 0
        for i, e in enumerate(els[1:], start=1):
            if isinstance(e, SeriesCapacitor):
                if not e.c > 0:
                    raise NetlistError(f"element {i}: series capacitance must be positive, got {e.c!r}")
            elif isinstance(e, ShuntParallelLC):
                if not (e.l > 0 and e.c > 0):
                    raise NetlistError(f"element {i}: L and C must be positive, got L={e.l!r}, C={e.c!r}")
            elif isinstance(e, ShuntResistor):
                if e.r is not None and (e.r == 0 or not math.isfinite(e.r)):
                    raise NetlistError(f"element {i}: resistance must be finite and non-zero")
                if e.r is None or e.r < 0:
                    active += 1
                    if self.node_of(i) != last_node:
                        raise NetlistError(
                            f"element {i}: a negative or placeholder resistor must sit at the final node"
                        )
            else:
                raise NetlistError(f"element {i}: unknown element {e!r}")
        if active > 1:
            raise NetlistError("at most one negative or placeholder ShuntResistor is allowed")

    @property
    def port(self) -> PortTermination:
        return self.elements[0]

    @property
    def z0(self) -> float:
        return self.elements[0].z0

    @property
    def node_count(self) -> int:
        return 1 + sum(isinstance(e, SeriesCapacitor) for e in self.elements)

    def node_of(self, index: int) -> int:
        """Node (0 = port node) that element ``index`` attaches to or ends on."""
        return sum(isinstance(e, SeriesCapacitor) for e in self.elements[1:index + 1])

    def resistor_index(self) -> int | None:
        """Index of the active (negative or placeholder) resistor, if any."""
        for i, e in enumerate(self.elements):
            if isinstance(e, ShuntResistor) and (e.r is None or e.r < 0):
                return i
        return None

    def with_resistance(self, r: float) -> "Netlist":
        idx = self.resistor_index()
        if idx is None:
            raise NetlistError("netlist has no resistor placeholder at the JPA node")
        els = list(self.elements)
        els[idx] = ShuntResistor(r)
        return Netlist(tuple(els), dict(self.design))

    def is_reactive(self) -> bool:
        return not any(isinstance(e, ShuntResistor) and e.r is not None for e in self.elements)


_KINDS = {
    "port": (PortTermination, {"z0_ohm": "z0"}),
    "series_c": (SeriesCapacitor, {"c_f": "c"}),
    "shunt_lc": (ShuntParallelLC, {"l_h": "l", "c_f": "c"}),
    "shunt_r": (ShuntResistor, {"r_ohm": "r"}),
}
_BY_TYPE = {cls: (kind, fields) for kind, (cls, fields) in _KINDS.items()}


def element_to_dict(e: Element) -> dict:
    kind, fields = _BY_TYPE[type(e)]
    out = {"kind": kind}
    for key, attr in fields.items():
        out[key] = getattr(e, attr)
    return out


def element_from_dict(d: dict) -> Element:
    try:
        cls, fields = _KINDS[d["kind"]]
    except KeyError:
        raise NetlistError(f"unknown element kind in {d!r}") from None
    kwargs = {}
    for key, attr in fields.items():
        if key not in d:
            raise NetlistError(f"element {d['kind']!r} is missing field {key!r}")
        v = d[key]
        kwargs[attr] = None if v is None else float(v)
    return cls(**kwargs)


def netlist_to_dict(net: Netlist) -> dict:
    out = {"schema": SCHEMA, "elements": [element_to_dict(e) for e in net.elements]}
    if net.design:
        out["design"] = net.design
    return out


def netlist_from_dict(d: dict) -> Netlist:
    if d.get("schema") != SCHEMA:
        raise NetlistError(f"unsupported netlist schema {d.get('schema')!r}, expected {SCHEMA!r}")
    return Netlist(tuple(element_from_dict(e) for e in d["elements"]), d.get("design", {}))


def dumps(net: Netlist) -> str:
    # repr-exact floats keep the round trip lossless
    return json.dumps(netlist_to_dict(net), indent=2) + "\n"


def loads(text: str) -> Netlist:
    return netlist_from_dict(json.loads(text))
