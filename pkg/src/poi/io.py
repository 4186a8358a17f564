"""JSON instance files.

Layout (version 1)::

    {
      "version": 1,
      "name": "two-box",                         optional
      "direction": "packing" | "covering",
      "objective": {"kind": "additive"},
      "constraint": {"kind": "uniform_matroid", "rank": 1},
      "probing_constraint": {...},               optional, packing kinds only
      "set_probing": [{"id", "members", "price"}], optional
      "elements": [{"id", "support", "probs", "price", "fallback"?}]
    }

``write_instance`` emits a canonical form (fixed key order, sorted ids,
shortest round-trip float repr) so that write(parse(write(x))) is
byte-identical to write(x).
"""

from __future__ import annotations

import json
import math
import re
from typing import Any

from .dist import DistributionError, DiscreteDistribution
from .model import (
    Additive,
    Constraint,
    Direction,
    Disjointness,
    ExplicitFamily,
    FacilityLocation,
    FVSFeasibility,
    GraphicMatroid,
    Knapsack,
    MatchingSystem,
    ModelError,
    Objective,
    PartitionMatroid,
    PCSTFeasibility,
    PCSTPenalty,
    PoiInstance,
    ProbeElement,
    ProbeSet,
    SetCoverFeasibility,
    SetProbeFamily,
    SpanningFeasibility,
    UniformMatroid,
    UnknownElementError,
)

FORMAT_VERSION = 1


class InstanceFormatError(ValueError):
    """Schema or invariant violation; ``field`` is a dotted path into the document."""

    def __init__(self, message: str, field: str = "", line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class UnknownIdError(InstanceFormatError):
    pass


def _line_of(text: str, needle: str) -> int | None:
    pos = text.find(needle)
    if pos < 0:
        return None
    return text.count("\n", 0, pos) + 1


def _req(obj: dict, key: str, path: str, typ=None):
    if not isinstance(obj, dict):
        raise InstanceFormatError("expected an object", path)
    if key not in obj:
        raise InstanceFormatError("missing required field", f"{path}.{key}" if path else key)
    val = obj[key]
    if typ is not None and not _is(val, typ):
        raise InstanceFormatError(f"expected {_tname(typ)}", f"{path}.{key}" if path else key)
    return val


def _is(val, typ) -> bool:
    if typ is float:
        return isinstance(val, (int, float)) and not isinstance(val, bool)
    if typ is int:
        return isinstance(val, int) and not isinstance(val, bool)
    return isinstance(val, typ)


def _tname(typ) -> str:
    return {float: "a number", int: "an integer", str: "a string", list: "a list", dict: "an object",
            bool: "a boolean"}.get(typ, str(typ))


def _num_list(val, path) -> list[float]:
    if not isinstance(val, list) or not all(_is(v, float) for v in val):
        raise InstanceFormatError("expected a list of numbers", path)
    return [float(v) for v in val]


def _str_list(val, path) -> list[str]:
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        raise InstanceFormatError("expected a list of strings", path)
    return list(val)


def _edge_triples(val, path):
    if not isinstance(val, list):
        raise InstanceFormatError("expected a list of [id, u, v] edges", path)
    out = []
    for k, e in enumerate(val):
        if not (isinstance(e, list) and len(e) == 3 and all(isinstance(x, str) for x in e)):
            raise InstanceFormatError("expected [id, u, v]", f"{path}[{k}]")
        out.append(tuple(e))
    return out


def _build_constraint(obj: Any, path: str, direction: Direction) -> Constraint:
    kind = _req(obj, "kind", path, str)
    p = path
    if kind == "uniform_matroid":
        return UniformMatroid(direction=direction, rank=_req(obj, "rank", p, int))
    if kind == "partition_matroid":
        parts = _req(obj, "parts", p, dict)
        caps = _req(obj, "caps", p, dict)
        for k, v in parts.items():
            _str_list(v, f"{p}.parts.{k}")
        for k, v in caps.items():
            if not _is(v, int):
                raise InstanceFormatError("expected an integer", f"{p}.caps.{k}")
        return PartitionMatroid(direction=direction, parts=tuple(parts.items()), caps=tuple(caps.items()))
    if kind in ("graphic_matroid", "spanning", "matching"):
        cls = {"graphic_matroid": GraphicMatroid, "spanning": SpanningFeasibility, "matching": MatchingSystem}[kind]
        return cls(direction=direction, edges=_edge_triples(_req(obj, "edges", p), f"{p}.edges"))
    if kind == "explicit":
        sets = _req(obj, "sets", p, list)
        sets = [frozenset(_str_list(s, f"{p}.sets[{k}]")) for k, s in enumerate(sets)]
        universe = _str_list(obj.get("universe", []), f"{p}.universe")
        return ExplicitFamily(direction=direction, sets=tuple(sets), universe=tuple(universe))
    if kind == "knapsack":
        sizes = _req(obj, "sizes", p, dict)
        for k, v in sizes.items():
            if not _is(v, float):
                raise InstanceFormatError("expected a number", f"{p}.sizes.{k}")
        return Knapsack(direction=direction, sizes=tuple(sizes.items()), capacity=_req(obj, "capacity", p, float))
    if kind == "set_cover":
        members = _req(obj, "members", p, dict)
        mem = tuple((k, frozenset(_str_list(v, f"{p}.members.{k}"))) for k, v in members.items())
        return SetCoverFeasibility(direction=direction, universe=tuple(_str_list(_req(obj, "universe", p), f"{p}.universe")),
                                   members=mem)
    if kind == "fvs":
        edges = _req(obj, "edges", p, list)
        pairs = []
        for k, e in enumerate(edges):
            if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
                raise InstanceFormatError("expected [u, v]", f"{p}.edges[{k}]")
            pairs.append(tuple(e))
        return FVSFeasibility(direction=direction, vertices=tuple(_str_list(obj.get("vertices", []), f"{p}.vertices")),
                              graph_edges=tuple(pairs))
    if kind == "pcst":
        return PCSTFeasibility(direction=direction, root=_req(obj, "root", p, str),
                               vertices=tuple(_str_list(_req(obj, "vertices", p), f"{p}.vertices")))
    if kind == "disjointness":
        gs = _req(obj, "ground_sets", p, dict)
        return Disjointness(direction=direction,
                            ground_sets=tuple((k, frozenset(_str_list(v, f"{p}.ground_sets.{k}"))) for k, v in gs.items()))
    raise InstanceFormatError(f"unknown constraint kind {kind!r}", f"{p}.kind")


def _build_objective(obj: Any, path: str) -> Objective:
    kind = _req(obj, "kind", path, str)
    if kind == "additive":
        return Additive()
    if kind == "facility_location":
        rows = _req(obj, "distances", path, list)
        dist = [_num_list(r, f"{path}.distances[{k}]") for k, r in enumerate(rows)]
        return FacilityLocation(locations=tuple(_str_list(_req(obj, "locations", path), f"{path}.locations")),
                                distances=tuple(map(tuple, dist)),
                                clients=tuple(_str_list(_req(obj, "clients", path), f"{path}.clients")))
    if kind == "pcst_penalty":
        edges = _req(obj, "edges", path, list)
        out = []
        for k, e in enumerate(edges):
            if not (isinstance(e, list) and len(e) == 3 and isinstance(e[0], str) and isinstance(e[1], str)
                    and _is(e[2], float)):
                raise InstanceFormatError("expected [u, v, cost]", f"{path}.edges[{k}]")
            out.append((e[0], e[1], float(e[2])))
        return PCSTPenalty(root=_req(obj, "root", path, str), edges=tuple(out))
    raise InstanceFormatError(f"unknown objective kind {kind!r}", f"{path}.kind")


def instance_from_dict(doc: Any, text: str = "") -> PoiInstance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be an object")
    version = _req(doc, "version", "", int)
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported version {version}", "version")
    try:
        direction = Direction(_req(doc, "direction", "", str))
    except ValueError:
        raise InstanceFormatError("must be 'packing' or 'covering'", "direction") from None

    elements = []
    for k, e in enumerate(_req(doc, "elements", "", list)):
        path = f"elements[{k}]"
        eid = _req(e, "id", path, str)
        support = _num_list(_req(e, "support", path), f"{path}.support")
        probs = _num_list(_req(e, "probs", path), f"{path}.probs")
        price = _req(e, "price", path, float)
        fallback = e.get("fallback", False)
        if not isinstance(fallback, bool):
            raise InstanceFormatError("expected a boolean", f"{path}.fallback")
        line = _line_of(text, json.dumps(eid)) if text else None
        try:
            # atoms may be listed in any order; sort them together
            pairs = sorted(zip(support, probs))
            if len(support) != len(probs):
                raise DistributionError("support and probs must have equal length")
            dist = DiscreteDistribution(tuple(v for v, _ in pairs), tuple(q for _, q in pairs))
            elements.append(ProbeElement(eid, dist, price, fallback))
        except (DistributionError, ModelError) as exc:
            raise InstanceFormatError(str(exc), path, line) from None

    try:
        constraint = _build_constraint(_req(doc, "constraint", ""), "constraint", direction)
        objective = _build_objective(doc.get("objective", {"kind": "additive"}), "objective")
        probing = None
        if doc.get("probing_constraint") is not None:
            probing = _build_constraint(doc["probing_constraint"], "probing_constraint", Direction.PACKING)
        family = None
        if doc.get("set_probing") is not None:
            sets = []
            for k, s in enumerate(_req(doc, "set_probing", "", list)):
                path = f"set_probing[{k}]"
                sets.append(ProbeSet(_req(s, "id", path, str),
                                     frozenset(_str_list(_req(s, "members", path), f"{path}.members")),
                                     float(_req(s, "price", path, float))))
            family = SetProbeFamily(tuple(sets))
        name = doc.get("name", "")
        if not isinstance(name, str):
            raise InstanceFormatError("expected a string", "name")
        return PoiInstance(tuple(elements), constraint, objective, probing, family, name)
    except UnknownElementError as exc:
        raise UnknownIdError(str(exc)) from None
    except (ModelError, DistributionError) as exc:
        raise InstanceFormatError(str(exc)) from None


def parse_instance(text: str) -> PoiInstance:
    """Parse an instance document; raises InstanceFormatError with line/field context."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    return instance_from_dict(doc, text)


def load_instance(path) -> PoiInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _num(x: float):
    x = float(x)
    if not math.isfinite(x):
        raise InstanceFormatError(f"cannot write non-finite number {x!r}")
    # integral floats are written as integers for readability; parsing restores floats
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def _constraint_doc(c: Constraint) -> dict:
    d: dict[str, Any] = {"kind": c.kind}
    pl = c.payload()
    if "sizes" in pl:
        pl = {"sizes": {k: _num(v) for k, v in pl["sizes"].items()}, "capacity": _num(pl["capacity"])}
    d.update(pl)
    return d


def _objective_doc(o: Objective) -> dict:
    d: dict[str, Any] = {"kind": o.kind}
    pl = o.payload()
    if isinstance(o, FacilityLocation):
        pl["distances"] = [[_num(x) for x in row] for row in pl["distances"]]
    if isinstance(o, PCSTPenalty):
        pl["edges"] = [[u, v, _num(c)] for u, v, c in pl["edges"]]
    d.update(pl)
    return d


def instance_to_dict(inst: PoiInstance) -> dict:
    doc: dict[str, Any] = {"version": FORMAT_VERSION}
    if inst.name:
        doc["name"] = inst.name
    doc["direction"] = inst.direction.value
    doc["objective"] = _objective_doc(inst.objective)
    doc["constraint"] = _constraint_doc(inst.constraint)
    if inst.probing_constraint is not None:
        doc["probing_constraint"] = _constraint_doc(inst.probing_constraint)
    if inst.set_probing is not None:
        doc["set_probing"] = [{"id": s.id, "members": sorted(s.members), "price": _num(s.price)}
                              for s in inst.set_probing.sets]
    els = []
    for e in inst.elements:
        row: dict[str, Any] = {"id": e.id, "support": [_num(v) for v in e.dist.support],
                               "probs": [_num(p) for p in e.dist.probs], "price": _num(e.price)}
        if e.fallback:
            row["fallback"] = True
        els.append(row)
    doc["elements"] = els
    return doc


_SCALAR = r'(?:-?[0-9.eE+-]+|"(?:[^"\\]|\\.)*"|true|false|null)'
_SCALAR_LIST = re.compile(r"\[\n\s+((?:" + _SCALAR + r",\n\s+)*" + _SCALAR + r")\n\s+\]")


def write_instance(inst: PoiInstance) -> str:
    """Canonical text: two-space indent, lists of scalars kept on one line."""
    text = json.dumps(instance_to_dict(inst), indent=2)
    text = _SCALAR_LIST.sub(lambda m: "[" + re.sub(r",\n\s+", ", ", m.group(1)) + "]", text)
    return text + "\n"


def save_instance(inst: PoiInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_instance(inst))
