"""Problem instances: probe elements, feasibility families and objectives.

A packing family is downward closed (``is_independent``), a covering family
is upward closed (``is_feasible_cover``).  Objectives are semiadditive: the
value of a selection ``I`` under realised values ``x`` is
``sum(x[i] for i in I) + h(I)`` where ``h`` never looks at ``x``.

Element ids are strings; every internal ordering is lexicographic by id.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .dist import DiscreteDistribution, grade_max, grade_min, surrogate_max, surrogate_min


class ModelError(ValueError):
    pass


class CapExceededError(RuntimeError):
    """An exact computation would exceed its configured size cap."""


class UnknownElementError(ModelError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class Direction(str, Enum):
    PACKING = "packing"
    COVERING = "covering"


# --------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class ProbeElement:
    """One random parameter with its probing price.

    Grades and surrogates are derived once at construction.
    """

    id: str
    dist: DiscreteDistribution
    price: float
    fallback: bool = False
    tau_max: float = field(init=False, repr=False, compare=False)
    tau_min: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ModelError("element id must be a nonempty string")
        price = float(self.price)
        if not (price >= 0 and math.isfinite(price)):
            raise ModelError(f"element {self.id!r}: price must be finite and >= 0")
        object.__setattr__(self, "price", price)
        if self.fallback and (self.dist.support != (0.0,)):
            raise ModelError(f"fallback element {self.id!r} must be deterministic with value 0")
        object.__setattr__(self, "tau_max", grade_max(self.dist, price))
        object.__setattr__(self, "tau_min", grade_min(self.dist, price))

    @property
    def y_max(self):
        return surrogate_max(self.dist, self.price)

    @property
    def y_min(self):
        return surrogate_min(self.dist, self.price)


def default_fallback_price(elements: Iterable[ProbeElement]) -> float:
    """Large fallback price: 10x the other prices plus the largest atom."""
    elements = [e for e in elements if not e.fallback]
    return 10.0 * math.fsum(e.price for e in elements) + max((e.dist.max for e in elements), default=0.0)


# --------------------------------------------------------------------------
# constraint families


def _fs(ids: Iterable[str]) -> frozenset[str]:
    return frozenset(ids)


@dataclass(frozen=True, eq=True)
class Constraint:
    """Base of all feasibility families.

    Subclasses implement ``_independent`` (packing) and/or ``_covers``
    (covering) and may declare the ids they reference via ``ground``.
    """

    kind: ClassVar[str] = ""
    directions: ClassVar[tuple[Direction, ...]] = (Direction.PACKING, Direction.COVERING)
    direction: Direction = Direction.PACKING

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.direction not in self.directions:
            raise ModelError(f"{self.kind} does not support direction {self.direction.value}")

    def ground(self) -> frozenset[str] | None:
        return None

    def check_ids(self, s: Iterable[str]) -> frozenset[str]:
        s = _fs(s)
        g = self.ground()
        if g is not None:
            missing = s - g
            if missing:
                raise UnknownElementError(f"unknown element id(s) for {self.kind}: {sorted(missing)}")
        return s

    def _independent(self, s: frozenset[str]) -> bool:
        raise NotImplementedError

    def _covers(self, s: frozenset[str]) -> bool:
        raise NotImplementedError

    def payload(self) -> dict:
        """Kind-specific fields for the instance file."""
        return {}


@dataclass(frozen=True, eq=True)
class UniformMatroid(Constraint):
    kind: ClassVar[str] = "uniform_matroid"
    rank: int = 1

    def __post_init__(self):
        super().__post_init__()
        if int(self.rank) != self.rank or self.rank < 0:
            raise ModelError("uniform matroid rank must be a nonnegative integer")
        object.__setattr__(self, "rank", int(self.rank))

    def _independent(self, s):
        return len(s) <= self.rank

    def _covers(self, s):
        return len(s) >= self.rank

    def payload(self):
        return {"rank": self.rank}


@dataclass(frozen=True, eq=True)
class PartitionMatroid(Constraint):
    kind: ClassVar[str] = "partition_matroid"
    parts: tuple[tuple[str, tuple[str, ...]], ...] = ()
    caps: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        super().__post_init__()
        parts = tuple(sorted((str(k), tuple(sorted(v))) for k, v in dict(self.parts).items()))
        caps = tuple(sorted((str(k), int(v)) for k, v in dict(self.caps).items()))
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "caps", caps)
        if {k for k, _ in parts} != {k for k, _ in caps}:
            raise ModelError("partition matroid needs a cap for every part")
        seen: set[str] = set()
        for _, members in parts:
            if seen & set(members):
                raise ModelError("partition matroid parts must be disjoint")
            seen |= set(members)
        if any(c < 0 for _, c in caps):
            raise ModelError("partition caps must be >= 0")

    def ground(self):
        return _fs(e for _, m in self.parts for e in m)

    def _counts(self, s):
        return {k: len(s.intersection(m)) for k, m in self.parts}

    def _independent(self, s):
        caps = dict(self.caps)
        return all(c <= caps[k] for k, c in self._counts(s).items())

    def _covers(self, s):
        caps = dict(self.caps)
        parts = dict(self.parts)
        return all(c >= min(caps[k], len(parts[k])) for k, c in self._counts(s).items())

    def payload(self):
        return {"parts": {k: list(m) for k, m in self.parts}, "caps": dict(self.caps)}


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _norm_edges(edges) -> tuple[tuple[str, str, str], ...]:
    """``{element id: (u, v)}`` or ``[(id, u, v), ...]`` -> sorted triples."""
    if isinstance(edges, Mapping):
        items = [(k, *v) for k, v in edges.items()]
    else:
        items = [tuple(e) for e in edges]
    out = []
    for eid, u, v in items:
        if u == v:
            raise ModelError(f"edge {eid!r} is a self-loop")
        out.append((str(eid), str(u), str(v)))
    out.sort()
    if len({e[0] for e in out}) != len(out):
        raise ModelError("edge ids must be unique")
    return tuple(out)


@dataclass(frozen=True, eq=True)
class _EdgeFamily(Constraint):
    edges: tuple[tuple[str, str, str], ...] = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "edges", _norm_edges(self.edges))

    def ground(self):
        return _fs(e[0] for e in self.edges)

    def endpoints(self) -> dict[str, tuple[str, str]]:
        return {e: (u, v) for e, u, v in self.edges}

    def payload(self):
        return {"edges": [list(e) for e in self.edges]}


def _acyclic(edge_list) -> bool:
    uf = _UnionFind()
    return all(uf.union(u, v) for u, v in edge_list)


def _component_count(vertices, edge_list) -> int:
    uf = _UnionFind()
    for v in vertices:
        uf.find(v)
    for u, v in edge_list:
        uf.union(u, v)
    return len({uf.find(v) for v in vertices})


@dataclass(frozen=True, eq=True)
class GraphicMatroid(_EdgeFamily):
    """Forests of a graph (packing) / spanning subgraphs (covering)."""

    kind: ClassVar[str] = "graphic_matroid"

    def _independent(self, s):
        ends = self.endpoints()
        return _acyclic(ends[e] for e in sorted(s))

    def _covers(self, s):
        ends = self.endpoints()
        vertices = {x for _, u, v in self.edges for x in (u, v)}
        return _component_count(vertices, (ends[e] for e in s)) == _component_count(vertices, ends.values())


@dataclass(frozen=True, eq=True)
class SpanningFeasibility(GraphicMatroid):
    kind: ClassVar[str] = "spanning"
    directions: ClassVar[tuple[Direction, ...]] = (Direction.COVERING,)
    direction: Direction = Direction.COVERING


@dataclass(frozen=True, eq=True)
class MatchingSystem(_EdgeFamily):
    kind: ClassVar[str] = "matching"
    directions: ClassVar[tuple[Direction, ...]] = (Direction.PACKING,)

    def _independent(self, s):
        ends = self.endpoints()
        used: set[str] = set()
        for e in s:
            u, v = ends[e]
            if u in used or v in used:
                return False
            used.add(u)
            used.add(v)
        return True


@dataclass(frozen=True, eq=True)
class ExplicitFamily(Constraint):
    """Family given by listing every member set; must be closed in its direction."""

    kind: ClassVar[str] = "explicit"
    sets: tuple[frozenset[str], ...] = ()
    universe: tuple[str, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        sets = tuple(sorted({_fs(s) for s in self.sets}, key=lambda s: (len(s), sorted(s))))
        object.__setattr__(self, "sets", sets)
        uni = tuple(sorted(set(self.universe) | {e for s in sets for e in s}))
        object.__setattr__(self, "universe", uni)
        members = set(sets)
        for s in sets:
            if self.direction is Direction.PACKING:
                bad = any(s - {e} not in members for e in s)
            else:
                bad = any(s | {e} not in members for e in uni if e not in s)
            if bad:
                raise ModelError(f"explicit family is not closed for {self.direction.value}: {sorted(s)}")

    def ground(self):
        return _fs(self.universe)

    def _independent(self, s):
        return s in self.sets

    def _covers(self, s):
        return s in self.sets

    def payload(self):
        return {"sets": [sorted(s) for s in self.sets], "universe": list(self.universe)}


@dataclass(frozen=True, eq=True)
class Knapsack(Constraint):
    kind: ClassVar[str] = "knapsack"
    directions: ClassVar[tuple[Direction, ...]] = (Direction.PACKING,)
    sizes: tuple[tuple[str, float], ...] = ()
    capacity: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        sizes = tuple(sorted((str(k), float(v)) for k, v in dict(self.sizes).items()))
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "capacity", float(self.capacity))
        if any(not 0 < v <= self.capacity for _, v in sizes):
            raise ModelError("knapsack sizes must lie in (0, capacity]")

    def ground(self):
        return _fs(k for k, _ in self.sizes)

    def size(self, e: str) -> float:
        return dict(self.sizes)[e]

    def _independent(self, s):
        sz = dict(self.sizes)
        return math.fsum(sz[e] for e in s) <= self.capacity + 1e-12

    def payload(self):
        return {"sizes": dict(self.sizes), "capacity": self.capacity}


@dataclass(frozen=True, eq=True)
class SetCoverFeasibility(Constraint):
    kind: ClassVar[str] = "set_cover"
    directions: ClassVar[tuple[Direction, ...]] = (Direction.COVERING,)
    universe: tuple[str, ...] = ()
    members: tuple[tuple[str, frozenset[str]], ...] = ()

    def __post_init__(self):
        super().__post_init__()
        uni = tuple(sorted(set(map(str, self.universe))))
        mem = tuple(sorted((str(k), _fs(map(str, v))) for k, v in dict(self.members).items()))
        object.__setattr__(self, "universe", uni)
        object.__setattr__(self, "members", mem)
        stray = {x for _, m in mem for x in m} - set(uni)
        if stray:
            raise ModelError(f"set members outside the universe: {sorted(stray)}")

    def ground(self):
        return _fs(k for k, _ in self.members)

    def covered(self, s: Iterable[str]) -> frozenset[str]:
        mem = dict(self.members)
        out: set[str] = set()
        for e in s:
            out |= mem[e]
        return _fs(out)

    def frequency(self) -> int:
        """Largest number of sets containing one ground item (the ``f`` of primal-dual)."""
        return max((sum(x in m for _, m in self.members) for x in self.universe), default=0)

    def _covers(self, s):
        return self.covered(s) >= set(self.universe)

    def payload(self):
        return {"universe": list(self.universe), "members": {k: sorted(m) for k, m in self.members}}


@dataclass(frozen=True, eq=True)
class FVSFeasibility(Constraint):
    """Vertex sets whose removal leaves a forest; elements are vertices."""

    kind: ClassVar[str] = "fvs"
    directions: ClassVar[tuple[Direction, ...]] = (Direction.COVERING,)
    vertices: tuple[str, ...] = ()
    graph_edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        super().__post_init__()
        edges = tuple(sorted(tuple(sorted((str(u), str(v)))) for u, v in self.graph_edges))
        if any(u == v for u, v in edges):
            raise ModelError("feedback vertex set graphs may not have self-loops")
        if len(set(edges)) != len(edges):
            raise ModelError("feedback vertex set graphs must be simple")
        object.__setattr__(self, "graph_edges", edges)
        verts = tuple(sorted(set(map(str, self.vertices)) | {x for e in edges for x in e}))
        object.__setattr__(self, "vertices", verts)

    def ground(self):
        return _fs(self.vertices)

    def _covers(self, s):
        return _acyclic((u, v) for u, v in self.graph_edges if u not in s and v not in s)

    def payload(self):
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.graph_edges]}


@dataclass(frozen=True, eq=True)
class PCSTFeasibility(Constraint):
    """Every set of non-root vertices is an admissible penalised set."""

    kind: ClassVar[str] = "pcst"
    directions: ClassVar[tuple[Direction, ...]] = (Direction.COVERING,)
    root: str = ""
    vertices: tuple[str, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "vertices", tuple(sorted(set(self.vertices) - {self.root})))

    def ground(self):
        return _fs(self.vertices)

    def _covers(self, s):
        return True

    def payload(self):
        return {"root": self.root, "vertices": list(self.vertices)}


@dataclass(frozen=True, eq=True)
class Disjointness(Constraint):
    """Selections whose ground sets are pairwise disjoint (an l-system, l = largest set)."""

    kind: ClassVar[str] = "disjointness"
    directions: ClassVar[tuple[Direction, ...]] = (Direction.PACKING,)
    ground_sets: tuple[tuple[str, frozenset[str]], ...] = ()

    def __post_init__(self):
        super().__post_init__()
        gs = tuple(sorted((str(k), _fs(v)) for k, v in dict(self.ground_sets).items()))
        object.__setattr__(self, "ground_sets", gs)

    def ground(self):
        return _fs(k for k, _ in self.ground_sets)

    @property
    def ell(self) -> int:
        return max((len(v) for _, v in self.ground_sets), default=1)

    def _independent(self, s):
        gs = dict(self.ground_sets)
        seen: set[str] = set()
        for e in sorted(s):
            if seen & gs[e]:
                return False
            seen |= gs[e]
        return True

    def payload(self):
        return {"ground_sets": {k: sorted(v) for k, v in self.ground_sets}}


CONSTRAINT_KINDS: dict[str, type[Constraint]] = {
    cls.kind: cls
    for cls in (UniformMatroid, PartitionMatroid, GraphicMatroid, SpanningFeasibility, MatchingSystem,
                ExplicitFamily, Knapsack, SetCoverFeasibility, FVSFeasibility, PCSTFeasibility, Disjointness)
}


def is_independent(c: Constraint, s: Iterable[str]) -> bool:
    """Membership in a downward-closed (packing) family."""
    if c.direction is not Direction.PACKING:
        raise ModelError(f"{c.kind} constraint is not a packing family")
    return c._independent(c.check_ids(s))


def is_feasible_cover(c: Constraint, s: Iterable[str]) -> bool:
    """Membership in an upward-closed (covering) family."""
    if c.direction is not Direction.COVERING:
        raise ModelError(f"{c.kind} constraint is not a covering family")
    return c._covers(c.check_ids(s))


def is_feasible(c: Constraint, s: Iterable[str]) -> bool:
    if c.direction is Direction.PACKING:
        return is_independent(c, s)
    return is_feasible_cover(c, s)


def matroid_rank_bound(c: Constraint) -> int | None:
    """The k of a k-system for families where it is known without search."""
    if isinstance(c, (UniformMatroid, PartitionMatroid, GraphicMatroid)):
        return 1
    if isinstance(c, MatchingSystem):
        return 2
    if isinstance(c, Disjointness):
        return c.ell
    return None


def system_ratio(c: Constraint, ground: Sequence[str]) -> float:
    """Exhaustive k of a packing family: worst max/min maximal-set size over all subsets.

    Exponential in ``len(ground)``; meant for audits on small instances.
    """
    ground = sorted(ground)
    n = len(ground)
    if n > 14:
        raise ModelError("system_ratio is exhaustive; ground set too large")
    indep = {}
    for mask in range(1 << n):
        s = frozenset(ground[i] for i in range(n) if mask >> i & 1)
        indep[mask] = is_independent(c, s)
    worst = 1.0
    for y in range(1, 1 << n):
        sizes = []
        sub = y
        while True:
            if indep[sub]:
                # maximal inside y: no element of y can be added
                maximal = all(not indep[sub | (1 << i)] for i in range(n) if (y >> i & 1) and not (sub >> i & 1))
                if maximal:
                    sizes.append(bin(sub).count("1"))
            if sub == 0:
                break
            sub = (sub - 1) & y
        lo, hi = min(sizes), max(sizes)
        if lo == 0:
            if hi > 0:
                return math.inf
            continue
        worst = max(worst, hi / lo)
    return worst


# --------------------------------------------------------------------------
# objectives


@dataclass(frozen=True, eq=True)
class Objective:
    kind: ClassVar[str] = ""

    def h(self, selected: frozenset[str]) -> float:
        raise NotImplementedError

    def payload(self) -> dict:
        return {}


@dataclass(frozen=True, eq=True)
class Additive(Objective):
    kind: ClassVar[str] = "additive"

    def h(self, selected):
        return 0.0


@dataclass(frozen=True, eq=True)
class FacilityLocation(Objective):
    """Connection cost: every client pays the distance to its nearest open facility."""

    kind: ClassVar[str] = "facility_location"
    locations: tuple[str, ...] = ()
    distances: tuple[tuple[float, ...], ...] = ()
    clients: tuple[str, ...] = ()

    def __post_init__(self):
        locs = tuple(map(str, self.locations))
        dist = tuple(tuple(float(x) for x in row) for row in self.distances)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "distances", dist)
        object.__setattr__(self, "clients", tuple(map(str, self.clients)))
        m = len(locs)
        if len(set(locs)) != m:
            raise ModelError("facility locations must be unique")
        if len(dist) != m or any(len(r) != m for r in dist):
            raise ModelError("distance matrix must be square over the locations")
        d = np.array(dist) if m else np.zeros((0, 0))
        if m and (np.any(d < 0) or not np.allclose(d, d.T, rtol=0, atol=1e-12) or np.any(np.diag(d) != 0)):
            raise ModelError("distances must be a symmetric nonnegative matrix with zero diagonal")
        if m and np.any(d[:, None, :] > d[:, :, None] + d[None, :, :] + 1e-9):
            raise ModelError("distances violate the triangle inequality")
        unknown = set(self.clients) - set(locs)
        if unknown:
            raise ModelError(f"clients not among locations: {sorted(unknown)}")

    def d(self, a: str, b: str) -> float:
        idx = self._index()
        return self.distances[idx[a]][idx[b]]

    def _index(self):
        try:
            return self.__dict__["_idx"]
        except KeyError:
            idx = {v: i for i, v in enumerate(self.locations)}
            object.__setattr__(self, "_idx", idx)
            return idx

    def h(self, selected):
        if not self.clients:
            return 0.0
        if not selected:
            return math.inf
        idx = self._index()
        cols = [idx[i] for i in selected]
        return math.fsum(min(self.distances[idx[c]][j] for j in cols) for c in self.clients)

    def payload(self):
        return {"locations": list(self.locations), "distances": [list(r) for r in self.distances],
                "clients": list(self.clients)}


@dataclass(frozen=True, eq=True)
class PCSTPenalty(Objective):
    """Cost of the cheapest tree joining the root to every non-penalised vertex."""

    kind: ClassVar[str] = "pcst_penalty"
    root: str = ""
    edges: tuple[tuple[str, str, float], ...] = ()

    MAX_TERMINALS: ClassVar[int] = 16

    def __post_init__(self):
        edges = tuple(sorted((str(u), str(v), float(c)) for u, v, c in self.edges))
        if any(c < 0 for _, _, c in edges):
            raise ModelError("edge costs must be >= 0")
        if any(u == v for u, v, _ in edges):
            raise ModelError("PCST graphs may not have self-loops")
        object.__setattr__(self, "edges", edges)
        verts = sorted({x for u, v, _ in edges for x in (u, v)} | {self.root})
        object.__setattr__(self, "_vertices", tuple(verts))
        idx = {v: i for i, v in enumerate(verts)}
        m = len(verts)
        dist = np.full((m, m), np.inf)
        np.fill_diagonal(dist, 0.0)
        for u, v, c in edges:
            a, b = idx[u], idx[v]
            if c < dist[a, b]:
                dist[a, b] = dist[b, a] = c
        for k in range(m):
            dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
        if m and not np.all(np.isfinite(dist)):
            raise ModelError("PCST graph must be connected")
        object.__setattr__(self, "_idx", idx)
        object.__setattr__(self, "_apsp", dist)
        object.__setattr__(self, "_cache", {})

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def non_root(self) -> tuple[str, ...]:
        return tuple(v for v in self._vertices if v != self.root)

    def steiner(self, terminals: Iterable[str]) -> float:
        term = sorted(set(terminals) | {self.root})
        key = tuple(term)
        cache = self._cache
        if key not in cache:
            if len(term) > self.MAX_TERMINALS:
                raise ModelError(f"exact Steiner tree limited to {self.MAX_TERMINALS} terminals")
            # root last: the DP reads its answer at the final terminal
            order = [self._idx[t] for t in term if t != self.root] + [self._idx[self.root]]
            cache[key] = float(kernels.steiner_cost(self._apsp, np.array(order, dtype=np.int64)))
        return cache[key]

    def h(self, selected):
        return self.steiner(v for v in self.non_root if v not in selected)

    def payload(self):
        return {"root": self.root, "edges": [list(e) for e in self.edges]}


OBJECTIVE_KINDS: dict[str, type[Objective]] = {
    cls.kind: cls for cls in (Additive, FacilityLocation, PCSTPenalty)
}


def eval_objective(obj: Objective, selected: Iterable[str], realized: Mapping[str, float]) -> float:
    """Semiadditive value: sum of realised values of ``selected`` plus h(selected)."""
    sel = frozenset(selected)
    try:
        additive = math.fsum(realized[i] for i in sel)
    except KeyError as exc:
        raise ModelError(f"missing realised value for {exc.args[0]!r}") from None
    return additive + obj.h(sel)


# --------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class ProbeSet:
    id: str
    members: frozenset[str]
    price: float


@dataclass(frozen=True)
class SetProbeFamily:
    """Priced sets of elements; probing a set reveals all its members at once."""

    sets: tuple[ProbeSet, ...]

    def __post_init__(self):
        sets = tuple(sorted(self.sets, key=lambda s: s.id))
        object.__setattr__(self, "sets", sets)
        if len({s.id for s in sets}) != len(sets):
            raise ModelError("probe-set ids must be unique")
        for s in sets:
            if not s.members:
                raise ModelError(f"probe set {s.id!r} is empty")
            if not (s.price >= 0 and math.isfinite(s.price)):
                raise ModelError(f"probe set {s.id!r}: price must be finite and >= 0")

    @property
    def ell(self) -> int:
        return max(len(s.members) for s in self.sets)

    def by_id(self) -> dict[str, ProbeSet]:
        return {s.id: s for s in self.sets}


@dataclass(frozen=True)
class PoiInstance:
    elements: tuple[ProbeElement, ...]
    constraint: Constraint
    objective: Objective = field(default_factory=Additive)
    probing_constraint: Constraint | None = None
    set_probing: SetProbeFamily | None = None
    name: str = ""

    def __post_init__(self):
        elements = tuple(sorted(self.elements, key=lambda e: e.id))
        object.__setattr__(self, "elements", elements)
        ids = [e.id for e in elements]
        if len(set(ids)) != len(ids):
            raise ModelError("element ids must be unique")
        idset = set(ids)
        for c in (self.constraint, self.probing_constraint):
            if c is None:
                continue
            g = c.ground()
            if g is not None and not g <= idset:
                raise UnknownElementError(f"{c.kind} references unknown ids: {sorted(g - idset)}")
        if self.probing_constraint is not None and self.probing_constraint.direction is not Direction.PACKING:
            raise ModelError("probing constraints must be packing families")
        if self.set_probing is not None:
            stray = {m for s in self.set_probing.sets for m in s.members} - idset
            if stray:
                raise UnknownElementError(f"probe sets reference unknown ids: {sorted(stray)}")
        obj = self.objective
        if isinstance(obj, FacilityLocation):
            missing = idset - set(obj.locations)
            if missing:
                raise ModelError(f"facilities without a location: {sorted(missing)}")
        if isinstance(obj, PCSTPenalty):
            if set(obj.non_root) != idset:
                raise ModelError("PCST elements must be exactly the non-root vertices")
        if self.direction is Direction.COVERING and not self.constraint._covers(frozenset(ids)):
            raise ModelError("covering instance is infeasible: the full element set is not a cover")

    @property
    def direction(self) -> Direction:
        return self.constraint.direction

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.elements)

    def element(self, eid: str) -> ProbeElement:
        for e in self.elements:
            if e.id == eid:
                return e
        raise UnknownElementError(f"unknown element id {eid!r}")

    def by_id(self) -> dict[str, ProbeElement]:
        return {e.id: e for e in self.elements}

    @property
    def fallbacks(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.elements if e.fallback)

    def feasible(self, s: Iterable[str]) -> bool:
        return is_feasible(self.constraint, s)

    def value(self, selected: Iterable[str], realized: Mapping[str, float]) -> float:
        return eval_objective(self.objective, selected, realized)

    def support_product(self) -> int:
        return math.prod(len(e.dist) for e in self.elements)

    def restricted(self, keep: Iterable[str], **changes) -> "PoiInstance":
        """Copy with only ``keep`` elements (constraint must not reference others)."""
        keep = set(keep)
        els = tuple(e for e in self.elements if e.id in keep)
        fields = dict(elements=els, constraint=self.constraint, objective=self.objective,
                      probing_constraint=self.probing_constraint, set_probing=self.set_probing, name=self.name)
        fields.update(changes)
        return PoiInstance(**fields)


def outcome_space(inst: PoiInstance) -> Iterable[tuple[float, dict[str, float]]]:
    """Every full outcome vector with its probability, in lexicographic atom order."""
    els = inst.elements
    for combo in itertools.product(*(range(len(e.dist)) for e in els)):
        p = 1.0
        out = {}
        for e, k in zip(els, combo):
            p *= e.dist.probs[k]
            out[e.id] = e.dist.support[k]
        yield p, out
