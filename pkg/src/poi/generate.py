"""Random and hand-built instances.

Every generator is a pure function of its parameters and seed.  Values and
prices are rounded to two decimals so the files stay readable; the
rounding is part of the instance, not noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import DiscreteDistribution, expected_value
from .model import (
    Direction,
    FacilityLocation,
    FVSFeasibility,
    GraphicMatroid,
    Knapsack,
    MatchingSystem,
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
    default_fallback_price,
)

KINDS = ("pandora", "matroid", "matching", "knapsack", "setcover", "facility", "pcst", "fvs", "constrained",
         "setprobe", "pandora-a1", "adaptivity-a2")


class GenerateError(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    n: int = 4
    seed: int = 0
    support: int = 3
    k: int = 1
    p: float = 0.5
    eps: float = 0.1
    covering: bool = False


def _ids(prefix: str, n: int) -> list[str]:
    width = len(str(max(n, 1)))
    return [f"{prefix}{k + 1:0{width}d}" for k in range(n)]


def random_distribution(rng: np.random.Generator, max_support: int, scale: float = 10.0) -> DiscreteDistribution:
    """Up to ``max_support`` distinct two-decimal values with probabilities in twentieths."""
    s = int(rng.integers(1, max_support + 1))
    values = sorted({round(float(v), 2) for v in rng.uniform(0, scale, size=s)})
    s = len(values)
    cuts = sorted(rng.choice(np.arange(1, 20), size=s - 1, replace=False).tolist()) if s > 1 else []
    bounds = [0] + cuts + [20]
    probs = [(b - a) / 20 for a, b in zip(bounds, bounds[1:])]
    return DiscreteDistribution(tuple(values), tuple(probs))


def _random_price(rng, d: DiscreteDistribution, spread: float = 0.6) -> float:
    return round(float(rng.uniform(0, spread * max(expected_value(d), 0.01))), 2)


def _elements(rng, ids, max_support, scale=10.0, spread=0.6) -> list[ProbeElement]:
    out = []
    for i in ids:
        d = random_distribution(rng, max_support, scale)
        out.append(ProbeElement(i, d, _random_price(rng, d, spread)))
    return out


def _fallback(eid: str, others) -> ProbeElement:
    return ProbeElement(eid, DiscreteDistribution.point(0.0), round(default_fallback_price(others), 2), fallback=True)


def _random_edges(rng, vertices: list[str], m: int, connected: bool = False) -> list[tuple[str, str]]:
    """``m`` distinct edges (a spanning tree first when ``connected``)."""
    pairs = [(u, v) for a, u in enumerate(vertices) for v in vertices[a + 1:]]
    chosen: list[tuple[str, str]] = []
    if connected:
        order = list(rng.permutation(len(vertices)))
        for k in range(1, len(order)):
            u, v = vertices[order[k]], vertices[order[int(rng.integers(0, k))]]
            chosen.append(tuple(sorted((u, v))))
    rest = [e for e in pairs if e not in chosen]
    need = max(0, min(m - len(chosen), len(rest)))
    if need:
        for idx in sorted(rng.choice(len(rest), size=need, replace=False).tolist()):
            chosen.append(rest[idx])
    return chosen


def gen_pandora(prm: GenParams) -> PoiInstance:
    rng = np.random.default_rng(prm.seed)
    els = _elements(rng, _ids("b", prm.n), prm.support)
    return PoiInstance(tuple(els), UniformMatroid(rank=1), name=f"pandora-n{prm.n}-s{prm.seed}")


def gen_matroid(prm: GenParams) -> PoiInstance:
    rng = np.random.default_rng(prm.seed)
    n = prm.n
    ids = _ids("e", n)
    els = _elements(rng, ids, prm.support)
    direction = Direction.COVERING if prm.covering else Direction.PACKING
    flavour = ("uniform", "partition", "graphic")[int(rng.integers(0, 3))]
    if flavour == "uniform":
        c = UniformMatroid(direction=direction, rank=int(rng.integers(1, max(n, 2))))
    elif flavour == "partition":
        nparts = int(rng.integers(1, max(2, n // 2 + 1)))
        labels = [f"p{int(rng.integers(0, nparts)) + 1}" for _ in ids]
        parts: dict[str, list[str]] = {}
        for i, lab in zip(ids, labels):
            parts.setdefault(lab, []).append(i)
        caps = {lab: int(rng.integers(1, len(m) + 1)) for lab, m in parts.items()}
        c = PartitionMatroid(direction=direction, parts=tuple(parts.items()), caps=tuple(caps.items()))
    else:
        nv = max(2, int(math.ceil(n / 1.5)) + 1)
        verts = _ids("v", nv)
        # parallel edges are allowed in a graphic matroid, so draw endpoints freely
        edges = []
        for i in ids:
            a, b = rng.choice(nv, size=2, replace=False)
            edges.append((i, verts[int(a)], verts[int(b)]))
        cls = SpanningFeasibility if prm.covering else GraphicMatroid
        c = cls(direction=direction, edges=tuple(edges))
    return PoiInstance(tuple(els), c, name=f"matroid-{flavour}-n{n}-s{prm.seed}")


def gen_matching(prm: GenParams) -> PoiInstance:
    rng = np.random.default_rng(prm.seed)
    nv = max(3, min(6, prm.n))
    verts = _ids("v", nv)
    pairs = _random_edges(rng, verts, prm.n)
    ids = _ids("e", len(pairs))
    els = _elements(rng, ids, prm.support)
    c = MatchingSystem(edges=tuple((i, u, v) for i, (u, v) in zip(ids, pairs)))
    return PoiInstance(tuple(els), c, name=f"matching-n{len(ids)}-s{prm.seed}")


def gen_knapsack(prm: GenParams) -> PoiInstance:
    rng = np.random.default_rng(prm.seed)
    ids = _ids("i", prm.n)
    els = _elements(rng, ids, prm.support)
    cap = 10.0
    sizes = {i: round(float(rng.uniform(0.5, cap)), 2) for i in ids}
    return PoiInstance(tuple(els), Knapsack(sizes=tuple(sizes.items()), capacity=cap),
                       name=f"knapsack-n{prm.n}-s{prm.seed}")


def gen_setcover(prm: GenParams) -> PoiInstance:
    """``n`` random sets over a small universe, plus a fallback set covering everything."""
    rng = np.random.default_rng(prm.seed)
    universe = _ids("u", max(2, prm.n))
    ids = _ids("S", max(1, prm.n - 1))
    members = {}
    for i in ids:
        size = int(rng.integers(1, len(universe) + 1))
        members[i] = sorted(rng.choice(universe, size=size, replace=False).tolist())
    els = _elements(rng, ids, prm.support)
    fb = _fallback("S0", els)
    members["S0"] = list(universe)
    c = SetCoverFeasibility(direction=Direction.COVERING, universe=tuple(universe), members=tuple(members.items()))
    return PoiInstance(tuple(els) + (fb,), c, name=f"setcover-n{prm.n}-s{prm.seed}")


def gen_facility(prm: GenParams) -> PoiInstance:
    """Facilities and clients at integer points of the plane (Euclidean metric)."""
    rng = np.random.default_rng(prm.seed)
    fac = _ids("f", prm.n)
    clients = _ids("c", max(1, prm.k if prm.k > 1 else prm.n))
    locs = fac + clients
    pts = rng.integers(0, 6, size=(len(locs), 2)).astype(float)
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    obj = FacilityLocation(locations=tuple(locs), distances=tuple(map(tuple, dist.tolist())), clients=tuple(clients))
    els = _elements(rng, fac, prm.support)
    return PoiInstance(tuple(els), UniformMatroid(direction=Direction.COVERING, rank=1), obj,
                       name=f"facility-n{prm.n}-s{prm.seed}")


def gen_pcst(prm: GenParams) -> PoiInstance:
    rng = np.random.default_rng(prm.seed)
    verts = ["r"] + _ids("v", prm.n)
    pairs = _random_edges(rng, verts, prm.n + max(1, prm.n // 2), connected=True)
    edges = tuple((u, v, round(float(rng.uniform(0.5, 6.0)), 2)) for u, v in pairs)
    obj = PCSTPenalty(root="r", edges=edges)
    els = _elements(rng, verts[1:], prm.support, scale=8.0)
    c = PCSTFeasibility(direction=Direction.COVERING, root="r", vertices=tuple(verts[1:]))
    return PoiInstance(tuple(els), c, obj, name=f"pcst-n{prm.n}-s{prm.seed}")


def gen_fvs(prm: GenParams) -> PoiInstance:
    rng = np.random.default_rng(prm.seed)
    verts = _ids("v", max(3, prm.n))
    m = min(len(verts) * (len(verts) - 1) // 2, len(verts) + max(1, len(verts) // 2))
    pairs = _random_edges(rng, verts, m, connected=True)
    els = _elements(rng, verts, prm.support)
    c = FVSFeasibility(direction=Direction.COVERING, vertices=tuple(verts), graph_edges=tuple(pairs))
    return PoiInstance(tuple(els), c, name=f"fvs-n{len(verts)}-s{prm.seed}")


def gen_constrained(prm: GenParams) -> PoiInstance:
    """Pandora's box where at most ``k`` boxes may be opened."""
    base = gen_pandora(prm)
    return PoiInstance(base.elements, base.constraint, probing_constraint=UniformMatroid(rank=max(0, prm.k)),
                       name=f"constrained-n{prm.n}-k{prm.k}-s{prm.seed}")


def gen_setprobe(prm: GenParams) -> PoiInstance:
    """Values revealed only in groups; ``k`` is the largest group size."""
    rng = np.random.default_rng(prm.seed)
    ids = _ids("x", prm.n)
    els = [ProbeElement(i, random_distribution(rng, prm.support), 0.0) for i in ids]
    ell = max(1, min(prm.k, prm.n))
    nsets = int(rng.integers(2, 6))
    sets = []
    for k, sid in enumerate(_ids("S", nsets)):
        size = int(rng.integers(1, ell + 1))
        members = frozenset(rng.choice(ids, size=size, replace=False).tolist())
        d = [e.dist for e in els if e.id in members]
        price = round(float(rng.uniform(0, 0.6 * max(expected_value(x) for x in d))), 2)
        sets.append(ProbeSet(sid, members, price))
    return PoiInstance(tuple(els), UniformMatroid(rank=1), set_probing=SetProbeFamily(tuple(sets)),
                       name=f"setprobe-n{prm.n}-l{ell}-s{prm.seed}")


def gen_pandora_a1(prm: GenParams) -> PoiInstance:
    """Boxes that fool the naive marginal-value greedy.

    ``n`` iid boxes worth 1/p^2 with probability p (price 1) and one sure box
    worth 1/p^2 priced 1/p^2 - 1/p + 1.  The sure box is named so that it
    sorts first and wins the initial tie.
    """
    p = prm.p
    if not 0 < p < 1:
        raise GenerateError("p must lie in (0, 1)")
    if prm.n < 1:
        raise GenerateError("n must be >= 1")
    big = 1.0 / p ** 2
    boxes = [ProbeElement(i, DiscreteDistribution((0.0, big), (1 - p, p)), 1.0) for i in _ids("x", prm.n)]
    sure = ProbeElement("d", DiscreteDistribution.point(big), big - 1.0 / p + 1.0)
    return PoiInstance(tuple(boxes) + (sure,), UniformMatroid(rank=1), name=f"pandora-a1-p{p:g}-n{prm.n}")


def gen_adaptivity_a2(prm: GenParams) -> PoiInstance:
    """``n`` iid boxes worth 1/p with probability p, each priced 1 - eps."""
    p, eps = prm.p, prm.eps
    if not 0 < p < 1:
        raise GenerateError("p must lie in (0, 1)")
    if not 0 < eps < 1:
        raise GenerateError("eps must lie in (0, 1)")
    boxes = [ProbeElement(i, DiscreteDistribution((0.0, 1.0 / p), (1 - p, p)), 1.0 - eps) for i in _ids("x", prm.n)]
    return PoiInstance(tuple(boxes), UniformMatroid(rank=1), name=f"adaptivity-a2-p{p:g}-e{eps:g}-n{prm.n}")


GENERATORS = {
    "pandora": gen_pandora,
    "matroid": gen_matroid,
    "matching": gen_matching,
    "knapsack": gen_knapsack,
    "setcover": gen_setcover,
    "facility": gen_facility,
    "pcst": gen_pcst,
    "fvs": gen_fvs,
    "constrained": gen_constrained,
    "setprobe": gen_setprobe,
    "pandora-a1": gen_pandora_a1,
    "adaptivity-a2": gen_adaptivity_a2,
}


def generate(kind: str, **params) -> PoiInstance:
    if kind not in GENERATORS:
        raise GenerateError(f"unknown kind {kind!r}; known: {', '.join(KINDS)}")
    prm = GenParams(**params)
    if prm.n < 1 or prm.support < 1 or prm.seed < 0:
        raise GenerateError("n and support must be >= 1 and seed >= 0")
    return GENERATORS[kind](prm)


# closed forms for the two hand-built families


def a1_weitzman_value(p: float, n: int) -> float:
    """Exact Weitzman utility on the naive-greedy trap: iid boxes first, then the sure box."""
    big = 1.0 / p ** 2
    per_probe = p * big - 1.0
    miss = (1 - p) ** n
    return per_probe * (1 - miss) / p + miss * (1.0 / p - 1.0)


def a2_adaptive_value(p: float, eps: float, n: int) -> float:
    """Geometric series: each probe gains eps until a prize appears."""
    return eps * (1 - (1 - p) ** n) / p


def a2_nonadaptive_value(p: float, eps: float, k: int) -> float:
    """Probe exactly k boxes regardless of what they show."""
    return (1 - (1 - p) ** k) / p - k * (1 - eps)


def a2_best_nonadaptive(p: float, eps: float, n: int) -> tuple[int, float]:
    vals = [(k, a2_nonadaptive_value(p, eps, k)) for k in range(n + 1)]
    return max(vals, key=lambda kv: (kv[1], -kv[0]))
