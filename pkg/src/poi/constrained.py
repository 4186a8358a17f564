"""Pandora's box under probing constraints, and set probing.

The pipeline for a probing constraint J:

1. choose a J-feasible set S greedily for f(S) = E[max(0, max_{i in S} Y_max_i)],
   a monotone submodular function;
2. run Weitzman's index policy on S alone, whose expected utility is f(S).

Set probing (one price reveals a whole group of values) reduces to the same
pipeline.  Each group becomes one box holding the maximum of its members,
and J requires the chosen groups to be pairwise disjoint.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .adaptive import DEFAULT_MAX_LEAVES, Probe, Select, Strategy, StrategyTrace, exact_expected_utility, settle
from .dist import compose_max, expected_value, with_floor
from .frugal import RuleMismatchError
from .model import (
    Additive,
    CapExceededError,
    Direction,
    Disjointness,
    PoiInstance,
    ProbeElement,
    SetProbeFamily,
    UniformMatroid,
    is_independent,
)

TIE_TOL = 1e-12


def _check_pandora(inst: PoiInstance) -> None:
    c = inst.constraint
    if (inst.direction is not Direction.PACKING or not isinstance(c, UniformMatroid) or c.rank != 1
            or not isinstance(inst.objective, Additive)):
        raise RuleMismatchError("needs a rank-1 additive packing instance (Pandora's box)")


class WeitzmanPolicy(Strategy):
    """Open boxes by decreasing grade; stop once the best value found reaches every remaining grade."""

    name = "weitzman"
    directions = (Direction.PACKING,)

    def check(self, inst):
        super().check(inst)
        _check_pandora(inst)

    def run(self, inst, outcome, coin=0.0):
        trace = StrategyTrace(Direction.PACKING)
        best = None
        for e in sorted(inst.elements, key=lambda e: (-e.tau_max, e.id)):
            if e.tau_max <= 0 or (best is not None and best[0] >= e.tau_max):
                break
            x = outcome[e.id]
            trace.steps.append(Probe(e.id, x, e.price))
            if best is None or x > best[0]:
                best = (x, e.id)
        if best is not None and best[0] > 0:
            trace.steps.append(Select(best[1]))
        return settle(inst, trace)


def weitzman_policy(inst: PoiInstance) -> WeitzmanPolicy:
    policy = WeitzmanPolicy()
    policy.check(inst)
    return policy


def expected_max_surrogate(elements: Iterable[ProbeElement]) -> float:
    """E[max(0, max_i Y_max_i)]; the empty set scores 0."""
    els = tuple(elements)
    if not els:
        return 0.0
    return _emax(tuple(sorted(els, key=lambda e: e.id)))


@lru_cache(maxsize=65536)
def _emax(els: tuple[ProbeElement, ...]) -> float:
    return expected_value(with_floor(compose_max([e.y_max for e in els]), 0.0))


def nonadaptive_probe_greedy(inst: PoiInstance, J=None) -> frozenset[str]:
    """Greedy J-feasible set for E[max Y_max]; ties go to the smaller id."""
    J = inst.probing_constraint if J is None else J
    els = inst.by_id()
    chosen: list[str] = []
    value = 0.0
    while True:
        best = None
        for i in inst.ids:
            if i in chosen:
                continue
            s = frozenset(chosen) | {i}
            if J is not None and not is_independent(J, s):
                continue
            gain = expected_max_surrogate(els[k] for k in s) - value
            if best is None or gain > best[0] + TIE_TOL:
                best = (gain, i)
        if best is None or best[0] <= TIE_TOL:
            return frozenset(chosen)
        chosen.append(best[1])
        value = expected_max_surrogate(els[k] for k in chosen)


def best_nonadaptive_value(inst: PoiInstance, J=None, max_elements: int = 16) -> tuple[frozenset[str], float]:
    """Exhaustive maximum of E[max Y_max] over J-feasible sets."""
    J = inst.probing_constraint if J is None else J
    ids = inst.ids
    if len(ids) > max_elements:
        raise CapExceededError(f"exhaustive search limited to {max_elements} elements")
    els = inst.by_id()
    best = (frozenset(), 0.0)
    for mask in range(1, 1 << len(ids)):
        s = frozenset(ids[k] for k in range(len(ids)) if mask >> k & 1)
        if J is not None and not is_independent(J, s):
            continue
        v = expected_max_surrogate(els[k] for k in s)
        if v > best[1] + TIE_TOL:
            best = (s, v)
    return best


def restricted_pandora(inst: PoiInstance, keep: Iterable[str]) -> PoiInstance:
    return inst.restricted(keep, constraint=UniformMatroid(rank=1), probing_constraint=None, set_probing=None)


def constrained_um_pipeline(inst: PoiInstance, max_leaves: int = DEFAULT_MAX_LEAVES) -> tuple[frozenset[str], float]:
    """(probe set, exact expected utility) of greedy selection followed by Weitzman."""
    _check_pandora(inst)
    if inst.probing_constraint is None:
        raise ValueError("constrained pipeline needs a probing constraint")
    chosen = nonadaptive_probe_greedy(inst)
    if not chosen:
        return chosen, 0.0
    sub = restricted_pandora(inst, chosen)
    return chosen, exact_expected_utility(sub, WeitzmanPolicy(), max_leaves)


# --------------------------------------------------------------------------
# set probing


def meta_elements(inst: PoiInstance, family: SetProbeFamily) -> tuple[ProbeElement, ...]:
    """One box per probe set, valued at the maximum of its members."""
    els = inst.by_id()
    return tuple(ProbeElement(s.id, compose_max([els[m].dist for m in sorted(s.members)]), s.price)
                 for s in family.sets)


def meta_instance(inst: PoiInstance, family: SetProbeFamily, keep: Iterable[str] | None = None) -> PoiInstance:
    metas = meta_elements(inst, family)
    if keep is not None:
        keep = set(keep)
        metas = tuple(m for m in metas if m.id in keep)
    return PoiInstance(metas, UniformMatroid(rank=1), name=inst.name)


def _family(inst: PoiInstance, family: SetProbeFamily | None) -> SetProbeFamily:
    family = inst.set_probing if family is None else family
    if family is None:
        raise ValueError("instance has no set-probing family")
    return family


def set_probing_plan(inst: PoiInstance, family: SetProbeFamily | None = None) -> tuple[str, ...]:
    """Greedy pairwise-disjoint probe sets, in the order Weitzman's rule would open them."""
    family = _family(inst, family)
    metas = meta_instance(inst, family)
    disjoint = Disjointness(ground_sets=tuple((s.id, s.members) for s in family.sets))
    chosen = nonadaptive_probe_greedy(metas, disjoint)
    seen: set[str] = set()
    for s in family.sets:
        if s.id in chosen:
            if seen & s.members:
                raise AssertionError("set-probing greedy chose overlapping sets")
            seen |= s.members
    by_id = metas.by_id()
    return tuple(sorted(chosen, key=lambda k: (-by_id[k].tau_max, k)))


def set_probing_pipeline(inst: PoiInstance, family: SetProbeFamily | None = None,
                         max_leaves: int = DEFAULT_MAX_LEAVES) -> tuple[tuple[str, ...], float]:
    """(probe plan, exact expected utility) for set probing."""
    family = _family(inst, family)
    plan = set_probing_plan(inst, family)
    if not plan:
        return plan, 0.0
    return plan, exact_expected_utility(meta_instance(inst, family, plan), WeitzmanPolicy(), max_leaves)


def optimal_set_probing_utility(inst: PoiInstance, family: SetProbeFamily | None = None,
                                max_states: int = 2_000_000) -> float:
    """Best adaptive utility when any probe sets may be bought, overlapping or not.

    State = (sets bought, best value seen).  Values of elements already
    revealed by an earlier set are at most the best value seen, so only the
    newly revealed members matter for the transition.
    """
    family = _family(inst, family)
    els = inst.by_id()
    sets = family.sets
    m = len(sets)
    grid = sorted({0.0} | {v for e in inst.elements for v in e.dist.support})
    if (1 << m) * len(grid) > max_states:
        raise CapExceededError(f"set-probing DP needs {(1 << m) * len(grid)} states; cap is {max_states}")
    revealed = [frozenset().union(*(sets[k].members for k in range(m) if mask >> k & 1)) for mask in range(1 << m)]

    @lru_cache(maxsize=None)
    def new_max(mask: int, k: int):
        fresh = sorted(sets[k].members - revealed[mask])
        if not fresh:
            return None
        return compose_max([els[i].dist for i in fresh])

    @lru_cache(maxsize=None)
    def value(mask: int, cur: float) -> float:
        best = cur
        for k in range(m):
            if mask >> k & 1:
                continue
            d = new_max(mask, k)
            nxt = mask | (1 << k)
            if d is None:
                cont = -sets[k].price + value(nxt, cur)
            else:
                cont = -sets[k].price + math.fsum(p * value(nxt, max(cur, v)) for v, p in zip(d.support, d.probs))
            best = max(best, cont)
        return best

    return value(0, 0.0)


class ConstrainedPipeline(Strategy):
    """Weitzman's policy on the greedy probe set."""

    name = "pipeline:constrained"
    directions = (Direction.PACKING,)

    def __init__(self):
        self._plans: dict = {}

    def check(self, inst):
        super().check(inst)
        _check_pandora(inst)
        if inst.probing_constraint is None:
            raise RuleMismatchError("pipeline:constrained needs a probing constraint")

    def _sub(self, inst):
        if inst not in self._plans:
            self._plans[inst] = restricted_pandora(inst, nonadaptive_probe_greedy(inst))
        return self._plans[inst]

    def run(self, inst, outcome, coin=0.0):
        sub = self._sub(inst)
        if not sub.elements:
            return StrategyTrace(Direction.PACKING)
        return WeitzmanPolicy().run(sub, outcome)

    def exact(self, inst, max_leaves=DEFAULT_MAX_LEAVES):
        return constrained_um_pipeline(inst, max_leaves)[1]


class SetProbingPipeline(Strategy):
    """Weitzman's policy over the greedy disjoint probe sets; trace ids are set ids."""

    name = "pipeline:set-probing"
    directions = (Direction.PACKING,)

    def __init__(self):
        self._plans: dict = {}

    def check(self, inst):
        super().check(inst)
        if inst.set_probing is None:
            raise RuleMismatchError("pipeline:set-probing needs a set_probing block")

    def _meta(self, inst):
        if inst not in self._plans:
            self._plans[inst] = meta_instance(inst, inst.set_probing, set_probing_plan(inst))
        return self._plans[inst]

    def run(self, inst, outcome, coin=0.0):
        meta = self._meta(inst)
        if not meta.elements:
            return StrategyTrace(Direction.PACKING)
        members = inst.set_probing.by_id()
        meta_outcome = _MetaOutcome(outcome, {k: sorted(members[k].members) for k in meta.ids})
        return WeitzmanPolicy().run(meta, meta_outcome)

    def exact(self, inst, max_leaves=DEFAULT_MAX_LEAVES):
        return set_probing_pipeline(inst, None, max_leaves)[1]


class _MetaOutcome(Mapping):
    """A probe set's value is the largest of its members' values."""

    def __init__(self, outcome: Mapping[str, float], members: dict[str, Sequence[str]]):
        self.outcome = outcome
        self.members = members

    def __getitem__(self, key):
        return max(self.outcome[m] for m in self.members[key])

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)
