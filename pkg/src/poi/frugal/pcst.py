"""Moat growing for prize-collecting Steiner tree, made selection-by-selection.

Every non-root vertex starts as its own active component carrying a charge
equal to its penalty weight.  Active components grow their moat at unit
rate.  The growth of a component is charged to its unlabelled members one
at a time, in id order; a member whose own charge reaches its weight is
*labelled* at that moment and joins the penalised set.  A component whose
members are all labelled goes inactive, exactly when its total charge is
used up, so the moats and the tree are those of the usual primal-dual
algorithm.  Labelled vertices stay penalised even if the tree later
reaches them.

All times are exact rationals, so simultaneous events are detected exactly.
At equal times a labelling comes before an edge going tight; labellings
break ties by vertex id and edges by (u, v).

Labelling vertex v is an element selection with g = 1 / (1 + time at which
v's charge runs out).  That time grows with v's weight, so g is
nonincreasing in the weight as a covering rule requires.  Edge events are
internal steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..model import Direction, PCSTFeasibility, PCSTPenalty
from .engine import FreeInfoView, FrugalRule, RuleMismatchError, RuleState, run_engine

ZERO = Fraction(0)


@dataclass
class _MoatState(RuleState):
    time: Fraction = ZERO
    comp: dict[str, int] = field(default_factory=dict)
    members: dict[int, list[str]] = field(default_factory=dict)
    root_comp: int = -1
    charge: dict[str, Fraction] = field(default_factory=dict)
    load: dict[str, Fraction] = field(default_factory=dict)
    labelled: set[str] = field(default_factory=set)
    forest: list[tuple[str, str, float]] = field(default_factory=list)


class PcstModifiedGW(FrugalRule):
    name = "pcst-gw"
    directions = (Direction.COVERING,)
    internal_first = False

    def check(self, inst):
        super().check(inst)
        if not isinstance(inst.objective, PCSTPenalty) or not isinstance(inst.constraint, PCSTFeasibility):
            raise RuleMismatchError("pcst-gw needs a prize-collecting Steiner tree instance")

    def start(self, inst):
        obj = inst.objective
        state = _MoatState(inst)
        for k, v in enumerate(obj.vertices):
            state.comp[v] = k
            state.members[k] = [v]
            state.load[v] = ZERO
            if v == obj.root:
                state.root_comp = k
            else:
                state.charge[v] = ZERO
        return state

    def _discharging(self, state, k):
        """The member currently absorbing component k's growth, or None if k is inactive."""
        if k == state.root_comp:
            return None
        for v in state.members[k]:
            if v not in state.labelled:
                return v
        return None

    def _active(self, state):
        return {k: v for k in state.members if (v := self._discharging(state, k)) is not None}

    def _advance(self, state, until: Fraction):
        delta = until - state.time
        if delta < 0:
            raise AssertionError("moat time went backwards")
        if delta:
            for k, v in self._active(state).items():
                state.charge[v] += delta
                for u in state.members[k]:
                    state.load[u] += delta
        state.time = until

    def _event_time(self, state, v, y) -> Fraction:
        return state.time + max(ZERO, Fraction(y) - state.charge[v])

    def candidates(self, state):
        return sorted(self._active(state).values())

    def marginal(self, state, i, y):
        if i in state.labelled or self._discharging(state, state.comp[i]) != i:
            return ZERO
        return 1 / (1 + self._event_time(state, i, y))

    def select(self, state, i, y):
        self._advance(state, self._event_time(state, i, y))
        state.charge[i] = Fraction(y)
        state.labelled.add(i)
        super().select(state, i, y)

    def internal_step(self, state):
        active = self._active(state)
        best = None
        for u, v, c in state.inst.objective.edges:
            ku, kv = state.comp[u], state.comp[v]
            if ku == kv:
                continue
            rate = (ku in active) + (kv in active)
            if rate == 0:
                continue
            slack = Fraction(c) - state.load[u] - state.load[v]
            t = state.time + max(ZERO, slack) / rate
            if best is None or t < best[0]:
                best = (t, (u, v, c))
        if best is None:
            return None
        t, edge = best
        return 1 / (1 + t), (t, edge)

    def apply_internal(self, state, token):
        t, (u, v, c) = token
        self._advance(state, t)
        ku, kv = state.comp[u], state.comp[v]
        keep, gone = min(ku, kv), max(ku, kv)
        if state.root_comp in (ku, kv):
            keep, gone = state.root_comp, (kv if ku == state.root_comp else ku)
        for w in state.members.pop(gone):
            state.comp[w] = keep
            state.members[keep].append(w)
        state.members[keep].sort()
        state.forest.append((u, v, c))

    def tree(self, state) -> list[tuple[str, str, float]]:
        """Root component's forest pruned to the root and its unlabelled vertices."""
        root = state.inst.objective.root
        edges = [e for e in state.forest if state.comp[e[0]] == state.root_comp]
        keep = {root} | {v for v in state.members[state.root_comp] if v not in state.labelled}
        while True:
            deg: dict[str, int] = {}
            for u, v, _ in edges:
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1
            leaves = {x for x, d in deg.items() if d == 1 and x not in keep}
            if not leaves:
                return sorted(edges)
            edges = [e for e in edges if e[0] not in leaves and e[1] not in leaves]


def pcst_modified_gw(inst, weights) -> tuple[list[tuple[str, str, float]], frozenset[str]]:
    """Run the labelling moat algorithm on known penalties; returns (tree edges, penalised set)."""
    rule = PcstModifiedGW()
    state = run_engine(rule, inst, FreeInfoView(weights))
    return rule.tree(state), frozenset(state.labelled)
