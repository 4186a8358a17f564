"""Star greedy for uncapacitated facility location.

Each step picks the star (facility, set of unconnected clients) with the
smallest cost per client; opening cost is the facility's weight, or zero
once it is open.  For a fixed facility the best star is always a prefix of
the clients sorted by distance, so only |clients| stars per facility are
examined.  Opening a closed facility is an element selection with
g = 1 / (cost per client); connecting clients to an open one is an internal
step of the same priority.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..model import Direction, FacilityLocation, UniformMatroid
from .engine import FrugalRule, RuleMismatchError, RuleState


@dataclass
class _FacilityState(RuleState):
    open: list[str] = field(default_factory=list)
    remaining: set[str] = field(default_factory=set)
    # facility -> clients it was assigned when its star was taken
    assignment: dict[str, list[str]] = field(default_factory=dict)


class FacilityJMMSV(FrugalRule):
    name = "facility-jmmsv"
    directions = (Direction.COVERING,)
    internal_first = True

    def check(self, inst):
        super().check(inst)
        if not isinstance(inst.objective, FacilityLocation):
            raise RuleMismatchError("facility-jmmsv needs a facility location objective")
        if not isinstance(inst.constraint, UniformMatroid) or inst.constraint.rank != 1:
            raise RuleMismatchError("facility-jmmsv needs the 'at least one open facility' constraint")
        if not inst.objective.clients:
            raise RuleMismatchError("facility location instance has no clients")

    def start(self, inst):
        return _FacilityState(inst, remaining=set(inst.objective.clients))

    def best_star(self, state, facility: str, cost: float):
        """(cost per client, clients) of the cheapest star at ``facility``."""
        obj = state.inst.objective
        order = sorted(state.remaining, key=lambda c: (obj.d(facility, c), c))
        best = None
        total = cost
        for k, c in enumerate(order, 1):
            total += obj.d(facility, c)
            ratio = total / k
            # ties prefer the bigger star
            if best is None or ratio <= best[0]:
                best = (ratio, order[:k])
        return best

    def candidates(self, state):
        if not state.remaining:
            return []
        opened = set(state.open)
        return [i for i in state.inst.ids if i not in opened]

    def marginal(self, state, i, y):
        if not state.remaining or i in state.open:
            return 0.0
        ratio, _ = self.best_star(state, i, y)
        return math.inf if ratio == 0 else 1.0 / ratio

    def select(self, state, i, y):
        _, clients = self.best_star(state, i, y)
        super().select(state, i, y)
        state.open.append(i)
        self._connect(state, i, clients)

    def _connect(self, state, facility, clients):
        state.assignment.setdefault(facility, []).extend(clients)
        state.remaining.difference_update(clients)

    def internal_step(self, state):
        if not state.remaining or not state.open:
            return None
        best = None
        for f in sorted(state.open):
            ratio, clients = self.best_star(state, f, 0.0)
            if best is None or ratio < best[0]:
                best = (ratio, f, clients)
        ratio, f, clients = best
        return (math.inf if ratio == 0 else 1.0 / ratio), (f, clients)

    def apply_internal(self, state, token):
        f, clients = token
        self._connect(state, f, clients)
