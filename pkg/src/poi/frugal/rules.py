"""Greedy and primal-dual rules with closed-form marginal values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..model import (
    Additive,
    Direction,
    FVSFeasibility,
    GraphicMatroid,
    Knapsack,
    PartitionMatroid,
    SetCoverFeasibility,
    UniformMatroid,
    is_independent,
)
from .engine import FrugalRule, RuleMismatchError, RuleState

INF = math.inf


def _reciprocal(y):
    return INF if y == 0 else 1.0 / y


def _need_additive(rule, inst):
    if not isinstance(inst.objective, Additive):
        raise RuleMismatchError(f"rule {rule.name} needs an additive objective")


class GreedyAdditive(FrugalRule):
    """Largest weight first (packing, g = y) or cheapest first (matroid basis, g = 1/y)."""

    name = "greedy-additive"
    directions = (Direction.PACKING, Direction.COVERING)

    def check(self, inst):
        super().check(inst)
        _need_additive(self, inst)
        if inst.direction is Direction.COVERING and not isinstance(
                inst.constraint, (UniformMatroid, PartitionMatroid, GraphicMatroid)):
            raise RuleMismatchError("covering greedy-additive needs a matroid basis constraint")

    def candidates(self, state):
        c = state.inst.constraint
        chosen = state.chosen
        for i in state.inst.ids:
            if i in chosen:
                continue
            s = chosen | {i}
            ok = is_independent(c, s) if c.direction is Direction.PACKING else c._independent(c.check_ids(s))
            if ok:
                yield i

    def marginal(self, state, i, y):
        if state.inst.direction is Direction.PACKING:
            return y
        return _reciprocal(y)


class KnapsackRatio(FrugalRule):
    """Value density y / size among items that still fit."""

    name = "knapsack-ratio"

    def check(self, inst):
        super().check(inst)
        _need_additive(self, inst)
        if not isinstance(inst.constraint, Knapsack):
            raise RuleMismatchError("knapsack-ratio needs a knapsack constraint")

    def _residual(self, state):
        c = state.inst.constraint
        return c.capacity - math.fsum(c.size(e) for e in state.selected)

    def candidates(self, state):
        c = state.inst.constraint
        room = self._residual(state) + 1e-12
        chosen = state.chosen
        return [i for i in state.inst.ids if i not in chosen and c.size(i) <= room]

    def marginal(self, state, i, y):
        c = state.inst.constraint
        if i in state.chosen or c.size(i) > self._residual(state) + 1e-12:
            return 0.0
        return y / c.size(i)


class SetCoverGreedy(FrugalRule):
    """Newly covered ground items per unit weight."""

    name = "setcover-greedy"
    directions = (Direction.COVERING,)

    def check(self, inst):
        super().check(inst)
        _need_additive(self, inst)
        if not isinstance(inst.constraint, SetCoverFeasibility):
            raise RuleMismatchError("setcover-greedy needs a set cover constraint")

    def _new(self, state, i):
        c = state.inst.constraint
        return len(c.covered([i]) - c.covered(state.selected))

    def candidates(self, state):
        chosen = state.chosen
        return [i for i in state.inst.ids if i not in chosen and self._new(state, i) > 0]

    def marginal(self, state, i, y):
        new = self._new(state, i)
        if new == 0:
            return 0.0
        return INF if y == 0 else new / y


@dataclass
class _DualState(RuleState):
    duals: dict[str, Fraction] = field(default_factory=dict)


class SetCoverPrimalDual(FrugalRule):
    """Raise the dual of the first uncovered ground item until a set goes tight.

    Ground items are taken in lexicographic order and there is no reverse
    deletion.  The marginal value of a set containing the current item is
    1 / (its slack), so the set that goes tight first wins; an already
    tight set has infinite value, which selects every tight set.
    """

    name = "setcover-primal-dual"
    directions = (Direction.COVERING,)

    def check(self, inst):
        super().check(inst)
        _need_additive(self, inst)
        if not isinstance(inst.constraint, SetCoverFeasibility):
            raise RuleMismatchError("setcover-primal-dual needs a set cover constraint")

    def start(self, inst):
        return _DualState(inst, duals={x: Fraction(0) for x in inst.constraint.universe})

    def current(self, state) -> str | None:
        covered = state.inst.constraint.covered(state.selected)
        for x in state.inst.constraint.universe:
            if x not in covered:
                return x
        return None

    def _slack(self, state, i, y) -> Fraction:
        members = dict(state.inst.constraint.members)[i]
        return Fraction(y) - sum((state.duals[x] for x in members), Fraction(0))

    def candidates(self, state):
        chosen = state.chosen
        return [i for i in state.inst.ids if i not in chosen]

    def marginal(self, state, i, y):
        slack = self._slack(state, i, y)
        if slack <= 0:
            return INF
        cur = self.current(state)
        if cur is not None and cur in dict(state.inst.constraint.members)[i]:
            return 1 / slack
        return 0.0

    def select(self, state, i, y):
        slack = self._slack(state, i, y)
        cur = self.current(state)
        if slack > 0 and cur is not None:
            state.duals[cur] += slack
        super().select(state, i, y)


@dataclass
class _FvsState(RuleState):
    alive: set[str] = field(default_factory=set)
    adj: dict[str, set[str]] = field(default_factory=dict)


class FvsDegreeWeight(FrugalRule):
    """Prune vertices of degree at most one, then take the best degree / weight."""

    name = "fvs-degree"
    directions = (Direction.COVERING,)

    def check(self, inst):
        super().check(inst)
        _need_additive(self, inst)
        if not isinstance(inst.constraint, FVSFeasibility):
            raise RuleMismatchError("fvs-degree needs a feedback vertex set constraint")

    def start(self, inst):
        c = inst.constraint
        adj = {v: set() for v in c.vertices}
        for u, v in c.graph_edges:
            adj[u].add(v)
            adj[v].add(u)
        state = _FvsState(inst, alive=set(c.vertices), adj=adj)
        self._prune(state)
        return state

    def _degree(self, state, v):
        return len(state.adj[v] & state.alive)

    def _prune(self, state):
        changed = True
        while changed:
            changed = False
            for v in sorted(state.alive):
                if self._degree(state, v) <= 1:
                    state.alive.discard(v)
                    changed = True

    def candidates(self, state):
        return sorted(state.alive)

    def marginal(self, state, i, y):
        if i not in state.alive:
            return 0.0
        d = self._degree(state, i)
        return INF if y == 0 else d / y

    def select(self, state, i, y):
        super().select(state, i, y)
        state.alive.discard(i)
        self._prune(state)
