"""Marginal-value selection loop shared by every rule and both worlds.

A rule supplies a marginal value g(state, i, y) for each candidate element.
The loop repeatedly takes the candidate with the largest positive g (ties to
the smallest id) and selects it.  Where the weight ``y`` comes from is the
job of a *view*:

* ``FreeInfoView`` knows every weight up front (the surrogate realisation).
* ``ProbingView`` only knows grades until an element is probed.  Its proxy
  for an unprobed element is the grade, which makes g at least as large as
  the true one.  When such an element wins, the view probes it; the element
  is selected right away only if its surrogate equals the grade, otherwise
  the loop re-evaluates with the revealed value.

Because probing never changes rule state, both views walk through the same
selection sequence on the same surrogate realisation.

Some rules also have *internal* steps that select no element (connecting
clients to an already open facility, a moat edge going tight).  Their
priority depends only on the state and competes with the element values.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from ..model import Direction, PoiInstance


class RuleMismatchError(ValueError):
    """The rule cannot run on this instance's direction, constraint or objective."""


class _Unset:
    def __repr__(self):
        return "UNSET"


UNSET = _Unset()


class PartialWeights(Mapping):
    """Weights revealed so far: known for selected elements, ``UNSET`` otherwise."""

    def __init__(self, ids: Iterable[str]):
        self._ids = tuple(ids)
        self._known: dict[str, Any] = {}

    def __getitem__(self, key):
        if key in self._known:
            return self._known[key]
        if key in self._ids:
            return UNSET
        raise KeyError(key)

    def __iter__(self) -> Iterator[str]:
        return iter(self._ids)

    def __len__(self):
        return len(self._ids)

    def set(self, key, value):
        self._known[key] = value

    @property
    def known(self) -> dict[str, Any]:
        return dict(self._known)


@dataclass
class RuleState:
    inst: PoiInstance
    selected: list[str] = field(default_factory=list)
    weights: PartialWeights = None

    def __post_init__(self):
        if self.weights is None:
            self.weights = PartialWeights(self.inst.ids)

    @property
    def chosen(self) -> frozenset[str]:
        return frozenset(self.selected)


class FrugalRule:
    """Base class; subclasses are stateless and keep run state in a RuleState."""

    name = ""
    directions: tuple[Direction, ...] = (Direction.PACKING,)
    # on equal priority, internal steps run before element selections
    internal_first = True

    def check(self, inst: PoiInstance) -> None:
        if inst.direction not in self.directions:
            raise RuleMismatchError(f"rule {self.name} does not support {inst.direction.value} instances")

    def start(self, inst: PoiInstance) -> RuleState:
        return RuleState(inst)

    def candidates(self, state: RuleState) -> Iterable[str]:
        raise NotImplementedError

    def marginal(self, state: RuleState, i: str, y) -> Any:
        raise NotImplementedError

    def select(self, state: RuleState, i: str, y) -> None:
        state.selected.append(i)
        state.weights.set(i, y)

    def internal_step(self, state: RuleState):
        """``(priority, token)`` of the best internal step, or None."""
        return None

    def apply_internal(self, state: RuleState, token) -> None:
        raise NotImplementedError

    def result(self, state: RuleState) -> frozenset[str]:
        return state.chosen


class FreeInfoView:
    """Every weight is visible."""

    def __init__(self, weights: Mapping[str, float]):
        self.weights = weights

    def weight(self, i: str):
        return self.weights[i]

    def resolve(self, i: str) -> bool:
        return True

    def on_select(self, i: str) -> None:
        pass


def rule_marginal(rule: FrugalRule, state: RuleState, i: str, y):
    """The rule's scalar priority g(state, i, y)."""
    return rule.marginal(state, i, y)


def run_engine(rule: FrugalRule, inst: PoiInstance, view) -> RuleState:
    rule.check(inst)
    state = rule.start(inst)
    while True:
        best_g = None
        best_i = None
        for i in sorted(rule.candidates(state)):
            g = rule.marginal(state, i, view.weight(i))
            if g > 0 and (best_g is None or g > best_g):
                best_g, best_i = g, i
        internal = rule.internal_step(state)
        if internal is not None and internal[0] > 0:
            pri, token = internal
            if best_g is None or pri > best_g or (pri == best_g and rule.internal_first):
                rule.apply_internal(state, token)
                continue
        if best_i is None:
            return state
        if view.resolve(best_i):
            rule.select(state, best_i, view.weight(best_i))
            view.on_select(best_i)


def _check_weights(inst: PoiInstance, weights: Mapping[str, float]) -> None:
    missing = set(inst.ids) - set(weights)
    if missing:
        raise ValueError(f"weights missing for {sorted(missing)}")


def run_frugal_packing(inst: PoiInstance, weights: Mapping[str, float], rule: FrugalRule) -> frozenset[str]:
    """Frugal packing algorithm on fully revealed (possibly negative) weights."""
    if inst.direction is not Direction.PACKING:
        raise RuleMismatchError("run_frugal_packing needs a packing instance")
    _check_weights(inst, weights)
    return rule.result(run_engine(rule, inst, FreeInfoView(weights)))


def run_frugal_covering(inst: PoiInstance, weights: Mapping[str, float], rule: FrugalRule) -> frozenset[str]:
    """Frugal covering algorithm on fully revealed nonnegative weights."""
    if inst.direction is not Direction.COVERING:
        raise RuleMismatchError("run_frugal_covering needs a covering instance")
    _check_weights(inst, weights)
    if any(weights[i] < 0 for i in inst.ids):
        raise ValueError("covering weights must be nonnegative")
    state = run_engine(rule, inst, FreeInfoView(weights))
    out = rule.result(state)
    if not inst.feasible(out):
        raise RuleMismatchError(f"rule {rule.name} stopped without a feasible cover")
    return out
