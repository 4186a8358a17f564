"""Adaptive strategies in the priced-information world.

A Frugal rule becomes an adaptive strategy by running it on grades for
unprobed elements (see ``frugal.engine``).  This module records what the
strategy probes and selects, evaluates it exactly by branching on probe
answers, and estimates it by seeded Monte Carlo.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .dist import expected_excess
from .frugal import FrugalRule, GreedyAdditive, KnapsackRatio, RuleMismatchError, run_engine
from .frugal import run_frugal_covering, run_frugal_packing
from .model import Additive, CapExceededError, Direction, Knapsack, PoiInstance, UniformMatroid, outcome_space

DEFAULT_MAX_LEAVES = 1_000_000


@dataclass(frozen=True)
class Probe:
    id: str
    value: float
    price: float


@dataclass(frozen=True)
class Select:
    id: str


@dataclass
class StrategyTrace:
    direction: Direction
    steps: list = field(default_factory=list)
    final_selected: frozenset[str] = frozenset()
    utility: float = 0.0

    @property
    def probed(self) -> list[str]:
        return [s.id for s in self.steps if isinstance(s, Probe)]

    @property
    def selections(self) -> list[str]:
        return [s.id for s in self.steps if isinstance(s, Select)]

    @property
    def probe_cost(self) -> float:
        return math.fsum(s.price for s in self.steps if isinstance(s, Probe))


def settle(inst: PoiInstance, trace: StrategyTrace) -> StrategyTrace:
    """Fill in the trace's utility (disutility for covering) from its steps."""
    values = {s.id: s.value for s in trace.steps if isinstance(s, Probe)}
    trace.final_selected = frozenset(trace.selections)
    val = inst.value(trace.final_selected, values)
    trace.utility = val - trace.probe_cost if trace.direction is Direction.PACKING else val + trace.probe_cost
    return trace


class ProbingView:
    """Grades stand in for unprobed elements; probing reveals the surrogate."""

    def __init__(self, inst: PoiInstance, outcome: Mapping[str, float], trace: StrategyTrace):
        self.packing = inst.direction is Direction.PACKING
        self.elements = inst.by_id()
        self.proxy = {e.id: (e.tau_max if self.packing else e.tau_min) for e in inst.elements}
        self.outcome = outcome
        self.trace = trace
        self.revealed: dict[str, float] = {}

    def weight(self, i):
        return self.revealed.get(i, self.proxy[i])

    def resolve(self, i) -> bool:
        if i in self.revealed:
            return True
        x = self.outcome[i]
        tau = self.proxy[i]
        self.trace.steps.append(Probe(i, x, self.elements[i].price))
        # the surrogate equals the grade exactly when the gate passes
        passed = x >= tau if self.packing else x <= tau
        self.revealed[i] = tau if passed else x
        return passed

    def on_select(self, i):
        self.trace.steps.append(Select(i))


def run_poi(inst: PoiInstance, rule: FrugalRule, outcome: Mapping[str, float]) -> StrategyTrace:
    trace = StrategyTrace(inst.direction)
    run_engine(rule, inst, ProbingView(inst, outcome, trace))
    return settle(inst, trace)


def run_poi_packing(inst: PoiInstance, rule: FrugalRule, outcome: Mapping[str, float]) -> StrategyTrace:
    if inst.direction is not Direction.PACKING:
        raise RuleMismatchError("run_poi_packing needs a packing instance")
    return run_poi(inst, rule, outcome)


def run_poi_covering(inst: PoiInstance, rule: FrugalRule, outcome: Mapping[str, float]) -> StrategyTrace:
    if inst.direction is not Direction.COVERING:
        raise RuleMismatchError("run_poi_covering needs a covering instance")
    trace = run_poi(inst, rule, outcome)
    if not inst.feasible(trace.final_selected):
        raise RuleMismatchError(f"rule {rule.name} ended without a feasible cover")
    return trace


def surrogate_outcome(inst: PoiInstance, outcome: Mapping[str, float]) -> dict[str, float]:
    """Realised surrogates: X clipped at tau_max (packing) or lifted to tau_min (covering)."""
    if inst.direction is Direction.PACKING:
        return {e.id: min(outcome[e.id], e.tau_max) for e in inst.elements}
    return {e.id: max(outcome[e.id], e.tau_min) for e in inst.elements}


def run_free_info(inst: PoiInstance, rule: FrugalRule, weights: Mapping[str, float]) -> frozenset[str]:
    if inst.direction is Direction.PACKING:
        return run_frugal_packing(inst, weights, rule)
    return run_frugal_covering(inst, weights, rule)


# --------------------------------------------------------------------------
# strategies


class Strategy:
    """An adaptive policy: reads ``outcome[i]`` only when it probes ``i``."""

    name = ""
    directions: tuple[Direction, ...] = (Direction.PACKING, Direction.COVERING)

    def check(self, inst: PoiInstance) -> None:
        if inst.direction not in self.directions:
            raise RuleMismatchError(f"strategy {self.name} does not support {inst.direction.value} instances")

    def run(self, inst: PoiInstance, outcome: Mapping[str, float], coin: float = 0.0) -> StrategyTrace:
        raise NotImplementedError

    def exact(self, inst: PoiInstance, max_leaves: int = DEFAULT_MAX_LEAVES) -> float:
        return exact_expected_utility(inst, self, max_leaves)


class FrugalStrategy(Strategy):
    def __init__(self, rule: FrugalRule):
        self.rule = rule
        self.name = f"frugal:{rule.name}"
        self.directions = rule.directions

    def check(self, inst):
        super().check(inst)
        self.rule.check(inst)

    def run(self, inst, outcome, coin=0.0):
        if inst.direction is Direction.PACKING:
            return run_poi_packing(inst, self.rule, outcome)
        return run_poi_covering(inst, self.rule, outcome)


def pandora_view(inst: PoiInstance) -> PoiInstance:
    """Same items under "keep at most one" (every item fits alone)."""
    return inst.restricted(inst.ids, constraint=UniformMatroid(rank=1))


class KnapsackMixture(Strategy):
    """Density greedy or single best item, each with probability one half."""

    name = "knapsack-mixture"
    directions = (Direction.PACKING,)

    def check(self, inst):
        super().check(inst)
        if not isinstance(inst.constraint, Knapsack) or not isinstance(inst.objective, Additive):
            raise RuleMismatchError("knapsack-mixture needs an additive knapsack instance")

    def run(self, inst, outcome, coin=0.0):
        if coin < 0.5:
            return run_poi_packing(inst, KnapsackRatio(), outcome)
        trace = run_poi_packing(pandora_view(inst), GreedyAdditive(), outcome)
        return settle(inst, trace)

    def exact(self, inst, max_leaves=DEFAULT_MAX_LEAVES):
        greedy = exact_expected_utility(inst, FrugalStrategy(KnapsackRatio()), max_leaves)
        single = exact_expected_utility(pandora_view(inst), FrugalStrategy(GreedyAdditive()), max_leaves)
        return 0.5 * greedy + 0.5 * single


def _check_pandora(inst: PoiInstance, what: str) -> None:
    c = inst.constraint
    if (inst.direction is not Direction.PACKING or not isinstance(c, UniformMatroid) or c.rank != 1
            or not isinstance(inst.objective, Additive)):
        raise RuleMismatchError(f"{what} needs a rank-1 additive packing instance")


def naive_greedy_pandora(inst: PoiInstance, outcome: Mapping[str, float]) -> StrategyTrace:
    """Open the box with the largest E[(X - best)^+] - price while that is positive."""
    _check_pandora(inst, "naive greedy")
    trace = StrategyTrace(Direction.PACKING)
    opened: dict[str, float] = {}
    while True:
        best = max(opened.values(), default=0.0)
        cur = max(best, 0.0)
        pick = None
        pick_gain = 0.0
        for e in inst.elements:
            if e.id in opened:
                continue
            gain = expected_excess(e.dist, cur) - e.price
            if gain > pick_gain:
                pick, pick_gain = e, gain
        if pick is None:
            break
        opened[pick.id] = outcome[pick.id]
        trace.steps.append(Probe(pick.id, opened[pick.id], pick.price))
    if opened:
        top = max(opened.values())
        if top > 0:
            trace.steps.append(Select(min(i for i, v in opened.items() if v == top)))
    return settle(inst, trace)


class NaiveGreedy(Strategy):
    name = "naive-greedy"
    directions = (Direction.PACKING,)

    def check(self, inst):
        super().check(inst)
        _check_pandora(inst, self.name)

    def run(self, inst, outcome, coin=0.0):
        return naive_greedy_pandora(inst, outcome)


# --------------------------------------------------------------------------
# exact evaluation


class _Unrevealed(Exception):
    def __init__(self, key):
        self.key = key


class _LazyOutcome(Mapping):
    def __init__(self, known):
        self.known = known

    def __getitem__(self, key):
        try:
            return self.known[key]
        except KeyError:
            raise _Unrevealed(key) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self.known)

    def __len__(self):
        return len(self.known)


def exact_expected_utility(inst: PoiInstance, strategy, max_leaves: int = DEFAULT_MAX_LEAVES) -> float:
    """Exact expectation of the strategy's utility (disutility when covering).

    Only the answers the strategy actually asks for are branched on, so the
    work is the size of its decision tree rather than the full outcome space.
    A FrugalRule is accepted in place of a strategy.
    """
    if isinstance(strategy, FrugalRule):
        strategy = FrugalStrategy(strategy)
    strategy.check(inst)
    if type(strategy).exact is not Strategy.exact and not isinstance(strategy, FrugalStrategy):
        # strategies with their own closed form (mixtures) are evaluated by it
        return strategy.exact(inst, max_leaves)
    els = inst.by_id()
    terms: list[float] = []
    stack: list[tuple[dict, float]] = [({}, 1.0)]
    while stack:
        known, p = stack.pop()
        try:
            trace = strategy.run(inst, _LazyOutcome(known))
        except _Unrevealed as need:
            d = els[need.key].dist
            for v, q in zip(reversed(d.support), reversed(d.probs)):
                stack.append(({**known, need.key: v}, p * q))
            continue
        terms.append(p * trace.utility)
        if len(terms) > max_leaves:
            raise CapExceededError(f"strategy decision tree has more than {max_leaves} leaves")
    return math.fsum(terms)


def brute_force_expected_utility(inst: PoiInstance, strategy, max_outcomes: int = DEFAULT_MAX_LEAVES) -> float:
    """Same expectation by running on every full outcome vector."""
    if isinstance(strategy, FrugalRule):
        strategy = FrugalStrategy(strategy)
    strategy.check(inst)
    if inst.support_product() > max_outcomes:
        raise CapExceededError(f"outcome space exceeds {max_outcomes}")
    return math.fsum(p * strategy.run(inst, outcome).utility for p, outcome in outcome_space(inst))


def free_info_frugal_value(inst: PoiInstance, rule: FrugalRule, max_outcomes: int = DEFAULT_MAX_LEAVES) -> float:
    """E over outcomes of val(Alg(Y), Y) with Y the realised surrogates."""
    rule.check(inst)
    if inst.support_product() > max_outcomes:
        raise CapExceededError(f"outcome space exceeds {max_outcomes}")
    terms = []
    for p, outcome in outcome_space(inst):
        y = surrogate_outcome(inst, outcome)
        terms.append(p * inst.value(run_free_info(inst, rule, y), y))
    return math.fsum(terms)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class TrialResult:
    trial: int
    utility: float
    probes: int
    selections: tuple[str, ...]


@dataclass
class SimulationReport:
    strategy: str
    trials: int
    seed: int
    mean_utility: float
    stderr: float
    rows: list[TrialResult] | None = None


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial; independent of every other trial."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


def sample_outcome(inst: PoiInstance, seed: int, trial: int) -> tuple[dict[str, float], float]:
    """Outcome vector and mixture coin for one trial (inverse-CDF draws)."""
    u = trial_generator(seed, trial).random(len(inst.elements) + 1)
    outcome = {e.id: e.dist.support[e.dist.quantile_index(u[k])] for k, e in enumerate(inst.elements)}
    return outcome, float(u[-1])


def _run_trials(inst, strategy, seed, start, stop) -> list[TrialResult]:
    rows = []
    for t in range(start, stop):
        outcome, coin = sample_outcome(inst, seed, t)
        tr = strategy.run(inst, outcome, coin)
        rows.append(TrialResult(t, tr.utility, len(tr.probed), tuple(tr.selections)))
    return rows


def simulate(inst: PoiInstance, strategy, trials: int, seed: int, workers: int = 1,
             keep_trials: bool = True) -> SimulationReport:
    """Monte-Carlo estimate; identical for any ``workers`` given the seed."""
    if isinstance(strategy, FrugalRule):
        strategy = FrugalStrategy(strategy)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if seed < 0:
        raise ValueError("seed must be >= 0")
    strategy.check(inst)
    if workers <= 1 or trials < 2 * workers:
        rows = _run_trials(inst, strategy, seed, 0, trials)
    else:
        bounds = np.linspace(0, trials, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_trials, inst, strategy, seed, int(a), int(b))
                       for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            rows = [r for f in futures for r in f.result()]
    utilities = np.array([r.utility for r in rows])
    mean = math.fsum(utilities) / trials
    if trials > 1 and utilities.min() != utilities.max():
        stderr = float(np.std(utilities, ddof=1) / math.sqrt(trials))
    else:
        stderr = 0.0
    return SimulationReport(strategy.name, trials, seed, mean, stderr, rows if keep_trials else None)
