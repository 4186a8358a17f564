"""Strategy names used by the command line and the comparison report."""

from __future__ import annotations

import math

from .adaptive import FrugalStrategy, KnapsackMixture, NaiveGreedy, Strategy
from .constrained import ConstrainedPipeline, SetProbingPipeline, WeitzmanPolicy
from .frugal import RULES
from .model import (
    Direction,
    FacilityLocation,
    GraphicMatroid,
    MatchingSystem,
    PartitionMatroid,
    PCSTPenalty,
    PoiInstance,
    SetCoverFeasibility,
    UniformMatroid,
    matroid_rank_bound,
    system_ratio,
)


def strategy_names() -> list[str]:
    return sorted([f"frugal:{r}" for r in RULES] + ["knapsack-mixture", "naive-greedy", "weitzman",
                                                     "pipeline:constrained", "pipeline:set-probing"])


def get_strategy(name: str) -> Strategy:
    if name.startswith("frugal:") and name[len("frugal:"):] in RULES:
        return FrugalStrategy(RULES[name[len("frugal:"):]]())
    fixed = {
        "knapsack-mixture": KnapsackMixture,
        "naive-greedy": NaiveGreedy,
        "weitzman": WeitzmanPolicy,
        "pipeline:constrained": ConstrainedPipeline,
        "pipeline:set-probing": SetProbingPipeline,
    }
    if name not in fixed:
        raise KeyError(f"unknown strategy {name!r}; known: {', '.join(strategy_names())}")
    return fixed[name]()


def harmonic(n: int) -> float:
    return math.fsum(1.0 / k for k in range(1, n + 1))


def guarantee(inst: PoiInstance, strategy: Strategy) -> float | None:
    """Approximation factor promised for this strategy on this instance, if any.

    The naive Pandora greedy has none.
    """
    name = strategy.name
    c = inst.constraint
    if name == "naive-greedy":
        return None
    if name in ("weitzman",):
        return 1.0
    if name == "knapsack-mixture":
        return 2.0
    if name == "pipeline:constrained":
        ell = matroid_rank_bound(inst.probing_constraint)
        if ell is None:
            ell = system_ratio(inst.probing_constraint, inst.ids)
        return 3.0 * (ell + 1)
    if name == "pipeline:set-probing":
        return 3.0 * (inst.set_probing.ell + 1)
    rule = name[len("frugal:"):]
    if rule == "greedy-additive":
        if isinstance(c, (UniformMatroid, PartitionMatroid, GraphicMatroid)):
            return 1.0
        if isinstance(c, MatchingSystem):
            return 2.0
        if inst.direction is Direction.PACKING and len(inst.ids) <= 14:
            k = system_ratio(c, inst.ids)
            return k if math.isfinite(k) else None
        return None
    if rule == "setcover-greedy" and isinstance(c, SetCoverFeasibility):
        return harmonic(len(c.universe))
    if rule == "setcover-primal-dual" and isinstance(c, SetCoverFeasibility):
        return float(c.frequency())
    if rule == "facility-jmmsv" and isinstance(inst.objective, FacilityLocation):
        return 1.861
    if rule == "pcst-gw" and isinstance(inst.objective, PCSTPenalty):
        return 3.0
    if rule == "fvs-degree":
        # empirical sanity bound for the O(log n) guarantee
        return max(2.0 * math.log(len(inst.ids)), 1.0)
    return None
