"""Frugal algorithms: marginal-value rules and the shared selection loop."""

from .engine import (
    UNSET,
    FreeInfoView,
    FrugalRule,
    PartialWeights,
    RuleMismatchError,
    RuleState,
    rule_marginal,
    run_engine,
    run_frugal_covering,
    run_frugal_packing,
)
from .facility import FacilityJMMSV
from .pcst import PcstModifiedGW, pcst_modified_gw
from .rules import FvsDegreeWeight, GreedyAdditive, KnapsackRatio, SetCoverGreedy, SetCoverPrimalDual

RULES: dict[str, type[FrugalRule]] = {
    cls.name: cls
    for cls in (GreedyAdditive, KnapsackRatio, SetCoverGreedy, SetCoverPrimalDual, FacilityJMMSV,
                PcstModifiedGW, FvsDegreeWeight)
}


def get_rule(name: str) -> FrugalRule:
    try:
        return RULES[name]()
    except KeyError:
        raise KeyError(f"unknown rule {name!r}; known: {', '.join(sorted(RULES))}") from None


__all__ = [
    "UNSET", "FreeInfoView", "FrugalRule", "PartialWeights", "RuleMismatchError", "RuleState", "RULES",
    "get_rule", "rule_marginal", "run_engine", "run_frugal_covering", "run_frugal_packing", "pcst_modified_gw",
    "FacilityJMMSV", "PcstModifiedGW", "FvsDegreeWeight", "GreedyAdditive", "KnapsackRatio", "SetCoverGreedy",
    "SetCoverPrimalDual",
]
