import itertools
import math

import numpy as np
import pytest

from poi.adaptive import sample_outcome
from poi.frugal import (
    FacilityJMMSV,
    FreeInfoView,
    FvsDegreeWeight,
    GreedyAdditive,
    KnapsackRatio,
    PcstModifiedGW,
    RuleMismatchError,
    SetCoverGreedy,
    SetCoverPrimalDual,
    pcst_modified_gw,
    rule_marginal,
    run_frugal_covering,
    run_frugal_packing,
)
from poi.generate import generate
from poi.model import (
    Direction,
    FVSFeasibility,
    GraphicMatroid,
    Knapsack,
    PCSTFeasibility,
    PCSTPenalty,
    PoiInstance,
    SetCoverFeasibility,
    UniformMatroid,
)
from poi.oracle import optimal_offline
from poi.strategies import harmonic

from conftest import box, pandora


def pcst_instance(edges, penalties):
    verts = sorted(({u for u, _, _ in edges} | {v for _, v, _ in edges}) - {"r"})
    els = tuple(box(v, {penalties[v]: 1}) for v in verts)
    return PoiInstance(els, PCSTFeasibility(direction=Direction.COVERING, root="r", vertices=tuple(verts)),
                       PCSTPenalty(root="r", edges=tuple(edges)))


class TestExamples:
    def test_greedy_rank_one(self):
        inst = pandora(box("a", {0.4: 1}), box("b", {0.8: 1}))
        assert run_frugal_packing(inst, {"a": 0.4, "b": 0.8}, GreedyAdditive()) == {"b"}

    def test_nonpositive_weights_select_nothing(self, triangle_matching):
        w = {"e12": -1.0, "e13": 0.0, "e23": -0.5}
        assert run_frugal_packing(triangle_matching, w, GreedyAdditive()) == frozenset()

    def test_matching_triangle(self, triangle_matching):
        w = {"e12": 3, "e23": 2, "e13": 1}
        assert run_frugal_packing(triangle_matching, w, GreedyAdditive()) == {"e12"}

    def test_setcover_greedy(self, small_setcover):
        w = {"S1": 3, "S2": 1, "S3": 1}
        assert run_frugal_covering(small_setcover, w, SetCoverGreedy()) == {"S2", "S3"}

    def test_setcover_primal_dual(self, small_setcover):
        # element a: S2 goes tight at 1 first; element b: S3 tight at 1 (S1 would need 3 - 1 = 2 more)
        w = {"S1": 3, "S2": 1, "S3": 1}
        assert run_frugal_covering(small_setcover, w, SetCoverPrimalDual()) == {"S2", "S3"}

    def test_basis_on_path(self, path_graph_basis):
        inst = PoiInstance((box("ab", {1: 1}), box("bc", {2: 1})), path_graph_basis)
        assert run_frugal_covering(inst, {"ab": 1, "bc": 2}, GreedyAdditive()) == {"ab", "bc"}

    def test_fvs_triangle(self):
        c = FVSFeasibility(direction=Direction.COVERING, vertices=("u", "v", "w"),
                           graph_edges=(("u", "v"), ("v", "w"), ("u", "w")))
        inst = PoiInstance((box("u", {2: 1}), box("v", {1: 1}), box("w", {3: 1})), c)
        assert run_frugal_covering(inst, {"u": 2, "v": 1, "w": 3}, FvsDegreeWeight()) == {"v"}

    def test_marginals(self, small_setcover):
        inst = pandora(box("a", {0.8: 1}))
        rule = GreedyAdditive()
        assert rule_marginal(rule, rule.start(inst), "a", 0.8) == 0.8
        rule = SetCoverGreedy()
        assert rule_marginal(rule, rule.start(small_setcover), "S1", 3) == pytest.approx(2 / 3)
        kn = PoiInstance((box("i", {3: 1}), box("j", {1: 1})),
                         Knapsack(sizes=(("i", 2.0), ("j", 3.0)), capacity=4.0))
        rule = KnapsackRatio()
        state = rule.start(kn)
        assert rule_marginal(rule, state, "i", 3) == pytest.approx(1.5)
        rule.select(state, "i", 3)
        assert "j" not in set(rule.candidates(state))

    def test_pcst_examples(self):
        tree, penalised = pcst_modified_gw(pcst_instance([("r", "v", 10.0)], {"v": 1}), {"v": 1})
        assert tree == [] and penalised == {"v"}
        tree, penalised = pcst_modified_gw(pcst_instance([("r", "v", 1.0)], {"v": 100}), {"v": 100})
        assert tree == [("r", "v", 1.0)] and penalised == frozenset()
        star = [("r", "a", 1.0), ("r", "b", 2.0), ("r", "c", 3.0)]
        tree, penalised = pcst_modified_gw(pcst_instance(star, dict.fromkeys("abc", 0)), dict.fromkeys("abc", 0))
        assert tree == [] and penalised == {"a", "b", "c"}

    def test_pcst_pair_merges_before_root(self):
        # a and b meet at time 1, then grow together and reach r at 2
        edges = [("a", "b", 2.0), ("r", "a", 6.0)]
        inst = pcst_instance(edges, {"a": 10, "b": 10})
        tree, penalised = pcst_modified_gw(inst, {"a": 10, "b": 10})
        assert penalised == frozenset()
        assert sorted(tree) == [("a", "b", 2.0), ("r", "a", 6.0)]

    def test_facility_single_site(self):
        inst = generate("facility", n=1, seed=0, k=2)
        w = {inst.ids[0]: 5.0}
        assert run_frugal_covering(inst, w, FacilityJMMSV()) == {inst.ids[0]}

    def test_direction_mismatch(self, small_setcover):
        with pytest.raises(RuleMismatchError):
            run_frugal_packing(small_setcover, {"S1": 1, "S2": 1, "S3": 1}, GreedyAdditive())
        with pytest.raises(RuleMismatchError):
            run_frugal_covering(small_setcover, {"S1": 1, "S2": 1, "S3": 1}, FvsDegreeWeight())


RULE_CASES = [
    ("matroid", GreedyAdditive, {}),
    ("matching", GreedyAdditive, {}),
    ("knapsack", KnapsackRatio, {}),
    ("matroid", GreedyAdditive, {"covering": True}),
    ("setcover", SetCoverGreedy, {}),
    ("setcover", SetCoverPrimalDual, {}),
    ("facility", FacilityJMMSV, {"k": 3}),
    ("pcst", PcstModifiedGW, {}),
    ("fvs", FvsDegreeWeight, {}),
]


def realized(inst, seed):
    return sample_outcome(inst, seed, 0)[0]


def run(inst, w, rule):
    if inst.direction is Direction.PACKING:
        return run_frugal_packing(inst, w, rule)
    return run_frugal_covering(inst, w, rule)


@pytest.mark.parametrize("kind,rule_cls,extra", RULE_CASES, ids=[f"{k}-{r.name}" for k, r, _ in RULE_CASES])
class TestRuleContracts:
    def test_output_feasible(self, kind, rule_cls, extra):
        for seed in range(15):
            inst = generate(kind, n=5, seed=seed, **extra)
            out = run(inst, realized(inst, seed), rule_cls())
            assert inst.feasible(out)

    def test_marginal_monotone_in_y(self, kind, rule_cls, extra):
        grid = np.linspace(0, 12, 49)
        for seed in range(8):
            inst = generate(kind, n=5, seed=seed, **extra)
            rule = rule_cls()
            view = FreeInfoView(realized(inst, seed))
            state = rule.start(inst)
            # walk the run, checking every candidate at every reached state
            for _ in range(20):
                for i in rule.candidates(state):
                    gs = [rule_marginal(rule, state, i, float(y)) for y in grid]
                    pairs = list(zip(gs, gs[1:]))
                    if inst.direction is Direction.PACKING:
                        assert all(a <= b for a, b in pairs), (i, gs)
                    else:
                        assert all(a >= b for a, b in pairs), (i, gs)
                best = None
                for i in sorted(rule.candidates(state)):
                    g = rule.marginal(state, i, view.weight(i))
                    if g > 0 and (best is None or g > best[0]):
                        best = (g, i)
                internal = rule.internal_step(state)
                if internal is not None and internal[0] > 0 and (
                        best is None or internal[0] > best[0] or (internal[0] == best[0] and rule.internal_first)):
                    rule.apply_internal(state, internal[1])
                    continue
                if best is None:
                    break
                rule.select(state, best[1], view.weight(best[1]))

    def test_more_attractive_weight_keeps_selection(self, kind, rule_cls, extra):
        for seed in range(10):
            inst = generate(kind, n=5, seed=seed, **extra)
            w = realized(inst, seed)
            out = run(inst, w, rule_cls())
            for i in out:
                w2 = dict(w)
                if inst.direction is Direction.PACKING:
                    w2[i] = w[i] + 1.5
                else:
                    w2[i] = w[i] / 2
                assert i in run(inst, w2, rule_cls())


class TestOfflineQuality:
    def test_greedy_exact_on_matroids(self):
        for seed in range(30):
            inst = generate("matroid", n=6, seed=seed)
            w = realized(inst, seed)
            got = inst.value(run(inst, w, GreedyAdditive()), w)
            # brute force without the matroid shortcut
            best = max(inst.value(s, w) for s in _all_feasible(inst))
            assert got == pytest.approx(best, abs=1e-9)

    @pytest.mark.parametrize("kind,rule_cls,factor", [
        ("matching", GreedyAdditive, lambda inst: 2.0),
        ("setcover", SetCoverGreedy, lambda inst: harmonic(len(inst.constraint.universe))),
        ("setcover", SetCoverPrimalDual, lambda inst: inst.constraint.frequency()),
        ("facility", FacilityJMMSV, lambda inst: 1.861),
        ("pcst", PcstModifiedGW, lambda inst: 3.0),
        ("fvs", FvsDegreeWeight, lambda inst: max(2 * math.log(len(inst.ids)), 1.0)),
    ])
    def test_factor(self, kind, rule_cls, factor):
        for seed in range(25):
            inst = generate(kind, n=5, seed=seed, k=3)
            w = realized(inst, seed)
            got = inst.value(run(inst, w, rule_cls()), w)
            best = inst.value(optimal_offline(inst, w), w)
            alpha = factor(inst)
            if inst.direction is Direction.PACKING:
                assert got * alpha >= best - 1e-7 * abs(best)
            else:
                assert got <= alpha * best + 1e-7 * abs(best)


def _all_feasible(inst):
    ids = inst.ids
    for r in range(len(ids) + 1):
        for c in itertools.combinations(ids, r):
            if inst.feasible(c):
                yield frozenset(c)


def test_knapsack_rule_needs_knapsack():
    inst = PoiInstance((box("a", {1: 1}),), UniformMatroid(rank=1))
    with pytest.raises(RuleMismatchError):
        run_frugal_packing(inst, {"a": 1}, KnapsackRatio())


def test_setcover_rule_needs_setcover():
    inst = PoiInstance((box("a", {1: 1}),),
                       GraphicMatroid(direction=Direction.COVERING, edges=(("a", "u", "v"),)))
    with pytest.raises(RuleMismatchError):
        run_frugal_covering(inst, {"a": 1}, SetCoverGreedy())


def test_setcover_fixture_frequency():
    c = SetCoverFeasibility(direction=Direction.COVERING, universe=("a", "b"),
                            members=(("S1", frozenset("ab")), ("S2", frozenset("a"))))
    assert c.frequency() == 2
