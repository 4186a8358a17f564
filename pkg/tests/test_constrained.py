import itertools

import numpy as np
import pytest

from poi.adaptive import exact_expected_utility
from poi.constrained import (
    ConstrainedPipeline,
    SetProbingPipeline,
    WeitzmanPolicy,
    best_nonadaptive_value,
    constrained_um_pipeline,
    expected_max_surrogate,
    meta_instance,
    nonadaptive_probe_greedy,
    optimal_set_probing_utility,
    set_probing_pipeline,
    set_probing_plan,
)
from poi.dist import expected_value
from poi.frugal import RuleMismatchError
from poi.generate import generate, random_distribution
from poi.model import (
    ExplicitFamily,
    PartitionMatroid,
    PoiInstance,
    ProbeElement,
    ProbeSet,
    SetProbeFamily,
    UniformMatroid,
)
from poi.oracle import optimal_adaptive_utility

from conftest import box, pandora


def with_probing(inst, J):
    return PoiInstance(inst.elements, inst.constraint, probing_constraint=J)


def subsets(ids):
    for r in range(len(ids) + 1):
        yield from (frozenset(c) for c in itertools.combinations(ids, r))


class TestSurrogateFunction:
    @pytest.mark.parametrize("seed", range(8))
    def test_monotone_submodular(self, seed):
        inst = generate("pandora", n=6 if seed < 4 else 5, seed=seed)
        els = inst.by_id()
        f = {s: expected_max_surrogate(els[i] for i in s) for s in subsets(inst.ids)}
        assert f[frozenset()] == 0.0
        for a in f:
            for i in inst.ids:
                if i in a:
                    continue
                gain_a = f[a | {i}] - f[a]
                assert gain_a >= -1e-12
                for b in f:
                    if a <= b and i not in b:
                        assert gain_a >= f[b | {i}] - f[b] - 1e-12

    def test_singleton_is_positive_part_of_surrogate(self):
        e = box("a", {0: 0.5, 4: 0.5}, 1.0)
        # tau_max = 2; Y_max = min(X, 2)
        assert expected_max_surrogate([e]) == pytest.approx(1.0)
        neg = box("b", {0: 0.9, 1: 0.1}, 0.5)
        assert expected_max_surrogate([neg]) == 0.0


class TestWeitzman:
    @pytest.mark.parametrize("seed", range(25))
    def test_optimal_on_pandora(self, seed):
        inst = generate("pandora", n=5, seed=seed)
        got = exact_expected_utility(inst, WeitzmanPolicy())
        assert got == pytest.approx(optimal_adaptive_utility(inst), abs=1e-9)

    def test_equal_grades(self):
        # both grades equal 0.8
        inst = pandora(box("a", {0: 0.5, 1: 0.5}, 0.1), box("b", {0.8: 1.0}), box("c", {0: 0.5, 1: 0.5}, 0.1))
        got = exact_expected_utility(inst, WeitzmanPolicy())
        assert got == pytest.approx(optimal_adaptive_utility(inst), abs=1e-12)

    def test_value_equals_surrogate_on_all_boxes(self):
        for seed in range(10):
            inst = generate("pandora", n=5, seed=seed)
            assert exact_expected_utility(inst, WeitzmanPolicy()) == pytest.approx(
                expected_max_surrogate(inst.elements), abs=1e-12)

    def test_requires_pandora(self, triangle_matching):
        with pytest.raises(RuleMismatchError):
            WeitzmanPolicy().check(triangle_matching)


class TestConstrainedPipeline:
    def test_two_box_one_probe(self, two_box):
        inst = with_probing(two_box, UniformMatroid(rank=1))
        # A and B both score 0.4; the tie goes to the smaller id
        chosen, value = constrained_um_pipeline(inst)
        assert chosen == {"A"}
        assert value == pytest.approx(0.4)

    def test_unlimited_probing(self, two_box):
        everything = ExplicitFamily(sets=tuple(subsets(("A", "B"))), universe=("A", "B"))
        _, value = constrained_um_pipeline(with_probing(two_box, everything))
        assert value == pytest.approx(0.6)

    def test_no_probes_allowed(self, two_box):
        chosen, value = constrained_um_pipeline(with_probing(two_box, UniformMatroid(rank=0)))
        assert chosen == frozenset() and value == 0.0

    @pytest.mark.parametrize("seed", range(15))
    def test_greedy_half_of_exhaustive(self, seed):
        rng = np.random.default_rng(seed)
        inst = generate("pandora", n=6, seed=seed)
        cut = int(rng.integers(1, 6))
        parts = PartitionMatroid(parts=(("p", inst.ids[:cut]), ("q", inst.ids[cut:])),
                                 caps=(("p", int(rng.integers(0, 3))), ("q", int(rng.integers(1, 3)))))
        for J in (UniformMatroid(rank=int(rng.integers(1, 4))), parts):
            els = inst.by_id()
            greedy = expected_max_surrogate(els[i] for i in nonadaptive_probe_greedy(inst, J))
            _, best = best_nonadaptive_value(inst, J)
            assert greedy >= best / 2 - 1e-12

    @pytest.mark.parametrize("seed", range(15))
    def test_pipeline_within_six_of_optimum(self, seed):
        inst = generate("constrained", n=5, seed=seed, k=1 + seed % 3)
        _, value = constrained_um_pipeline(inst)
        assert value >= optimal_adaptive_utility(inst) / 6 - 1e-9
        assert value == pytest.approx(ConstrainedPipeline().exact(inst), abs=1e-12)

    def test_pipeline_probes_only_the_chosen_set(self):
        inst = generate("constrained", n=6, seed=4, k=2)
        chosen = nonadaptive_probe_greedy(inst)
        trace = ConstrainedPipeline().run(inst, {i: 100.0 for i in inst.ids})
        assert {s.id for s in trace.steps if hasattr(s, "price")} <= chosen


def disjoint_setprobe(seed, n=6):
    rng = np.random.default_rng(seed)
    ids = [f"x{k}" for k in range(n)]
    els = tuple(ProbeElement(i, random_distribution(rng, 3), 0.0) for i in ids)
    cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(1, 4)), replace=False).tolist())
    groups = [ids[a:b] for a, b in zip([0] + cuts, cuts + [n])]
    sets = tuple(ProbeSet(f"S{k}", frozenset(g), round(float(rng.uniform(0, 1.5)), 2)) for k, g in enumerate(groups))
    return PoiInstance(els, UniformMatroid(rank=1), set_probing=SetProbeFamily(sets))


class TestSetProbing:
    @pytest.mark.parametrize("seed", range(20))
    def test_disjoint_family_is_pandora_on_groups(self, seed):
        inst = disjoint_setprobe(seed)
        meta = meta_instance(inst, inst.set_probing)
        weitzman = exact_expected_utility(meta, WeitzmanPolicy())
        assert optimal_set_probing_utility(inst) == pytest.approx(weitzman, abs=1e-12)
        assert weitzman == pytest.approx(optimal_adaptive_utility(meta), abs=1e-9)

    def test_one_set_covering_everything(self):
        rng = np.random.default_rng(3)
        els = tuple(ProbeElement(f"x{k}", random_distribution(rng, 3), 0.0) for k in range(4))
        fam = SetProbeFamily((ProbeSet("all", frozenset(e.id for e in els), 0.3),))
        inst = PoiInstance(els, UniformMatroid(rank=1), set_probing=fam)
        meta = meta_instance(inst, fam)
        want = expected_max_surrogate(meta.elements)
        assert want > 0
        plan, value = set_probing_pipeline(inst)
        assert plan == ("all",)
        assert value == pytest.approx(want, abs=1e-12)

    def test_dominated_set_never_chosen(self):
        els = (box("x", {0: 0.5, 2: 0.5}), box("y", {0: 0.5, 3: 0.5}))
        fam = SetProbeFamily((ProbeSet("big", frozenset("xy"), 0.2), ProbeSet("small", frozenset("x"), 0.5)))
        inst = PoiInstance(els, UniformMatroid(rank=1), set_probing=fam)
        assert "small" not in set_probing_plan(inst)

    @pytest.mark.parametrize("seed", range(20))
    def test_optimum_dominates_pipeline(self, seed):
        inst = generate("setprobe", n=5, seed=seed, k=3)
        plan, value = set_probing_pipeline(inst)
        opt = optimal_set_probing_utility(inst)
        assert value <= opt + 1e-9
        ell = inst.set_probing.ell
        assert value >= opt / (3 * (ell + 1)) - 1e-9
        # the plan's groups never overlap
        members = inst.set_probing.by_id()
        seen = set()
        for sid in plan:
            assert not seen & members[sid].members
            seen |= members[sid].members

    def test_pipeline_strategy_matches_function(self):
        inst = generate("setprobe", n=5, seed=2, k=2)
        assert SetProbingPipeline().exact(inst) == pytest.approx(set_probing_pipeline(inst)[1], abs=1e-12)

    def test_meta_value_is_member_maximum(self):
        inst = generate("setprobe", n=4, seed=1, k=3)
        meta = meta_instance(inst, inst.set_probing)
        els = inst.by_id()
        for m, s in zip(meta.elements, inst.set_probing.sets):
            if len(s.members) == 1:
                (only,) = s.members
                assert expected_value(m.dist) == pytest.approx(expected_value(els[only].dist))
            assert m.dist.support[-1] == max(els[i].dist.support[-1] for i in s.members)
