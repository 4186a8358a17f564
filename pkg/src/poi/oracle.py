"""Exact ground truth for small instances.

* optimal adaptive strategies by dynamic programming over probe states,
* the surrogate (free-information) bounds on them,
* exact offline optima for fixed weights.

The DP state records, for each element, either "unprobed" or the index of
its realised atom, so state identity never depends on float comparisons.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .frugal import GreedyAdditive, run_frugal_covering, run_frugal_packing
from .model import (
    Additive,
    CapExceededError,
    Direction,
    GraphicMatroid,
    PartitionMatroid,
    PoiInstance,
    UniformMatroid,
    is_feasible,
    is_independent,
)

DEFAULT_MAX_STATES = 2_000_000
MAX_ENUM_ELEMENTS = 20


def default_max_states() -> int:
    raw = os.environ.get("POI_MAX_STATES")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"POI_MAX_STATES must be an integer, got {raw!r}") from None
        if value < 1:
            raise ValueError("POI_MAX_STATES must be positive")
        return value
    return DEFAULT_MAX_STATES


def _cap(max_states: int | None) -> int:
    return default_max_states() if max_states is None else int(max_states)


def _mask_ids(ids, mask) -> frozenset[str]:
    return frozenset(ids[k] for k in range(len(ids)) if mask >> k & 1)


def feasible_masks(inst: PoiInstance) -> np.ndarray:
    """Boolean vector over all 2^n subsets (bit k = k-th element by id)."""
    return _feasible_masks_cached(inst)


@lru_cache(maxsize=64)
def _feasible_masks_cached(inst: PoiInstance) -> np.ndarray:
    ids = inst.ids
    n = len(ids)
    if n > MAX_ENUM_ELEMENTS:
        raise CapExceededError(f"subset enumeration limited to {MAX_ENUM_ELEMENTS} elements")
    out = np.zeros(1 << n, dtype=bool)
    for mask in range(1 << n):
        out[mask] = is_feasible(inst.constraint, _mask_ids(ids, mask))
    out.setflags(write=False)
    return out


def allowed_probe_masks(inst: PoiInstance) -> np.ndarray:
    """Which sets may be the probed set (all, unless a probing constraint is given)."""
    n = len(inst.ids)
    if inst.probing_constraint is None:
        return np.ones(1 << n, dtype=np.uint8)
    ids = inst.ids
    return np.array([is_independent(inst.probing_constraint, _mask_ids(ids, m)) for m in range(1 << n)],
                    dtype=np.uint8)


def _h_terms(inst: PoiInstance, sign: float) -> np.ndarray:
    ids = inst.ids
    feas = feasible_masks(inst)
    terms = np.full(len(feas), -np.inf)
    for mask in np.flatnonzero(feas):
        terms[mask] = sign * inst.objective.h(_mask_ids(ids, int(mask)))
    return terms


def dp_state_count(inst: PoiInstance) -> int:
    return math.prod(len(e.dist) + 1 for e in inst.elements)


def _is_pandora(inst: PoiInstance) -> bool:
    c = inst.constraint
    return isinstance(c, UniformMatroid) and c.rank == 1 and isinstance(inst.objective, Additive)


def _pandora_dp(inst: PoiInstance, cap: int) -> float:
    grid = sorted({0.0} | {v for e in inst.elements for v in e.dist.support if v > 0})
    n = len(inst.elements)
    if (1 << n) * len(grid) > cap:
        raise CapExceededError(f"probe DP needs {(1 << n) * len(grid)} states; cap is {cap}")
    pos = {v: k for k, v in enumerate(grid)}
    width = max(len(e.dist) for e in inst.elements)
    atom_idx = np.zeros((n, width), dtype=np.int64)
    probs = np.zeros((n, width))
    for i, e in enumerate(inst.elements):
        for k, (v, p) in enumerate(zip(e.dist.support, e.dist.probs)):
            atom_idx[i, k] = pos.get(v, 0)
            probs[i, k] = p
    sizes = np.array([len(e.dist) for e in inst.elements], dtype=np.int64)
    prices = np.array([e.price for e in inst.elements])
    return float(kernels.max_probe_dp(atom_idx, probs, sizes, prices, allowed_probe_masks(inst),
                                      np.array(grid)))


def _general_dp(inst: PoiInstance, sign: float, cap: int) -> float:
    states = dp_state_count(inst)
    if states > cap:
        raise CapExceededError(f"adaptive DP needs {states} states; cap is {cap}")
    n = len(inst.elements)
    width = max(len(e.dist) for e in inst.elements)
    values = np.zeros((n, width))
    probs = np.zeros((n, width))
    for i, e in enumerate(inst.elements):
        values[i, :len(e.dist)] = [sign * v for v in e.dist.support]
        probs[i, :len(e.dist)] = e.dist.probs
    sizes = np.array([len(e.dist) for e in inst.elements], dtype=np.int64)
    prices = np.array([e.price for e in inst.elements])
    return float(kernels.adaptive_dp(values, probs, sizes, prices, _h_terms(inst, sign),
                                     allowed_probe_masks(inst)))


def optimal_adaptive_utility(inst: PoiInstance, max_states: int | None = None) -> float:
    """Expected utility of the best probing decision tree (packing).

    A probing constraint, if present, limits which sets may be probed.
    """
    if inst.direction is not Direction.PACKING:
        raise ValueError("optimal_adaptive_utility needs a packing instance")
    cap = _cap(max_states)
    if not inst.elements:
        return 0.0
    if _is_pandora(inst):
        return _pandora_dp(inst, cap)
    return _general_dp(inst, 1.0, cap)


def optimal_adaptive_disutility(inst: PoiInstance, max_states: int | None = None) -> float:
    """Expected disutility of the best probing decision tree (covering)."""
    if inst.direction is not Direction.COVERING:
        raise ValueError("optimal_adaptive_disutility needs a covering instance")
    if inst.probing_constraint is not None:
        raise ValueError("probing constraints are only supported for packing instances")
    value = -_general_dp(inst, -1.0, _cap(max_states))
    if not math.isfinite(value):
        raise ValueError("no feasible cover is reachable")
    return value


def _outcome_matrix(inst: PoiInstance, transform: Callable, cap: int) -> tuple[np.ndarray, np.ndarray]:
    """All outcome vectors (rows, transformed per element) and their probabilities."""
    total = inst.support_product()
    if total > cap:
        raise CapExceededError(f"outcome enumeration needs {total} vectors; cap is {cap}")
    cols = []
    prob = np.ones(1)
    for e in inst.elements:
        vals = np.array([transform(e, v) for v in e.dist.support])
        ps = np.array(e.dist.probs)
        cols = [np.repeat(c, len(vals)) for c in cols] + [np.tile(vals, len(prob))]
        prob = np.outer(prob, ps).ravel()
    return np.column_stack(cols) if cols else np.zeros((1, 0)), prob


def _expected_best(inst: PoiInstance, transform: Callable, maximize: bool, cap: int) -> float:
    feas = feasible_masks(inst)
    masks = np.flatnonzero(feas)
    n = len(inst.ids)
    member = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    ids = inst.ids
    h = np.array([inst.objective.h(_mask_ids(ids, int(m))) for m in masks])
    values, prob = _outcome_matrix(inst, transform, cap)
    chunk = max(1, 4_000_000 // max(len(masks), 1))
    total = []
    for start in range(0, len(prob), chunk):
        v = values[start:start + chunk] @ member.T + h
        best = v.max(axis=1) if maximize else v.min(axis=1)
        total.append(prob[start:start + chunk] * best)
    return math.fsum(np.concatenate(total))


def free_info_bound_max(inst: PoiInstance, max_states: int | None = None) -> float:
    """E[max over feasible I of val(I, Y_max)], an upper bound on any strategy's utility."""
    if inst.direction is not Direction.PACKING:
        raise ValueError("free_info_bound_max needs a packing instance")
    return _expected_best(inst, lambda e, v: min(v, e.tau_max), True, _cap(max_states))


def free_info_bound_min(inst: PoiInstance, max_states: int | None = None) -> float:
    """E[min over feasible covers I of cost(I, Y_min)], a lower bound on any strategy's disutility."""
    if inst.direction is not Direction.COVERING:
        raise ValueError("free_info_bound_min needs a covering instance")
    return _expected_best(inst, lambda e, v: max(v, e.tau_min), False, _cap(max_states))


def expected_offline_optimum(inst: PoiInstance, max_states: int | None = None) -> float:
    """E over X of the best selection with every value known for free."""
    return _expected_best(inst, lambda e, v: v, inst.direction is Direction.PACKING, _cap(max_states))


def optimal_offline(inst: PoiInstance, weights: Mapping[str, float]) -> frozenset[str]:
    """Best feasible set for fixed weights (max for packing, min for covering).

    Matroids with an additive objective use the greedy algorithm, which is
    exact; everything else enumerates subsets.  Ties go to the smaller set,
    then to the lexicographically smaller id list.
    """
    c = inst.constraint
    packing = inst.direction is Direction.PACKING
    if isinstance(inst.objective, Additive) and isinstance(c, (UniformMatroid, PartitionMatroid, GraphicMatroid)):
        if packing:
            return run_frugal_packing(inst, weights, GreedyAdditive())
        if all(weights[i] >= 0 for i in inst.ids):
            return run_frugal_covering(inst, weights, GreedyAdditive())
    ids = inst.ids
    feas = feasible_masks(inst)
    best_key = None
    best = frozenset()
    for mask in np.flatnonzero(feas):
        s = _mask_ids(ids, int(mask))
        val = inst.value(s, weights)
        key = (-val if packing else val, len(s), sorted(s))
        if best_key is None or key < best_key:
            best_key, best = key, s
    return best
