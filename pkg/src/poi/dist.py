"""Finite-support distributions, grades and surrogate variables.

Every random parameter in this package is a nonnegative random variable
with finitely many atoms.  The two grades of a variable with probing price
``price`` are the thresholds solving

    E[(X - tau_max)^+] = price        E[(tau_min - X)^+] = price

and the surrogates are ``min(X, tau_max)`` and ``max(X, tau_min)``.  Both
expectations are piecewise linear in tau, so the grades are found exactly by
scanning the segments between consecutive support points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

PROB_TOL = 1e-12
MERGE_TOL = 1e-12
# atoms lighter than this after a CDF product are rounding residue
_DROP_MASS = 1e-15


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class DiscreteDistribution:
    """Nonnegative random variable with finitely many atoms.

    ``support`` is strictly increasing and ``probs[j]`` is the mass at
    ``support[j]``.
    """

    support: tuple[float, ...]
    probs: tuple[float, ...]

    _allow_negative = False

    def __post_init__(self):
        support = tuple(float(v) for v in self.support)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if not support:
            raise DistributionError("support must be nonempty")
        if len(support) != len(probs):
            raise DistributionError("support and probs must have equal length")
        if any(not math.isfinite(v) for v in support):
            raise DistributionError("support values must be finite")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise DistributionError("support must be strictly increasing")
        if not self._allow_negative and support[0] < 0:
            raise DistributionError("support values must be nonnegative")
        if any(not p > 0 for p in probs):
            raise DistributionError("all probabilities must be positive")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise DistributionError("probabilities must sum to 1")

    @classmethod
    def from_mapping(cls, masses: Mapping[float, float]) -> "DiscreteDistribution":
        items = sorted(masses.items())
        return cls(tuple(v for v, _ in items), tuple(p for _, p in items))

    @classmethod
    def point(cls, value: float) -> "DiscreteDistribution":
        return cls((value,), (1.0,))

    def __len__(self):
        return len(self.support)

    @property
    def is_deterministic(self) -> bool:
        return len(self.support) == 1

    @property
    def min(self) -> float:
        return self.support[0]

    @property
    def max(self) -> float:
        return self.support[-1]

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.support, self.probs))

    def cdf(self, value: float) -> float:
        return math.fsum(p for v, p in zip(self.support, self.probs) if v <= value)

    def index_of(self, value: float) -> int:
        """Index of the atom equal to ``value``; raises KeyError if absent."""
        try:
            return self.support.index(value)
        except ValueError:
            raise KeyError(value) from None

    def quantile_index(self, u: float) -> int:
        """Atom index hit by a uniform draw ``u`` in [0, 1) (inverse CDF)."""
        acc = 0.0
        for j, p in enumerate(self.probs):
            acc += p
            if u < acc:
                return j
        return len(self.probs) - 1


class SurrogateKind(Enum):
    MAX_SIDE = "max"
    MIN_SIDE = "min"


@dataclass(frozen=True)
class SurrogateDistribution(DiscreteDistribution):
    """Distribution of a clipped (max side) or lifted (min side) variable.

    Unlike the raw parameters, a max-side surrogate may live entirely below
    zero when its grade is negative.
    """

    kind: SurrogateKind = SurrogateKind.MAX_SIDE
    grade: float = 0.0

    _allow_negative = True


@dataclass(frozen=True)
class Grade:
    tau_max: float
    tau_min: float


def expected_value(d: DiscreteDistribution) -> float:
    return math.fsum(p * v for v, p in zip(d.support, d.probs))


def expected_excess(d: DiscreteDistribution, tau: float) -> float:
    """E[(X - tau)^+]."""
    return math.fsum(p * (v - tau) for v, p in zip(d.support, d.probs) if v > tau)


def expected_shortfall(d: DiscreteDistribution, tau: float) -> float:
    """E[(tau - X)^+]."""
    return math.fsum(p * (tau - v) for v, p in zip(d.support, d.probs) if v < tau)


def _check_price(price: float) -> float:
    price = float(price)
    if not price >= 0 or not math.isfinite(price):
        raise DistributionError(f"probing price must be a finite nonnegative number, got {price!r}")
    return price


def grade_max(d: DiscreteDistribution, price: float) -> float:
    """Solve E[(X - tau)^+] = price for tau.

    Zero price returns the largest atom.  The result is negative when the
    price exceeds E[X].
    """
    price = _check_price(price)
    vs, ps = d.support, d.probs
    if price == 0.0:
        return vs[-1]
    # scan from the top: on [v_k, v_{k+1}] the excess is tail_sum - tail_mass * tau
    tail_mass = 0.0
    tail_sum = 0.0
    for k in range(len(vs) - 1, 0, -1):
        tail_mass += ps[k]
        tail_sum += ps[k] * vs[k]
        at_knot = tail_sum - tail_mass * vs[k - 1]
        if at_knot == price:
            return vs[k - 1]
        if at_knot > price:
            tau = (tail_sum - price) / tail_mass
            return min(max(tau, vs[k - 1]), vs[k])
    # below the smallest atom the excess is E[X] - tau
    return expected_value(d) - price


def grade_min(d: DiscreteDistribution, price: float) -> float:
    """Solve E[(tau - X)^+] = price for tau (never below the smallest atom)."""
    price = _check_price(price)
    vs, ps = d.support, d.probs
    if price == 0.0:
        return vs[0]
    head_mass = 0.0
    head_sum = 0.0
    for k in range(len(vs) - 1):
        head_mass += ps[k]
        head_sum += ps[k] * vs[k]
        at_knot = head_mass * vs[k + 1] - head_sum
        if at_knot == price:
            return vs[k + 1]
        if at_knot > price:
            tau = (price + head_sum) / head_mass
            return min(max(tau, vs[k]), vs[k + 1])
    # above the largest atom the shortfall is tau - E[X]
    return expected_value(d) + price


def grades(d: DiscreteDistribution, price: float) -> Grade:
    return Grade(grade_max(d, price), grade_min(d, price))


def _merged(values: Iterable[float], probs: Iterable[float]) -> tuple[list[float], list[float]]:
    pairs = sorted(zip(values, probs))
    out_v: list[float] = []
    out_p: list[float] = []
    for v, p in pairs:
        if out_v and abs(v - out_v[-1]) <= MERGE_TOL:
            out_p[-1] += p
        else:
            out_v.append(v)
            out_p.append(p)
    return out_v, out_p


def surrogate_max(d: DiscreteDistribution, price: float) -> SurrogateDistribution:
    """Distribution of min(X, tau_max)."""
    tau = grade_max(d, price)
    vs, ps = _merged((min(v, tau) for v in d.support), d.probs)
    return SurrogateDistribution(tuple(vs), tuple(ps), kind=SurrogateKind.MAX_SIDE, grade=tau)


def surrogate_min(d: DiscreteDistribution, price: float) -> SurrogateDistribution:
    """Distribution of max(X, tau_min)."""
    tau = grade_min(d, price)
    vs, ps = _merged((max(v, tau) for v in d.support), d.probs)
    return SurrogateDistribution(tuple(vs), tuple(ps), kind=SurrogateKind.MIN_SIDE, grade=tau)


def compose_max(ds: Sequence[DiscreteDistribution]) -> DiscreteDistribution:
    """Exact distribution of the maximum of independent variables.

    The CDF of the maximum at every support point is the product of the
    component CDFs there.  Works for surrogates with negative atoms too; the
    result keeps the class of the inputs only when they are all raw
    (nonnegative) distributions.
    """
    if not ds:
        raise DistributionError("compose_max needs at least one distribution")
    if len(ds) == 1:
        return ds[0]
    grid = np.unique(np.concatenate([np.asarray(d.support) for d in ds]))
    cdf = np.ones_like(grid)
    for d in ds:
        cum = np.cumsum(d.probs)
        idx = np.searchsorted(np.asarray(d.support), grid, side="right")
        cdf *= np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    pmf = np.diff(cdf, prepend=0.0)
    keep = pmf > _DROP_MASS
    support = tuple(grid[keep].tolist())
    probs = tuple(pmf[keep].tolist())
    if all(type(d) is DiscreteDistribution for d in ds):
        return DiscreteDistribution(support, probs)
    return SurrogateDistribution(support, probs, kind=SurrogateKind.MAX_SIDE, grade=math.nan)


def with_floor(d: DiscreteDistribution, floor: float = 0.0) -> DiscreteDistribution:
    """Distribution of max(X, floor); used for the empty-selection outside option."""
    vs, ps = _merged((max(v, floor) for v in d.support), d.probs)
    return SurrogateDistribution(tuple(vs), tuple(ps), kind=SurrogateKind.MAX_SIDE, grade=math.nan)
