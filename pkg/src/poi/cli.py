"""Command line: grade, simulate, compare, gen.

Exit codes: 0 ok, 2 bad input or parameters, 3 unknown id or name,
4 strategy does not fit the instance, 5 an enumeration cap was hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

from .adaptive import simulate
from .constrained import SetProbingPipeline, optimal_set_probing_utility
from .frugal import RuleMismatchError
from .generate import KINDS, GenerateError, generate
from .io import InstanceFormatError, UnknownIdError, load_instance, write_instance
from .model import CapExceededError, Direction, UnknownElementError
from .oracle import (
    default_max_states,
    free_info_bound_max,
    free_info_bound_min,
    optimal_adaptive_disutility,
    optimal_adaptive_utility,
)
from .strategies import get_strategy, guarantee, strategy_names

EXIT_OK, EXIT_PARAMS, EXIT_LOOKUP, EXIT_MISMATCH, EXIT_CAPS = 0, 2, 3, 4, 5
RATIO_SLACK = 1e-7


class LookupFailure(Exception):
    pass


def fmt(x: float) -> str:
    """Twelve significant digits; negative zero prints as 0."""
    return "%.12g" % (x + 0.0)


def _support(d) -> str:
    return ",".join(f"{fmt(v)}:{fmt(p)}" for v, p in zip(d.support, d.probs))


def _write_csv(rows, out_path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _strategy(name):
    try:
        return get_strategy(name)
    except KeyError as exc:
        raise LookupFailure(exc.args[0]) from None


def cmd_grade(args) -> int:
    inst = load_instance(args.instance)
    try:
        e = inst.element(args.element)
    except (KeyError, UnknownElementError):
        raise LookupFailure(f"unknown element id {args.element!r}") from None
    print(f"tau_max={fmt(e.tau_max)}")
    print(f"tau_min={fmt(e.tau_min)}")
    print(f"y_max={_support(e.y_max)}")
    print(f"y_min={_support(e.y_min)}")
    return EXIT_OK


def simulation_rows(report) -> list[list[str]]:
    rows = [["trial", "utility", "probes", "selections"]]
    for r in report.rows:
        rows.append([str(r.trial), fmt(r.utility), str(r.probes), ";".join(r.selections)])
    rows.append(["mean", fmt(report.mean_utility), "stderr", fmt(report.stderr)])
    return rows


def cmd_simulate(args) -> int:
    inst = load_instance(args.instance)
    strategy = _strategy(args.strategy)
    report = simulate(inst, strategy, args.trials, args.seed, workers=args.workers)
    _write_csv(simulation_rows(report), args.out)
    if args.out:
        print(f"mean={fmt(report.mean_utility)} stderr={fmt(report.stderr)} trials={report.trials}")
    return EXIT_OK


@dataclass(frozen=True)
class ComparisonReport:
    instance: str
    strategy: str
    value: float
    oracle: float
    bound: float | None
    ratio: float
    guarantee: float | None
    passed: bool | None

    HEADER = ("instance", "strategy", "value", "oracle", "bound", "ratio", "guarantee", "pass")

    def row(self) -> list[str]:
        return [self.instance, self.strategy, fmt(self.value), fmt(self.oracle),
                "" if self.bound is None else fmt(self.bound), fmt(self.ratio),
                "" if self.guarantee is None else fmt(self.guarantee),
                "n/a" if self.passed is None else str(self.passed).lower()]


def quality_ratio(value: float, oracle: float, direction: Direction) -> float:
    """Fraction of the optimum achieved: 1 means optimal, 1/alpha means within factor alpha."""
    if direction is Direction.PACKING:
        num, den = value, oracle
    else:
        num, den = oracle, value
    if den <= 1e-12:
        # nothing to gain (packing) or nothing paid (covering)
        good = value >= oracle - 1e-9 if direction is Direction.PACKING else value <= oracle + 1e-9
        return 1.0 if good else 0.0
    return num / den


def compare(inst, strategy, max_states: int | None = None, label: str = "") -> ComparisonReport:
    strategy.check(inst)
    cap = default_max_states() if max_states is None else max_states
    value = strategy.exact(inst)
    bound = None
    if isinstance(strategy, SetProbingPipeline):
        oracle = optimal_set_probing_utility(inst, max_states=cap)
    elif inst.direction is Direction.PACKING:
        oracle = optimal_adaptive_utility(inst, cap)
        bound = free_info_bound_max(inst, cap)
    else:
        oracle = optimal_adaptive_disutility(inst, cap)
        bound = free_info_bound_min(inst, cap)
    ratio = quality_ratio(value, oracle, inst.direction)
    if not math.isfinite(ratio):
        raise ValueError("comparison ratio is not finite")
    g = guarantee(inst, strategy)
    passed = None if g is None else ratio >= 1.0 / g - RATIO_SLACK
    return ComparisonReport(inst.name or label, strategy.name, value, oracle, bound, ratio, g, passed)


def cmd_compare(args) -> int:
    strategy = _strategy(args.strategy)
    rows = [list(ComparisonReport.HEADER)]
    for path in args.instance:
        inst = load_instance(path)
        rows.append(compare(inst, strategy, args.max_states, label=str(path)).row())
    _write_csv(rows, args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {"n": args.n, "seed": args.seed, "support": args.support, "k": args.k, "p": args.p,
              "eps": args.eps, "covering": args.covering}
    text = write_instance(generate(args.kind, **params))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="poi", description="Probing under prices of information: strategies, oracles, instances.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("grade", help="print grades and surrogate distributions of one element")
    g.add_argument("--instance", required=True)
    g.add_argument("--element", required=True)
    g.set_defaults(func=cmd_grade)

    s = sub.add_parser("simulate", help="Monte-Carlo run of a strategy, one CSV row per trial")
    s.add_argument("--instance", required=True)
    s.add_argument("--strategy", required=True, help="one of: " + ", ".join(strategy_names()))
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="exact strategy value against the optimal adaptive strategy")
    c.add_argument("--instance", required=True, action="append", help="repeat for several instances")
    c.add_argument("--strategy", required=True)
    c.add_argument("--max-states", type=int, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_compare)

    n = sub.add_parser("gen", help="write a generated instance")
    n.add_argument("kind", choices=KINDS)
    n.add_argument("--n", type=int, default=4, help="number of elements (boxes for the fixtures)")
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--support", type=int, default=3, help="largest support size")
    n.add_argument("--k", type=int, default=1, help="probing budget, group size or client count")
    n.add_argument("--p", type=float, default=0.5)
    n.add_argument("--eps", type=float, default=0.1)
    n.add_argument("--covering", action="store_true", help="matroid kind: covering direction")
    n.add_argument("--out", default=None)
    n.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARAMS
    try:
        return args.func(args)
    except (UnknownIdError, LookupFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOOKUP
    except RuleMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPS
    except (InstanceFormatError, GenerateError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
