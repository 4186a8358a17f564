"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py --repeat 3 --n 8

Each kernel runs on the same random input under both backends; the
results must agree before any timing is reported.
"""

import argparse
import math
import time

import numpy as np

from poi.kernels import compiled_backend, python_backend


def adaptive_args(rng, n, width):
    sizes = rng.integers(1, width + 1, size=n).astype(np.int64)
    values = np.zeros((n, width))
    probs = np.zeros((n, width))
    for i in range(n):
        s = int(sizes[i])
        values[i, :s] = np.sort(rng.choice(40, size=s, replace=False)) / 4
        w = rng.random(s) + 0.1
        probs[i, :s] = w / w.sum()
    prices = np.round(rng.random(n), 2)
    terms = np.where(rng.random(1 << n) < 0.6, 0.0, -np.inf)
    terms[0] = 0.0
    allowed = np.ones(1 << n, dtype=np.uint8)
    return values, probs, sizes, prices, terms, allowed


def max_probe_args(rng, n, width):
    values, probs, sizes, prices, _, allowed = adaptive_args(rng, n, width)
    grid = sorted({0.0} | {float(v) for v in values[values > 0]})
    pos = {v: k for k, v in enumerate(grid)}
    atom_idx = np.array([[pos.get(float(v), 0) for v in row] for row in values], dtype=np.int64)
    return atom_idx, probs, sizes, prices, allowed, np.array(grid)


def steiner_args(rng, m, k):
    pts = rng.random((m, 2))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return dist, np.sort(rng.choice(m, size=k, replace=False)).astype(np.int64)


def best_time(fn, args, repeat):
    out, best = None, math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return out, best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=8, help="elements for the probing DPs")
    ap.add_argument("--width", type=int, default=3, help="largest support size")
    ap.add_argument("--terminals", type=int, default=7)
    ap.add_argument("--nodes", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    cases = [
        ("adaptive_dp", adaptive_args(rng, args.n, args.width)),
        ("max_probe_dp", max_probe_args(rng, args.n + 3, args.width)),
        ("steiner_cost", steiner_args(rng, args.nodes, args.terminals)),
    ]
    if compiled_backend is None:
        print("compiled backend unavailable (not built, or POI_PURE_PYTHON set); timing the pure-Python kernels only")
    print(f"{'kernel':<14}{'python (s)':>12}{'compiled (s)':>14}{'speedup':>10}")
    for name, kargs in cases:
        ref, t_py = best_time(getattr(python_backend, name), kargs, args.repeat)
        if compiled_backend is None:
            print(f"{name:<14}{t_py:>12.4f}{'-':>14}{'-':>10}")
            continue
        got, t_c = best_time(getattr(compiled_backend, name), kargs, args.repeat)
        if abs(ref - got) > 1e-9 * max(1.0, abs(ref)):
            raise SystemExit(f"{name}: backends disagree ({ref} vs {got})")
        print(f"{name:<14}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
