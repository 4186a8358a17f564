"""Pure-Python reference kernels.

Same signatures and results as the compiled module; used when the
extension is not built or when ``POI_PURE_PYTHON=1``.
"""

import math

NEG_INF = -math.inf


def adaptive_dp(values, probs, sizes, prices, terms, allowed):
    """Value of the optimal probing decision tree (maximisation).

    State = for each element either "unprobed" or the index of its realised
    atom, packed in mixed radix with base ``sizes[i] + 1`` (digit 0 means
    unprobed).  ``terms[mask]`` is h(mask) for feasible selections and -inf
    otherwise; ``allowed[mask]`` says whether ``mask`` may be the probed set.
    """
    n = len(sizes)
    strides = [1] * n
    for i in range(1, n):
        strides[i] = strides[i - 1] * (int(sizes[i - 1]) + 1)
    total = strides[-1] * (int(sizes[-1]) + 1) if n else 1
    value = [0.0] * total
    sub_sum = [0.0] * (1 << n)
    low = [0] * (1 << n)
    for m in range(1, 1 << n):
        low[m] = (m & -m).bit_length() - 1
    x = [0.0] * n
    for state in range(total - 1, -1, -1):
        probed = 0
        rest = state
        digits = [0] * n
        for i in range(n - 1, -1, -1):
            digits[i], rest = divmod(rest, strides[i])
        for i in range(n):
            if digits[i]:
                probed |= 1 << i
                x[i] = values[i][digits[i] - 1]
        best = terms[0]
        # ascending submask walk so each partial sum reuses a smaller one
        sub = 0
        while True:
            sub = (sub - probed) & probed
            if sub == 0:
                break
            sub_sum[sub] = sub_sum[sub & (sub - 1)] + x[low[sub]]
            t = terms[sub]
            if t != NEG_INF:
                cand = t + sub_sum[sub]
                if cand > best:
                    best = cand
        for i in range(n):
            if digits[i] or not allowed[probed | (1 << i)]:
                continue
            acc = -prices[i]
            base = state + strides[i]
            for k in range(int(sizes[i])):
                acc += probs[i][k] * value[base + k * strides[i]]
            if acc > best:
                best = acc
        value[state] = best
    return value[0]


def max_probe_dp(atom_idx, probs, sizes, prices, allowed, grid):
    """Optimal adaptive utility for "probe under constraint, keep the best".

    State = (probed mask, index of the best value seen so far in ``grid``).
    ``grid[0]`` must be the outside option 0 and ``atom_idx[i][k]`` the grid
    position of atom k of element i.
    """
    n = len(sizes)
    g = len(grid)
    full = 1 << n
    table = [None] * full
    for mask in range(full - 1, -1, -1):
        if not allowed[mask]:
            continue
        row = list(grid)
        for i in range(n):
            bit = 1 << i
            if mask & bit or not allowed[mask | bit]:
                continue
            nxt = table[mask | bit]
            for c in range(g):
                acc = -prices[i]
                for k in range(int(sizes[i])):
                    j = atom_idx[i][k]
                    acc += probs[i][k] * nxt[j if j > c else c]
                if acc > row[c]:
                    row[c] = acc
        table[mask] = row
    return table[0][0]


def steiner_cost(dist, terminals):
    """Minimum Steiner tree cost (Dreyfus-Wagner) over shortest-path metric ``dist``."""
    k = len(terminals)
    if k <= 1:
        return 0.0
    m = len(dist)
    root = terminals[k - 1]
    q = k - 1
    full = 1 << q
    dp = [None] * full
    for b in range(q):
        t = terminals[b]
        dp[1 << b] = [dist[t][v] for v in range(m)]
    for s in range(1, full):
        if s & (s - 1) == 0:
            continue
        row = [math.inf] * m
        lowbit = s & -s
        rest = s ^ lowbit
        # splits containing the low bit enumerate each partition once
        sub = rest
        while True:
            s1 = sub | lowbit
            if s1 != s:
                a = dp[s1]
                c = dp[s ^ s1]
                for v in range(m):
                    val = a[v] + c[v]
                    if val < row[v]:
                        row[v] = val
            if sub == 0:
                break
            sub = (sub - 1) & rest
        relaxed = list(row)
        for u in range(m):
            ru = row[u]
            if ru == math.inf:
                continue
            du = dist[u]
            for v in range(m):
                val = ru + du[v]
                if val < relaxed[v]:
                    relaxed[v] = val
        dp[s] = relaxed
    return dp[full - 1][root]
