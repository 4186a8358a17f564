# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; results match ``_pykernels`` exactly on the same inputs."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


cdef inline int _low_index(long long m) nogil:
    cdef int i = 0
    while not (m & 1):
        m >>= 1
        i += 1
    return i


def adaptive_dp(values, probs, sizes, prices, terms, allowed):
    cdef double[:, ::1] vals = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[:, ::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef long long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef double[::1] price = np.ascontiguousarray(prices, dtype=np.float64)
    cdef double[::1] term = np.ascontiguousarray(terms, dtype=np.float64)
    cdef unsigned char[::1] ok = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef int n = sz.shape[0]
    cdef long long i, k, state, rest, total, base, probed, sub
    cdef double best, acc, t, cand
    cdef long long[::1] strides = np.ones(max(n, 1), dtype=np.int64)
    for i in range(1, n):
        strides[i] = strides[i - 1] * (sz[i - 1] + 1)
    total = strides[n - 1] * (sz[n - 1] + 1) if n > 0 else 1
    cdef double[::1] value = np.zeros(total, dtype=np.float64)
    cdef double[::1] sub_sum = np.zeros(1 << n, dtype=np.float64)
    cdef int[::1] low = np.zeros(1 << n, dtype=np.int32)
    cdef double[::1] x = np.zeros(max(n, 1), dtype=np.float64)
    cdef long long[::1] digits = np.zeros(max(n, 1), dtype=np.int64)
    for sub in range(1, 1 << n):
        low[sub] = _low_index(sub)
    with nogil:
        for state in range(total - 1, -1, -1):
            probed = 0
            rest = state
            for i in range(n - 1, -1, -1):
                digits[i] = rest // strides[i]
                rest = rest - digits[i] * strides[i]
            for i in range(n):
                if digits[i]:
                    probed |= (<long long>1) << i
                    x[i] = vals[i, digits[i] - 1]
            best = term[0]
            sub = 0
            while True:
                sub = (sub - probed) & probed
                if sub == 0:
                    break
                sub_sum[sub] = sub_sum[sub & (sub - 1)] + x[low[sub]]
                t = term[sub]
                if t != -INFINITY:
                    cand = t + sub_sum[sub]
                    if cand > best:
                        best = cand
            for i in range(n):
                if digits[i] or not ok[probed | ((<long long>1) << i)]:
                    continue
                acc = -price[i]
                base = state + strides[i]
                for k in range(sz[i]):
                    acc = acc + pr[i, k] * value[base + k * strides[i]]
                if acc > best:
                    best = acc
            value[state] = best
    return value[0]


def max_probe_dp(atom_idx, probs, sizes, prices, allowed, grid):
    cdef long long[:, ::1] aidx = np.ascontiguousarray(atom_idx, dtype=np.int64)
    cdef double[:, ::1] pr = np.ascontiguousarray(probs, dtype=np.float64)
    cdef long long[::1] sz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef double[::1] price = np.ascontiguousarray(prices, dtype=np.float64)
    cdef unsigned char[::1] ok = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef double[::1] gr = np.ascontiguousarray(grid, dtype=np.float64)
    cdef int n = sz.shape[0]
    cdef int g = gr.shape[0]
    cdef long long full = (<long long>1) << n
    cdef long long mask, bit, i, c, k, j
    cdef double acc
    cdef double[:, ::1] table = np.empty((full, g), dtype=np.float64)
    with nogil:
        for mask in range(full - 1, -1, -1):
            if not ok[mask]:
                continue
            for c in range(g):
                table[mask, c] = gr[c]
            for i in range(n):
                bit = (<long long>1) << i
                if (mask & bit) or not ok[mask | bit]:
                    continue
                for c in range(g):
                    acc = -price[i]
                    for k in range(sz[i]):
                        j = aidx[i, k]
                        if j < c:
                            j = c
                        acc = acc + pr[i, k] * table[mask | bit, j]
                    if acc > table[mask, c]:
                        table[mask, c] = acc
    return table[0, 0]


def steiner_cost(dist, terminals):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef long long[::1] term = np.ascontiguousarray(terminals, dtype=np.int64)
    cdef int k = term.shape[0]
    if k <= 1:
        return 0.0
    cdef int m = d.shape[0]
    cdef int q = k - 1
    cdef long long full = (<long long>1) << q
    cdef long long s, s1, sub, rest, lowbit
    cdef int b, u, v
    cdef double val, ru
    cdef double[:, ::1] dp = np.full((full, m), INFINITY, dtype=np.float64)
    cdef double[::1] row = np.empty(m, dtype=np.float64)
    with nogil:
        for b in range(q):
            for v in range(m):
                dp[(<long long>1) << b, v] = d[term[b], v]
        for s in range(1, full):
            if s & (s - 1) == 0:
                continue
            for v in range(m):
                row[v] = INFINITY
            lowbit = s & -s
            rest = s ^ lowbit
            sub = rest
            while True:
                s1 = sub | lowbit
                if s1 != s:
                    for v in range(m):
                        val = dp[s1, v] + dp[s ^ s1, v]
                        if val < row[v]:
                            row[v] = val
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            for v in range(m):
                dp[s, v] = row[v]
            for u in range(m):
                ru = row[u]
                if ru == INFINITY:
                    continue
                for v in range(m):
                    val = ru + d[u, v]
                    if val < dp[s, v]:
                        dp[s, v] = val
    return dp[full - 1, term[k - 1]]
