"""Compiled inner loops.

Every orbit in the package is advanced by :func:`t_step`, so scalar calls,
array calls and the Monte Carlo loops all share one floating-point path.
"""

import numpy as np
from numba import njit, prange

ONE_MINUS = np.nextafter(1.0, 0.0)


@njit(cache=True)
def t_step(x, alpha, c):
    # c = 2**alpha, hoisted by the caller.  Returns (T(x), clamped).
    if x < 0.5:
        y = x * (1.0 + c * x**alpha)
        if y >= 1.0:
            return ONE_MINUS, True
        return y, False
    return 2.0 * x - 1.0, False


@njit(cache=True)
def map_array(x, alpha):
    c = 2.0**alpha
    out = np.empty_like(x)
    nclamp = 0
    for i in range(x.size):
        y, cl = t_step(x[i], alpha, c)
        out[i] = y
        nclamp += cl
    return out, nclamp


@njit(cache=True)
def iterate(x, alpha, n):
    c = 2.0**alpha
    nclamp = 0
    for _ in range(n):
        x, cl = t_step(x, alpha, c)
        nclamp += cl
    return x, nclamp


@njit(cache=True)
def orbit(x, alpha, n):
    c = 2.0**alpha
    pts = np.empty(n)
    nclamp = 0
    for k in range(n):
        pts[k] = x
        x, cl = t_step(x, alpha, c)
        nclamp += cl
    return pts, nclamp


@njit(cache=True)
def runs_on_grid(x, alpha, grid):
    """Stream max(grid) digits from ``x``; record (r, R) after each grid horizon."""
    c = 2.0**alpha
    out = np.zeros((grid.size, 2), np.int64)
    cur0 = 0
    cur1 = 0
    m0 = 0
    m1 = 0
    g = 0
    n = grid[grid.size - 1]
    for k in range(n):
        if x < 0.5:
            cur0 += 1
            cur1 = 0
            if cur0 > m0:
                m0 = cur0
        else:
            cur1 += 1
            cur0 = 0
            if cur1 > m1:
                m1 = cur1
        x, _ = t_step(x, alpha, c)
        while g < grid.size and k + 1 == grid[g]:
            out[g, 0] = m0
            out[g, 1] = m1
            g += 1
    return out


@njit(cache=True)
def windows_on_grid(x, alpha, grid, windows, digit):
    """Max count of ``digit`` over windows[g]-long windows inside the first grid[g] digits."""
    c = 2.0**alpha
    kmax = 0
    for w in windows:
        if w > kmax:
            kmax = w
    ring = np.zeros(kmax, np.int64)
    cnt = np.zeros(grid.size, np.int64)
    best = np.zeros(grid.size, np.int64)
    n = grid[grid.size - 1]
    for k in range(n):
        d = 1 if x >= 0.5 else 0
        hit = 1 if d == digit else 0
        for g in range(grid.size):
            if k >= grid[g]:
                continue
            w = windows[g]
            cnt[g] += hit
            if k >= w:
                cnt[g] -= ring[(k - w) % kmax]
            if k + 1 >= w and cnt[g] > best[g]:
                best[g] = cnt[g]
        ring[k % kmax] = hit
        x, _ = t_step(x, alpha, c)
    return best


@njit(cache=True)
def histogram_orbit(x, alpha, n, boundaries):
    c = 2.0**alpha
    counts = np.zeros(boundaries.size - 1, np.int64)
    last = boundaries.size - 2
    for _ in range(n):
        i = np.searchsorted(boundaries, x, side="right") - 1
        if i > last:
            i = last
        counts[i] += 1
        x, _ = t_step(x, alpha, c)
    return counts


@njit(cache=True)
def joint_counts(x, alpha, n, lags, a_lo, a_hi, b_lo, b_hi):
    """Count k < n with x_k in A and x_{k+lag} in B, for every lag.

    Also returns the visit counts of A and of B among x_0, ..., x_{n-1}.
    """
    c = 2.0**alpha
    lmax = 0
    for lag in lags:
        if lag > lmax:
            lmax = lag
    size = lmax + 1
    in_a = np.zeros(size, np.bool_)
    counts = np.zeros(lags.size, np.int64)
    n_a = 0
    n_b = 0
    for k in range(n + lmax):
        in_b = b_lo <= x < b_hi
        if k < n:
            ia = a_lo <= x < a_hi
            in_a[k % size] = ia
            n_a += ia
            n_b += in_b
        if in_b:
            for j in range(lags.size):
                s = k - lags[j]
                if 0 <= s < n and in_a[s % size]:
                    counts[j] += 1
        x, _ = t_step(x, alpha, c)
    return counts, n_a, n_b


@njit(cache=True, parallel=True)
def runs_batch(starts, alpha, grid):
    out = np.zeros((starts.size, grid.size, 2), np.int64)
    for t in prange(starts.size):
        out[t] = runs_on_grid(starts[t], alpha, grid)
    return out


@njit(cache=True, parallel=True)
def windows_batch(starts, alpha, grid, windows, digit):
    out = np.zeros((starts.size, grid.size), np.int64)
    for t in prange(starts.size):
        out[t] = windows_on_grid(starts[t], alpha, grid, windows, digit)
    return out


@njit(cache=True, parallel=True)
def iterate_batch(starts, alpha, n):
    out = np.empty_like(starts)
    for t in prange(starts.size):
        out[t] = iterate(starts[t], alpha, n)[0]
    return out
