"""Run-length functions, windowed Birkhoff maxima and constant-digit cylinders.

Digits are indexed from 1 in the mathematical definitions (``eps_1`` is the
symbol of ``x`` itself).  Arrays here are 0-based: ``digits[k]`` is
``eps_{k+1}``.  Only :func:`run_length_window` takes 1-based positions,
because its window ``m..n`` is defined that way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .map_core import as_alpha, preimage_sequence


@dataclass(frozen=True)
class RunLengthState:
    """Streaming run-length accumulator for a binary itinerary.

    ``max_run_0`` and ``max_run_1`` are the run-length functions ``r_n`` and
    ``R_n`` of the digits fed so far.
    """

    n: int = 0
    current_run_0: int = 0
    current_run_1: int = 0
    max_run_0: int = 0
    max_run_1: int = 0

    def max_run(self, digit: int) -> int:
        return self.max_run_1 if digit else self.max_run_0


def feed(state: RunLengthState, digit: int) -> RunLengthState:
    """Return the state after one more digit."""
    if digit == 0:
        c0 = state.current_run_0 + 1
        return RunLengthState(state.n + 1, c0, 0, max(state.max_run_0, c0), state.max_run_1)
    if digit == 1:
        c1 = state.current_run_1 + 1
        return RunLengthState(state.n + 1, 0, c1, state.max_run_0, max(state.max_run_1, c1))
    raise ValueError(f"digit must be 0 or 1, got {digit!r}")


def feed_all(digits, state: RunLengthState | None = None) -> RunLengthState:
    """Feed a whole sequence in order."""
    state = RunLengthState() if state is None else state
    for d in digits:
        state = feed(state, int(d))
    return state


def longest_run(digits, digit: int) -> int:
    """Longest block of ``digit`` in a 0/1 array (vectorised, 0 if absent)."""
    d = np.asarray(digits)
    if d.size == 0:
        return 0
    hit = np.concatenate(([0], (d == digit).astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(hit))
    if edges.size == 0:
        return 0
    return int((edges[1::2] - edges[::2]).max())


def run_length_window(digits, m: int, n: int, digit: int) -> int:
    """Longest run of ``digit`` among ``eps_m, ..., eps_n`` (1-based, inclusive).

    This is ``max{k >= 0 : eps_{i+1} = ... = eps_{i+k} = digit, m-1 <= i <= n-k}``;
    ``m = 1`` gives the plain run-length function of the first ``n`` digits.
    """
    d = np.asarray(digits)
    if not (1 <= m <= n <= d.size):
        raise ValueError(f"need 1 <= m <= n <= {d.size}, got m={m}, n={n}")
    return longest_run(d[m - 1 : n], digit)


@dataclass(frozen=True)
class WindowStat:
    window_len: int
    max_sum: int
    n: int

    @property
    def average(self) -> float:
        return self.max_sum / self.window_len


def max_window_birkhoff(digits, K: int, digit: int) -> WindowStat:
    """Maximal count of ``digit`` over all length-``K`` windows of ``digits``.

    The Birkhoff sum of the indicator of the digit's interval, maximised over
    window starts ``0 <= i <= n - K``; O(n) via cumulative sums.
    """
    d = np.asarray(digits)
    n = d.size
    if not (1 <= K <= n):
        raise ValueError(f"window length must satisfy 1 <= K <= n = {n}, got {K}")
    csum = np.concatenate(([0], np.cumsum(d == digit, dtype=np.int64)))
    return WindowStat(int(K), int((csum[K:] - csum[:-K]).max()), int(n))


@dataclass(frozen=True)
class CylinderInterval:
    digit: int
    k: int
    lo: float
    hi: float

    def __contains__(self, x) -> bool:
        return self.lo <= x < self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


def cylinder_interval(alpha, k: int, digit: int) -> CylinderInterval:
    """Set of points whose first ``k`` digits all equal ``digit``.

    Ones: ``[1 - 2**-k, 1)``.  Zeros: ``[0, a_{k-1})`` with ``a`` the
    preimage ladder (``a_0 = 1/2``), since ``x < a_{k-1}`` is exactly the
    condition ``T^j x < 1/2`` for ``j < k``.
    """
    if k < 1:
        raise ValueError("cylinder length must be >= 1")
    if digit == 1:
        as_alpha(alpha)
        return CylinderInterval(1, k, 1.0 - 2.0**-k, 1.0)
    if digit == 0:
        ladder = preimage_sequence(alpha, k - 1)
        return CylinderInterval(0, k, 0.0, float(ladder[k - 1]))
    raise ValueError(f"digit must be 0 or 1, got {digit!r}")
