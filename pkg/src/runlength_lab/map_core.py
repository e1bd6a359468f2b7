"""The intermittent map family, its inverse branches and symbolic coding.

For ``0 < alpha < 1``::

    T(x) = x * (1 + 2**alpha * x**alpha)    for 0 <= x < 1/2
    T(x) = 2 * x - 1                        for 1/2 <= x < 1

with the coding partition ``I0 = [0, 1/2)``, ``I1 = [1/2, 1)``.  The point
``x = 1/2`` belongs to ``I1`` and is mapped by the right branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels
from .errors import SolverError

MAX_STEPS = 2**62
SOLVER_MAXITER = 200
SOLVER_RESIDUAL = 1e-14
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class Alpha:
    """Map parameter, strictly inside (0, 1)."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 < v < 1.0) or math.isnan(v):
            raise ValueError(f"alpha must lie in the open interval (0, 1), got {self.value!r}")
        object.__setattr__(self, "value", v)

    def __float__(self):
        return self.value


def as_alpha(alpha) -> float:
    """Validate ``alpha`` (float or :class:`Alpha`) and return it as a float."""
    if isinstance(alpha, Alpha):
        return alpha.value
    return Alpha(alpha).value


def _check_point(x):
    if not (0.0 <= x < 1.0):
        raise ValueError(f"point must lie in [0, 1), got {x!r}")


class OrbitSample(NamedTuple):
    index: int
    point: float
    digit: int


def apply_map(alpha, x):
    """Evaluate the map at a point or an array of points.

    A left-branch value that rounds up to 1.0 is replaced by the largest
    double below 1; use :func:`apply_map_checked` to see whether that happened.
    """
    return apply_map_checked(alpha, x)[0]


def apply_map_checked(alpha, x):
    """Like :func:`apply_map` but also return the number of clamped values."""
    a = as_alpha(alpha)
    arr = np.asarray(x, dtype=float)
    if arr.size and (arr.min() < 0.0 or arr.max() >= 1.0):
        raise ValueError("points must lie in [0, 1)")
    if arr.ndim == 0:
        y, clamped = _kernels.t_step(float(arr), a, 2.0**a)
        return float(y), int(clamped)
    y, nclamp = _kernels.map_array(arr.ravel(), a)
    return y.reshape(arr.shape), int(nclamp)


def derivative(alpha, x):
    """Branch derivative; at ``x = 1/2`` the right-branch value 2 is used."""
    a = as_alpha(alpha)
    arr = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore"):
        d = np.where(arr < 0.5, 1.0 + 2.0**a * (1.0 + a) * np.abs(arr) ** a, 2.0)
    return float(d) if d.ndim == 0 else d


def symbol(x):
    """Coding digit: 0 on [0, 1/2), 1 on [1/2, 1)."""
    arr = np.asarray(x)
    d = (arr >= 0.5).astype(np.int8)
    return int(d) if d.ndim == 0 else d


class OrbitStream:
    """Iterate ``(k, T^k x0, digit)`` for ``k = 0, ..., n-1`` in constant memory.

    ``clamped`` counts left-branch values that had to be pulled below 1.
    """

    def __init__(self, alpha, x0: float, n: int):
        self.alpha = as_alpha(alpha)
        _check_point(x0)
        if n < 1:
            raise ValueError("orbit length must be >= 1")
        if n > MAX_STEPS:
            raise ValueError(f"orbit length {n} exceeds the step counter range")
        self.x0 = float(x0)
        self.n = int(n)
        self.clamped = 0

    def __iter__(self) -> Iterator[OrbitSample]:
        a, c = self.alpha, 2.0**self.alpha
        x = self.x0
        self.clamped = 0
        for k in range(self.n):
            yield OrbitSample(k, x, 1 if x >= 0.5 else 0)
            x, cl = _kernels.t_step(x, a, c)
            self.clamped += int(cl)


def orbit_stream(alpha, x0: float, n: int) -> OrbitStream:
    return OrbitStream(alpha, x0, n)


def orbit_array(alpha, x0: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Points ``T^k x0`` and digits for ``k < n`` as arrays (compiled loop)."""
    a = as_alpha(alpha)
    _check_point(x0)
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    pts, _ = _kernels.orbit(float(x0), a, int(n))
    return pts, (pts >= 0.5).astype(np.int8)


def iterate(alpha, x0: float, n: int) -> float:
    """Return ``T^n x0``."""
    a = as_alpha(alpha)
    _check_point(x0)
    if n < 0:
        raise ValueError("number of steps must be >= 0")
    return float(_kernels.iterate(float(x0), a, int(n))[0])


# Left inverse branch ---------------------------------------------------------

def _left_scalar(a: float, c: float, y: float, index=None) -> float:
    # Root of x*(1 + c*x**a) = y on [0, 1/2].  Since T(x) >= x and
    # T(x) <= x*(1 + c*y**a) below the root, [y/(1 + c*y**a), min(y, 1/2)]
    # brackets it.  A few bisections shrink the bracket, then Newton with a
    # bisection fallback whenever a step leaves it.
    if y == 0.0:
        return 0.0
    lo = y / (1.0 + c * y**a)
    hi = min(y, 0.5)
    for _ in range(4):
        mid = 0.5 * (lo + hi)
        if mid * (1.0 + c * mid**a) < y:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(SOLVER_MAXITER):
        xa = x**a
        f = x * (1.0 + c * xa) - y
        if f == 0.0:
            return x
        if f < 0.0:
            lo = x
        else:
            hi = x
        step = f / (1.0 + c * (1.0 + a) * xa)
        xn = x - step
        if not (lo <= xn <= hi):
            xn = 0.5 * (lo + hi)
        # 4 ulp-ish: rounding in f can sustain a 2-cycle wider than 2 eps x
        if abs(xn - x) <= 4.0 * _EPS * x or hi - lo <= 4.0 * _EPS * hi:
            x = xn
            break
        x = xn
    else:
        raise SolverError("left-branch inverse did not converge", index=index, value=y)
    if abs(x * (1.0 + c * x**a) - y) > SOLVER_RESIDUAL:
        raise SolverError("left-branch inverse residual too large", index=index, value=y)
    return x


def _left_array(a, y, dtype=np.float64):
    # Vectorised twin of _left_scalar; dtype=np.longdouble gives the
    # extended-precision path.
    y = np.asarray(y, dtype=dtype)
    a = dtype(a)
    c = dtype(2) ** a
    half = dtype(0.5)
    eps = np.finfo(dtype).eps
    x = np.zeros_like(y)
    live = y > 0
    yl = y[live]
    lo = yl / (1 + c * yl**a)
    hi = np.minimum(yl, half)
    for _ in range(4):
        mid = (lo + hi) / 2
        below = mid * (1 + c * mid**a) < yl
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    xl = (lo + hi) / 2
    done = np.zeros(yl.shape, bool)
    for _ in range(SOLVER_MAXITER):
        xa = xl**a
        f = xl * (1 + c * xa) - yl
        lo = np.where(f < 0, xl, lo)
        hi = np.where(f > 0, xl, hi)
        xn = xl - f / (1 + c * (1 + a) * xa)
        xn = np.where((xn < lo) | (xn > hi), (lo + hi) / 2, xn)
        xn = np.where(done | (f == 0), xl, xn)
        done |= (np.abs(xn - xl) <= 4 * eps * xl) | (hi - lo <= 4 * eps * hi)
        xl = xn
        if done.all():
            break
    else:
        bad = np.flatnonzero(~done)[0]
        raise SolverError("left-branch inverse did not converge", index=int(bad), value=float(yl[bad]))
    resid = np.abs(xl * (1 + c * xl**a) - yl)
    if resid.size and resid.max() > SOLVER_RESIDUAL:
        bad = int(np.argmax(resid))
        raise SolverError("left-branch inverse residual too large", index=bad, value=float(yl[bad]))
    x[live] = xl
    return x


def inverse_left(alpha, y):
    """Preimage of ``y`` in [0, 1/2] under the left branch; ``y`` in [0, 1].

    Accepts a scalar or an array.  The result satisfies
    ``|x*(1 + 2**alpha * x**alpha) - y| <= 1e-14``.
    """
    a = as_alpha(alpha)
    arr = np.asarray(y, dtype=float)
    if arr.size and (np.nanmin(arr) < 0.0 or np.nanmax(arr) > 1.0 or np.isnan(arr).any()):
        raise ValueError("left inverse needs y in [0, 1]")
    if arr.ndim == 0:
        return _left_scalar(a, 2.0**a, float(arr))
    return _left_array(a, arr)


def inverse_right(y):
    """Preimage ``(y + 1) / 2`` of ``y`` under the right branch.

    For ``y`` within one ulp of 1 the quotient rounds to 1.0; it is pulled
    back to the largest double below 1 so the result stays in [1/2, 1).
    """
    arr = np.asarray(y, dtype=float)
    if arr.size and (arr.min() < 0.0 or arr.max() >= 1.0):
        raise ValueError("right inverse needs y in [0, 1)")
    out = np.minimum((arr + 1.0) / 2.0, np.nextafter(1.0, 0.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PreimageLadder:
    """``a_0 = 1/2`` and ``a_{k+1}`` = left preimage of ``a_k``."""

    alpha: float
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


def preimage_sequence(alpha, n: int, extended: bool = False) -> PreimageLadder:
    """Compute ``a_0, ..., a_n``.

    With ``extended=True`` the recursion runs in ``numpy.longdouble``.
    A solver failure is re-raised with ``index`` set to the failing ``k``.
    """
    a = as_alpha(alpha)
    if n < 0:
        raise ValueError("ladder length must be >= 0")
    if extended:
        vals = np.empty(n + 1, dtype=np.longdouble)
        vals[0] = np.longdouble(0.5)
        for k in range(1, n + 1):
            try:
                vals[k] = _left_array(a, vals[k - 1 : k], dtype=np.longdouble)[0]
            except SolverError as exc:
                raise SolverError(exc.reason, index=k, value=exc.value) from exc
        return PreimageLadder(a, vals)
    c = 2.0**a
    vals = np.empty(n + 1)
    vals[0] = 0.5
    prev = 0.5
    for k in range(1, n + 1):
        prev = _left_scalar(a, c, prev, index=k)
        vals[k] = prev
    return PreimageLadder(a, vals)
