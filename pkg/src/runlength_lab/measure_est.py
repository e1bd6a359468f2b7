"""Invariant density estimates and the scaling laws they should obey.

Two independent estimators of the invariant measure are provided:

* Ulam's method on a (graded) partition, with matrix entries computed from
  exact interval preimages under both branches;
* empirical (Birkhoff) histograms of long orbits.

The fitting helpers only report exponents and prefactors; no constant is
treated as ground truth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import ConvergenceError, SubCellWarning
from .map_core import _check_point, as_alpha, inverse_left, inverse_right
from .runlength import cylinder_interval


@dataclass(frozen=True)
class Partition:
    """Cell boundaries ``0 = b_0 < b_1 < ... < b_N = 1``."""

    boundaries: np.ndarray
    grading: str = "uniform"
    ratio: float | None = None
    crossover: float | None = None

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or b.size < 2 or b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must increase strictly from 0 to 1")
        object.__setattr__(self, "boundaries", b)

    @property
    def n_cells(self) -> int:
        return self.boundaries.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.boundaries)

    def locate(self, x) -> np.ndarray:
        """Index of the cell containing each ``x``."""
        i = np.searchsorted(self.boundaries, x, side="right") - 1
        return np.clip(i, 0, self.n_cells - 1)

    def has_boundary(self, x, tol=1e-12) -> bool:
        return bool(np.min(np.abs(self.boundaries - x)) <= tol)


def build_partition(
    n_cells: int,
    grading: str = "uniform",
    ratio: float = 2.0,
    crossover: float = 0.5,
    min_width: float = 1e-9,
) -> Partition:
    """Uniform or geometrically graded partition of [0, 1].

    ``geometric``: ``round(N (1 - crossover) / 2)`` uniform cells cover
    ``[crossover, 1]``.  The rest resolve ``[0, crossover]`` with levels
    ``[crossover * ratio**-(j+1), crossover * ratio**-j]``, each split
    log-uniformly, plus one innermost cell ``[0, crossover * ratio**-L]``.
    The depth ``L`` is capped where levels would drop below ``min_width``.
    """
    if n_cells < 2:
        raise ValueError("need at least 2 cells")
    if grading == "uniform":
        return Partition(np.linspace(0.0, 1.0, n_cells + 1), "uniform")
    if grading != "geometric":
        raise ValueError(f"unknown grading {grading!r}")
    if not ratio > 1.0:
        raise ValueError("geometric grading needs ratio > 1 (cells shrink by this factor toward 0)")
    if not 0.0 < crossover < 1.0:
        raise ValueError("crossover must lie in (0, 1)")
    n_uni = max(1, round(n_cells * (1.0 - crossover) / 2.0))
    n_geo = n_cells - n_uni
    if n_geo < 1:
        raise ValueError("too few cells for a geometric partition")
    max_levels = max(1, math.ceil(math.log(crossover / min_width) / math.log(ratio)))
    levels = min(n_geo - 1, max_levels)
    inner = [0.0]
    if levels > 0:
        per = np.full(levels, (n_geo - 1) // levels)
        per[: (n_geo - 1) % levels] += 1
        # per[0] belongs to the level next to the crossover
        for j in range(levels - 1, -1, -1):
            top = crossover * ratio**-j
            bot = top / ratio
            inner.extend(bot * ratio ** (np.arange(per[j]) / per[j]))
    inner.append(crossover)
    outer = np.linspace(crossover, 1.0, n_uni + 1)[1:]
    return Partition(np.concatenate((inner, outer)), "geometric", float(ratio), float(crossover))


@dataclass(frozen=True)
class UlamMatrix:
    """Row-stochastic ``P[i, j] = |A_i ∩ T^-1 A_j| / |A_i|`` (CSR)."""

    matrix: sp.csr_matrix
    partition: Partition
    alpha: float

    @property
    def shape(self):
        return self.matrix.shape


def ulam_matrix(alpha, partition: Partition) -> UlamMatrix:
    """Ulam discretisation from exact branch preimages of the cell boundaries.

    The preimages of all boundaries under both branches form a second
    partition of [0, 1], each piece of which maps onto one cell ``A_j``.
    Merging it with the original partition splits [0, 1] into pieces each
    lying in a single ``A_i`` and a single ``T^-1 A_j``; summing piece
    lengths gives the entries.
    """
    a = as_alpha(alpha)
    b = partition.boundaries
    n = partition.n_cells
    q_left = inverse_left(a, b)
    q_left[-1] = 0.5
    q_right = inverse_right(b[:-1])
    pre = np.concatenate((q_left, q_right[1:], [1.0]))
    # pre has 2n + 1 points and 2n pieces; piece p maps onto cell p mod n
    pts = np.union1d(b, pre)
    lengths = np.diff(pts)
    keep = lengths > 0
    mids = 0.5 * (pts[:-1] + pts[1:])[keep]
    lengths = lengths[keep]
    rows = np.clip(np.searchsorted(b, mids, side="right") - 1, 0, n - 1)
    pieces = np.clip(np.searchsorted(pre, mids, side="right") - 1, 0, 2 * n - 1)
    cols = pieces % n
    vals = lengths / partition.widths[rows]
    P = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    P.sum_duplicates()
    return UlamMatrix(P, partition, a)


@dataclass
class DensityEstimate:
    """Piecewise-constant density: cell masses ``weights`` on ``partition``."""

    partition: Partition
    weights: np.ndarray
    alpha: float | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.partition.n_cells,):
            raise ValueError("one weight per cell required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be nonnegative and sum to 1")
        self.weights = w

    @property
    def density(self) -> np.ndarray:
        return self.weights / self.partition.widths

    def cdf(self, x):
        """``mu([0, x))`` with the density constant inside each cell."""
        F = np.concatenate(([0.0], np.cumsum(self.weights)))
        return np.interp(x, self.partition.boundaries, F)

    def mass(self, lo: float, hi: float) -> float:
        return float(self.cdf(hi) - self.cdf(lo))


def stationary_density(
    P: UlamMatrix,
    partition: Partition | None = None,
    method: str = "direct",
    tol: float = 1e-12,
    maxiter: int = 10**6,
) -> DensityEstimate:
    """Left fixed vector ``pi P = pi`` of an Ulam matrix as a density.

    ``method="direct"`` fixes the last component, solves the remaining balance
    equations by sparse LU and then checks (or polishes) with power sweeps;
    ``method="power"`` runs plain power iteration from the uniform vector.
    Either way the result satisfies ``||pi P - pi||_1 <= tol`` or
    :class:`ConvergenceError` is raised.
    """
    partition = P.partition if partition is None else partition
    M = P.matrix
    n = M.shape[0]
    MT = M.T.tocsr()
    if method == "direct":
        # pin pi[-1] = 1 and solve the other n - 1 balance equations; a dense
        # normalisation row would wreck the sparsity of the LU factors
        A = (sp.identity(n, format="csc") - MT.tocsc())[:-1, :-1]
        rhs = MT[:-1, -1].toarray().ravel()
        pi = np.append(spla.spsolve(A.tocsc(), rhs), 1.0)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
    elif method == "power":
        pi = np.full(n, 1.0 / n)
    else:
        raise ValueError(f"unknown method {method!r}")
    resid = np.inf
    for it in range(maxiter + 1):
        nxt = MT @ pi
        resid = float(np.abs(nxt - pi).sum())
        if resid <= tol:
            break
        pi = nxt / nxt.sum()
    else:
        raise ConvergenceError(f"stationary vector residual {resid:.3e} after {maxiter} sweeps", residual=resid)
    pi = pi / pi.sum()
    return DensityEstimate(partition, pi, P.alpha, {"method": method, "residual": resid, "sweeps": it})


def empirical_measure(points, partition: Partition, alpha: float | None = None) -> DensityEstimate:
    """Histogram of sample points on ``partition``, normalised to mass 1."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("no points")
    counts = np.bincount(partition.locate(pts), minlength=partition.n_cells)
    return DensityEstimate(partition, counts / counts.sum(), alpha, {"samples": int(pts.size)})


def birkhoff_measure(alpha, x0: float, n: int, burn_in: int, partition: Partition) -> DensityEstimate:
    """Histogram of ``T^k x0`` for ``burn_in <= k < burn_in + n``."""
    a = as_alpha(alpha)
    _check_point(x0)
    if n < 1 or burn_in < 0:
        raise ValueError("need n >= 1 and burn_in >= 0")
    x, _ = _kernels.iterate(float(x0), a, int(burn_in))
    counts = _kernels.histogram_orbit(x, a, int(n), partition.boundaries)
    return DensityEstimate(partition, counts / n, a, {"samples": int(n), "burn_in": int(burn_in)})


def total_variation(p: DensityEstimate, q: DensityEstimate) -> float:
    if not np.array_equal(p.partition.boundaries, q.partition.boundaries):
        raise ValueError("densities live on different partitions")
    return 0.5 * float(np.abs(p.weights - q.weights).sum())


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit ``log y = exponent * log x + log prefactor``."""

    exponent: float
    prefactor: float
    x_lo: float
    x_hi: float
    residual_rms: float
    n_points: int


def fit_loglog(x, y, x_lo=None, x_hi=None, base=math.e) -> ScalingFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    lx, ly = np.log(x) / math.log(base), np.log(y) / math.log(base)
    slope, icept = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - (slope * lx + icept)) ** 2)))
    lo = float(x.min()) if x_lo is None else x_lo
    hi = float(x.max()) if x_hi is None else x_hi
    return ScalingFit(float(slope), float(base**icept), lo, hi, rms, int(x.size))


def _check_range(x_lo, x_hi):
    if not (0.0 < x_lo < x_hi < 0.5):
        raise ValueError(f"fit range must satisfy 0 < x_lo < x_hi < 1/2, got [{x_lo}, {x_hi}]")


def cdf_scaling_fit(density: DensityEstimate, x_lo: float = 1e-3, x_hi: float = 1e-1) -> ScalingFit:
    """Slope of ``log mu([0, x))`` against ``log x`` at partition boundaries in range."""
    _check_range(x_lo, x_hi)
    b = density.partition.boundaries
    sel = (b >= x_lo) & (b <= x_hi)
    if sel.sum() < 4:
        raise ValueError(f"only {sel.sum()} partition boundaries in [{x_lo}, {x_hi}]; need 4")
    F = np.concatenate(([0.0], np.cumsum(density.weights)))
    return fit_loglog(b[sel], F[sel], x_lo, x_hi)


@dataclass(frozen=True)
class PrefactorEstimate:
    """Mean and spread of ``x**alpha * h(x)`` over the cells of a range."""

    mean: float
    relative_variation: float
    x_lo: float
    x_hi: float
    n_cells: int
    values: np.ndarray = field(repr=False)


def density_prefactor(
    density: DensityEstimate, x_lo: float = 1e-3, x_hi: float = 1e-1, alpha=None
) -> PrefactorEstimate:
    """Flatness of ``x**alpha * h(x)`` on cells inside ``[x_lo, x_hi]``.

    Each cell is evaluated at the point where ``x**-alpha`` equals its cell
    average, so an exact ``c * x**-alpha`` density gives identical values.
    ``relative_variation`` is ``(max - min) / mean``.
    """
    _check_range(x_lo, x_hi)
    a = as_alpha(density.alpha if alpha is None else alpha)
    b = density.partition.boundaries
    lo, hi = b[:-1], b[1:]
    sel = (lo >= x_lo) & (hi <= x_hi)
    if sel.sum() < 4:
        raise ValueError(f"only {sel.sum()} cells inside [{x_lo}, {x_hi}]; need 4")
    lo, hi = lo[sel], hi[sel]
    h = density.density[sel]
    avg = (hi ** (1 - a) - lo ** (1 - a)) / ((1 - a) * (hi - lo))
    xstar = avg ** (-1.0 / a)
    vals = xstar**a * h
    mean = float(vals.mean())
    return PrefactorEstimate(mean, float((vals.max() - vals.min()) / mean), x_lo, x_hi, int(sel.sum()), vals)


def cylinder_measure(alpha, k: int, digit: int, density: DensityEstimate) -> float:
    """``mu`` of the length-``k`` constant-digit cylinder under ``density``.

    The density is taken constant inside the cell that cuts the cylinder.
    Emits :class:`SubCellWarning` when the cylinder is narrower than that cell.
    """
    cyl = cylinder_interval(alpha, k, digit)
    part = density.partition
    edge = cyl.lo if digit == 1 else cyl.hi
    cell = int(part.locate(min(edge, np.nextafter(1.0, 0.0))))
    if cyl.width < part.widths[cell]:
        warnings.warn(
            f"cylinder of width {cyl.width:.3g} sits inside a cell of width {part.widths[cell]:.3g}",
            SubCellWarning,
            stacklevel=2,
        )
    return density.mass(cyl.lo, cyl.hi)
