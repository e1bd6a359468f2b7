"""Decay of correlations ``mu(A ∩ T^-n B) - mu(A) mu(B)`` for intervals.

Two estimators:

``ulam``
    ``(pi ⊙ 1_A) P^n 1_B`` with ``P`` the Ulam matrix and ``pi`` its
    stationary vector; ``P^n`` is never formed, the row vector is advanced
    one sparse product per lag.
``montecarlo``
    fraction of pairs ``(x_k, x_{k+n})`` with ``x_k in A`` and
    ``x_{k+n} in B`` along independent burnt-in orbits; the spread across
    orbits gives the standard error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .experiments import sample_mu_typical, trial_seed
from .map_core import as_alpha
from .measure_est import Partition, build_partition, stationary_density, ulam_matrix


@dataclass(frozen=True)
class CorrelationSeries:
    alpha: float
    A: tuple[float, float]
    B: tuple[float, float]
    lags: np.ndarray
    raw: np.ndarray
    mu_a: float
    mu_b: float
    method: str
    noise_floor: float
    stderr: np.ndarray | None = None

    @property
    def centered(self) -> np.ndarray:
        return self.raw - self.mu_a * self.mu_b


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    prefactor: float
    n_lo: int
    n_hi: int
    residual_rms: float
    n_used: int


def _interval(I):
    lo, hi = float(I[0]), float(I[1])
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"interval must satisfy 0 <= lo < hi <= 1, got {I!r}")
    return lo, hi


def _check_lags(lags):
    lags = np.asarray(lags, dtype=np.int64)
    if lags.ndim != 1 or lags.size == 0 or lags.min() < 0 or np.any(np.diff(lags) <= 0):
        raise ValueError("lags must be a nonempty strictly increasing list of integers >= 0")
    return lags


def correlation_series(
    alpha,
    A=(0.5, 1.0),
    B=(0.5, 1.0),
    lags=range(0, 65),
    method: str = "ulam",
    *,
    partition: Partition | None = None,
    n_cells: int = 8192,
    n_samples: int = 2 * 10**6,
    n_orbits: int = 32,
    seed: int = 0,
    burn_in: int = 10**4,
) -> CorrelationSeries:
    """Joint measures ``mu(A ∩ T^-n B)`` for each lag ``n``.

    For ``ulam`` the endpoints of ``A`` and ``B`` must be partition
    boundaries (``partition`` defaults to a geometric one with ``n_cells``
    cells).  For ``montecarlo``, ``n_orbits`` orbits of ``n_samples`` start
    points each are used; their seeds derive from ``seed`` as trial seeds.
    """
    a = as_alpha(alpha)
    A, B = _interval(A), _interval(B)
    lags = _check_lags(lags)
    if method == "ulam":
        part = build_partition(n_cells, "geometric") if partition is None else partition
        for x in A + B:
            if not part.has_boundary(x):
                raise ValueError(f"set endpoint {x} is not a partition boundary")
        ulam = ulam_matrix(a, part)
        dens = stationary_density(ulam)
        mids = 0.5 * (part.boundaries[:-1] + part.boundaries[1:])
        in_a = (mids >= A[0]) & (mids < A[1])
        in_b = (mids >= B[0]) & (mids < B[1])
        MT = ulam.matrix.T.tocsr()
        v = np.where(in_a, dens.weights, 0.0)
        raw = np.empty(lags.size)
        step = 0
        for j, lag in enumerate(lags):
            while step < lag:
                v = MT @ v
                step += 1
            raw[j] = v[in_b].sum()
        return CorrelationSeries(
            a, A, B, lags, raw, float(dens.weights[in_a].sum()), float(dens.weights[in_b].sum()),
            "ulam", 2.0 / part.n_cells,
        )
    if method == "montecarlo":
        if n_samples < 1 or n_orbits < 2:
            raise ValueError("montecarlo needs n_samples >= 1 and n_orbits >= 2")
        per = np.empty((n_orbits, lags.size))
        mu_a = np.empty(n_orbits)
        mu_b = np.empty(n_orbits)
        for t in range(n_orbits):
            x = sample_mu_typical(a, trial_seed(seed, t), burn_in)
            counts, n_a, n_b = _kernels.joint_counts(x, a, int(n_samples), lags, A[0], A[1], B[0], B[1])
            per[t] = counts / n_samples
            mu_a[t] = n_a / n_samples
            mu_b[t] = n_b / n_samples
        total = n_samples * n_orbits
        return CorrelationSeries(
            a, A, B, lags, per.mean(0), float(mu_a.mean()), float(mu_b.mean()),
            "montecarlo", 3.0 / np.sqrt(total), per.std(0, ddof=1) / np.sqrt(n_orbits),
        )
    raise ValueError(f"unknown method {method!r}")


def decay_exponent_fit(series: CorrelationSeries, n_lo: int, n_hi: int) -> DecayFit:
    """Slope of ``log |centered|`` against ``log n`` on lags in ``[n_lo, n_hi]``.

    Lags whose centered value does not exceed the series noise floor are
    dropped; at least 5 must remain.
    """
    lags = series.lags
    c = np.abs(series.centered)
    sel = (lags >= max(n_lo, 1)) & (lags <= n_hi)
    if not sel.any():
        raise ValueError(f"no lags in [{n_lo}, {n_hi}]")
    usable = sel & (c > series.noise_floor)
    if usable.sum() < 5:
        raise ValueError(
            f"only {usable.sum()} of {sel.sum()} lags in [{n_lo}, {n_hi}] exceed the noise floor "
            f"{series.noise_floor:.3g}; refusing to fit"
        )
    lx, ly = np.log(lags[usable]), np.log(c[usable])
    slope, icept = np.polyfit(lx, ly, 1)
    rms = float(np.sqrt(np.mean((ly - slope * lx - icept) ** 2)))
    return DecayFit(float(slope), float(np.exp(icept)), int(n_lo), int(n_hi), rms, int(usable.sum()))
