"""Monte Carlo harnesses for the run-length limit laws.

Every trial draws its start point from its own Philox stream, seeded from
``(master_seed, trial)`` through :class:`numpy.random.SeedSequence`, and
pushes it forward ``burn_in`` steps to approximate a sample from the
invariant measure.  Trials share nothing, so a table depends only on its
:class:`TrialPlan`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, _kernels
from .map_core import _check_point, as_alpha
from .tables import ExperimentTable


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed of trial ``trial``: a hash of ``(master_seed, trial)``."""
    ss = np.random.SeedSequence([int(master_seed), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_mu_typical(alpha, seed: int, burn_in: int = 10**4) -> float:
    """``T^burn_in(u)`` for ``u`` uniform on [0, 1) from a Philox stream."""
    a = as_alpha(alpha)
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    u = float(np.random.Generator(np.random.Philox(int(seed))).random())
    return float(_kernels.iterate(u, a, int(burn_in))[0])


def typical_starts(alpha, master_seed: int, trials: int, burn_in: int = 10**4) -> np.ndarray:
    """``sample_mu_typical`` for trials ``0..trials-1``, vectorised."""
    a = as_alpha(alpha)
    u = np.array(
        [np.random.Generator(np.random.Philox(trial_seed(master_seed, t))).random() for t in range(trials)]
    )
    return _kernels.iterate_batch(u, a, int(burn_in))


@dataclass(frozen=True)
class TrialPlan:
    alpha: float
    n_grid: tuple
    trials: int
    master_seed: int = 0
    burn_in: int = 10**4
    x0: float | None = None  # diagnostic: force every trial to start here

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_alpha(self.alpha))
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be a nonempty strictly increasing list of positive integers")
        object.__setattr__(self, "n_grid", grid)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.x0 is not None:
            _check_point(self.x0)

    def start(self, trial: int) -> float:
        if self.x0 is not None:
            return float(self.x0)
        return sample_mu_typical(self.alpha, trial_seed(self.master_seed, trial), self.burn_in)

    def starts(self) -> np.ndarray:
        """Start points of all trials (burn-in done in one parallel batch)."""
        if self.x0 is not None:
            return np.full(self.trials, float(self.x0))
        return typical_starts(self.alpha, self.master_seed, self.trials, self.burn_in)

    def metadata(self, **extra) -> dict:
        meta = {k: v for k, v in asdict(self).items()}
        meta["n_grid"] = list(self.n_grid)
        meta["code_version"] = __version__
        meta.update(extra)
        return meta


def runlength_scaling_experiment(plan: TrialPlan) -> ExperimentTable:
    """One orbit per trial; record ``r_n``, ``R_n`` and their normalised ratios.

    Statistics: ``r_n``, ``R_n``, ``ratio_r = log r_n / (alpha log n)`` and
    ``ratio_R = R_n / log2 n`` at each grid horizon.
    """
    a = plan.alpha
    grid = np.asarray(plan.n_grid, dtype=np.int64)
    rows = []
    for t, runs in enumerate(_kernels.runs_batch(plan.starts(), a, grid)):
        for n, (r0, r1) in zip(plan.n_grid, runs):
            r0, r1 = int(r0), int(r1)
            rows.append((a, n, t, "r_n", float(r0)))
            rows.append((a, n, t, "R_n", float(r1)))
            ratio_r = math.log(r0) / (a * math.log(n)) if r0 > 0 and n > 1 else math.nan
            ratio_R = r1 / math.log2(n) if n > 1 else math.nan
            rows.append((a, n, t, "ratio_r", ratio_r))
            rows.append((a, n, t, "ratio_R", ratio_R))
    return ExperimentTable(rows, plan.metadata(experiment="scaling"))


@dataclass(frozen=True)
class WindowMode:
    """Window schedule for the maximal windowed averages.

    ``zero``: ``K(n) = floor(n**alpha1)`` on digit 0, needs ``alpha1 < alpha``.
    ``one``: ``K(n) = ceil(coef * log2 n)`` on digit 1, needs ``coef <= 1``.
    """

    kind: str
    alpha1: float | None = None
    coef: float | None = None

    def validate(self, alpha: float):
        if self.kind == "zero":
            if self.alpha1 is None or not 0 < self.alpha1 < alpha:
                raise ValueError(f"zero mode needs 0 < alpha1 < alpha = {alpha}, got alpha1={self.alpha1}")
        elif self.kind == "one":
            if self.coef is None or not 0 < self.coef <= 1:
                raise ValueError(f"one mode needs 0 < coef <= 1 (limsup k(n)/log2 n <= 1), got {self.coef}")
        else:
            raise ValueError(f"unknown window mode {self.kind!r}")

    def window(self, n: int) -> int:
        if self.kind == "zero":
            return max(1, math.floor(n**self.alpha1))
        return max(1, math.ceil(self.coef * math.log2(n)))

    @property
    def digit(self) -> int:
        return 0 if self.kind == "zero" else 1


def erdos_renyi_window_experiment(plan: TrialPlan, mode: WindowMode) -> ExperimentTable:
    """Maximal average of the digit indicator over windows of length ``K(n)``.

    Records ``window`` (K), ``max_sum`` and ``max_average = max_sum / K``.
    """
    a = plan.alpha
    mode.validate(a)
    grid = np.asarray(plan.n_grid, dtype=np.int64)
    wins = np.array([mode.window(n) for n in plan.n_grid], dtype=np.int64)
    if np.any(wins > grid):
        raise ValueError("window longer than its horizon")
    rows = []
    for t, best in enumerate(_kernels.windows_batch(plan.starts(), a, grid, wins, mode.digit)):
        for n, K, s in zip(plan.n_grid, wins, best):
            rows.append((a, n, t, "window", float(K)))
            rows.append((a, n, t, "max_sum", float(s)))
            rows.append((a, n, t, "max_average", float(s) / float(K)))
    meta = plan.metadata(experiment="windows", mode=asdict(mode))
    return ExperimentTable(rows, meta)


@dataclass(frozen=True)
class BlockSchedule:
    """Block lengths of the lower-bound arguments.

    ``zero``: ``t_n = ceil(n**(alpha - eps))``, ``k_n = floor(n / t_n**(1 + eps))``.
    ``one``: ``t_n = ceil((1 - eps) log2 n)``,
    ``l_n = floor(2**(alpha t_n (1 + eps) / (1 - alpha)))``, ``k_n = floor(n / l_n)``.
    """

    alpha: float
    variant: str
    epsilon: float
    min_valid_n: int = field(init=False)

    def __post_init__(self):
        a = as_alpha(self.alpha)
        object.__setattr__(self, "alpha", a)
        e = float(self.epsilon)
        if self.variant == "zero":
            if not 0 < e < a:
                raise ValueError(f"zero schedule needs 0 < epsilon < alpha, got {e}")
        elif self.variant == "one":
            if not (e > 0 and a / (1 - a) - e - e * e / (1 - a) > 0):
                raise ValueError(
                    f"one schedule needs epsilon > 0 with alpha/(1-alpha) - eps - eps^2/(1-alpha) > 0, got {e}"
                )
            # l_n ~ n**growth, so k_n = n // l_n vanishes for good once growth >= 1
            growth = a * (1 + e) * (1 - e) / (1 - a)
            if growth >= 1:
                raise ValueError(
                    f"one schedule is degenerate: l_n grows like n**{growth:.3f} >= n, so k_n = 0 for all large n"
                )
        else:
            raise ValueError(f"unknown schedule variant {self.variant!r}")
        n = 2
        while not self._valid(n):
            n += 1
            if n > 10**7:
                raise ValueError("schedule never becomes valid below n = 1e7")
        object.__setattr__(self, "min_valid_n", n)

    @classmethod
    def default(cls, alpha, variant: str) -> "BlockSchedule":
        return cls(alpha, variant, 0.1 if variant == "zero" else 0.2)

    def _valid(self, n):
        return self.t(n) >= 1 and self.k(n) >= 1 and (self.variant == "zero" or self.l(n) >= 1)

    def t(self, n: int) -> int:
        if self.variant == "zero":
            return math.ceil(n ** (self.alpha - self.epsilon))
        return math.ceil((1 - self.epsilon) * math.log2(n))

    def l(self, n: int) -> int:
        if self.variant == "zero":
            return math.floor(self.t(n) ** (1 + self.epsilon))
        return math.floor(2 ** (self.alpha * self.t(n) * (1 + self.epsilon) / (1 - self.alpha)))

    def k(self, n: int) -> int:
        if self.variant == "zero":
            return math.floor(n / self.t(n) ** (1 + self.epsilon))
        l = self.l(n)
        return n // l if l >= 1 else 0


def short_run_probability(alpha, schedule: BlockSchedule, n: int, trials: int, seed: int = 0, burn_in: int = 10**4) -> float:
    """Fraction of trials whose longest run stays below ``t_n``.

    Zero variant uses the 0-runs ``r_n``, one variant the 1-runs ``R_n``.
    Trial ``t`` uses the same orbit for every ``n``.
    """
    a = as_alpha(alpha)
    if schedule.alpha != a:
        raise ValueError("schedule was built for a different alpha")
    if n < schedule.min_valid_n:
        raise ValueError(f"n = {n} is below the schedule's minimal valid n = {schedule.min_valid_n}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tn = schedule.t(n)
    col = 0 if schedule.variant == "zero" else 1
    grid = np.array([n], dtype=np.int64)
    runs = _kernels.runs_batch(typical_starts(a, seed, trials, burn_in), a, grid)
    return int((runs[:, 0, col] < tn).sum()) / trials


def block_experiment(alpha, schedule: BlockSchedule, n_grid, trials: int, seed: int = 0, burn_in: int = 10**4) -> ExperimentTable:
    """:func:`short_run_probability` on a grid, one orbit per trial shared by all ``n``."""
    a = as_alpha(alpha)
    for n in n_grid:
        if n < schedule.min_valid_n:
            raise ValueError(f"n = {n} is below the schedule's minimal valid n = {schedule.min_valid_n}")
    grid = np.asarray(n_grid, dtype=np.int64)
    col = 0 if schedule.variant == "zero" else 1
    tn = np.array([schedule.t(int(n)) for n in grid])
    runs = _kernels.runs_batch(typical_starts(a, seed, trials, burn_in), a, grid)
    short = (runs[:, :, col] < tn).sum(axis=0)
    rows = []
    for n, tv, s in zip(grid, tn, short):
        rows.append((a, int(n), -1, "t_n", float(tv)))
        rows.append((a, int(n), -1, "k_n", float(schedule.k(int(n)))))
        rows.append((a, int(n), -1, "short_run_probability", s / trials))
    meta = {
        "experiment": "blocks", "alpha": a, "variant": schedule.variant, "epsilon": schedule.epsilon,
        "trials": trials, "master_seed": seed, "burn_in": burn_in, "code_version": __version__,
    }
    return ExperimentTable(rows, meta)


def median_trend(table: ExperimentTable, statistic: str, target: float = 1.0):
    """Per-horizon medians and MADs of a statistic, and whether they approach ``target``.

    The trend counts as monotone when each step satisfies
    ``|med_{j+1} - target| <= |med_j - target| + MAD_{j+1}``.
    """
    ns = sorted(set(table.column("n")))
    meds, mads = [], []
    for n in ns:
        v = np.asarray(table.values(statistic, n), dtype=float)
        m = float(np.median(v))
        meds.append(m)
        mads.append(float(np.median(np.abs(v - m))))
    # integer statistics make exact ties common (e.g. R_n = 12 -> 14 with MAD 1
    # lands precisely on the bound), so compare with a rounding allowance
    ok = all(
        abs(meds[j + 1] - target) <= abs(meds[j] - target) + mads[j + 1] + 1e-12 for j in range(len(ns) - 1)
    )
    return ns, meds, mads, ok
