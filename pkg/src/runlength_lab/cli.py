"""Command-line front end: ``runlength-lab COMMAND [options]``.

Configuration comes from a TOML file (``--config``) and/or flags; flags win.
Every run writes ``<command>.csv`` and/or ``<command>.json`` plus
``<command>.config.json`` (the effective configuration) into the output
directory, ``$RUNLENGTH_LAB_OUT`` if set, else ``--out``.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 non-convergence, 5 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, SolverError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

COMMANDS = ("orbit", "runlength", "density", "cylinder", "correlation", "scaling", "windows", "blocks", "report")
DENSITY_COLUMNS = ("cell_lo", "cell_hi", "mass", "density")
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4, 5
OUT_ENV = "RUNLENGTH_LAB_OUT"
# keys that change where or how results are written, not what they are
_PRESENTATION_KEYS = ("out", "format", "plot", "threads")


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


@dataclass
class RunConfig:
    command: str | None = None
    alpha: list = field(default_factory=lambda: [0.5])
    n: list = field(default_factory=lambda: [10**4, 10**5, 10**6])
    trials: int = 20
    seed: int = 0
    cells: int = 4096
    grading: str = "geometric"
    burn_in: int = 10**4
    out: str = "out"
    format: str = "both"
    plot: bool = False
    threads: int = 1
    x0: float | None = None
    fit_lo: float = 1e-3
    fit_hi: float = 1e-1
    k_max: int = 1000
    max_lag: int = 128
    lag_lo: int = 8
    lag_hi: int = 128
    method: str = "ulam"
    samples: int = 10**6
    orbits: int = 16
    mode: str = "zero"
    alpha1: float = 0.3
    k_coef: float = 0.9
    variant: str = "both"
    epsilon: float | None = None
    input: str | None = None

    def effective(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        d = {k: v for k, v in self.effective().items() if k not in _PRESENTATION_KEYS}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


_INT_KEYS = {"trials", "seed", "cells", "burn_in", "threads", "k_max", "max_lag", "lag_lo", "lag_hi", "samples", "orbits"}
_FLOAT_KEYS = {"x0", "fit_lo", "fit_hi", "alpha1", "k_coef", "epsilon"}
_CHOICES = {
    "command": COMMANDS,
    "grading": ("uniform", "geometric"),
    "format": ("csv", "json", "both"),
    "method": ("ulam", "montecarlo", "birkhoff"),
    "mode": ("zero", "one"),
    "variant": ("zero", "one", "both"),
}


def _as_int(key, v):
    if isinstance(v, bool):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if isinstance(v, str):
        try:
            v = int(float(v)) if v.strip().lower().replace("e", "", 1).replace(".", "", 1).isdigit() else int(v)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {v!r}") from None
    if not isinstance(v, int):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    return v


def _as_float(key, v):
    if isinstance(v, bool):
        raise ConfigError(key, f"expected a number, got {v!r}")
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {v!r}") from None
    if math.isnan(v):
        raise ConfigError(key, "NaN is not allowed")
    return v


def _as_list(key, v, conv):
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
    elif not isinstance(v, (list, tuple)):
        v = [v]
    if not v:
        raise ConfigError(key, "empty list")
    return [conv(key, x) for x in v]


def _coerce(key, v):
    if key == "alpha":
        return _as_list(key, v, _as_float)
    if key == "n":
        return _as_list(key, v, _as_int)
    if key in _INT_KEYS:
        return _as_int(key, v)
    if key in _FLOAT_KEYS:
        return None if v is None else _as_float(key, v)
    if key == "plot":
        if not isinstance(v, bool):
            raise ConfigError(key, f"expected true/false, got {v!r}")
        return v
    if not isinstance(v, str):
        raise ConfigError(key, f"expected a string, got {v!r}")
    if key in _CHOICES and v not in _CHOICES[key]:
        raise ConfigError(key, f"must be one of {', '.join(_CHOICES[key])}, got {v!r}")
    return v


def validate(cfg: RunConfig) -> RunConfig:
    """Check every field against the preconditions of the command it feeds."""
    if cfg.command is None:
        raise ConfigError("command", f"no command given (one of {', '.join(COMMANDS)})")
    if cfg.command in ("orbit", "density") and len(cfg.alpha) != 1:
        raise ConfigError("alpha", f"{cfg.command} takes a single alpha")
    for a in cfg.alpha:
        if not 0.0 < a < 1.0:
            raise ConfigError("alpha", f"must lie in the open interval (0, 1), got {a}")
    if any(n < 1 for n in cfg.n) or any(b <= a for a, b in zip(cfg.n, cfg.n[1:])):
        raise ConfigError("n", "horizons must be positive and strictly increasing")
    if cfg.trials < 1:
        raise ConfigError("trials", "must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    if cfg.cells < 2:
        raise ConfigError("cells", "must be >= 2")
    if cfg.burn_in < 0:
        raise ConfigError("burn_in", "must be >= 0")
    if cfg.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    if cfg.x0 is not None and not 0.0 <= cfg.x0 < 1.0:
        raise ConfigError("x0", "must lie in [0, 1)")
    if cfg.command == "density" and not 0.0 < cfg.fit_lo < cfg.fit_hi < 0.5:
        raise ConfigError("fit_lo", "fit range must satisfy 0 < fit_lo < fit_hi < 1/2")
    if cfg.k_max < 1:
        raise ConfigError("k_max", "must be >= 1")
    if cfg.command == "correlation":
        if cfg.max_lag < 1:
            raise ConfigError("max_lag", "must be >= 1")
        if not 1 <= cfg.lag_lo < cfg.lag_hi:
            raise ConfigError("lag_lo", "lag fit range must satisfy 1 <= lag_lo < lag_hi")
        if cfg.method == "birkhoff":
            raise ConfigError("method", "correlation supports ulam or montecarlo")
        if cfg.method == "montecarlo" and (cfg.samples < 1 or cfg.orbits < 2):
            raise ConfigError("orbits", "montecarlo needs samples >= 1 and orbits >= 2")
    if cfg.command == "density" and cfg.method == "montecarlo":
        raise ConfigError("method", "density supports ulam or birkhoff")
    if cfg.command == "windows":
        for a in cfg.alpha:
            if cfg.mode == "zero" and not 0.0 < cfg.alpha1 < a:
                raise ConfigError("alpha1", f"zero-digit windows need 0 < alpha1 < alpha = {a}")
        if cfg.mode == "one" and not 0.0 < cfg.k_coef <= 1.0:
            raise ConfigError("k_coef", "one-digit windows need 0 < k_coef <= 1")
    if cfg.command == "blocks":
        from .experiments import BlockSchedule

        for a in cfg.alpha:
            for var in _variants(cfg):
                try:
                    sched = _schedule(a, var, cfg.epsilon)
                except ValueError as exc:
                    raise ConfigError("epsilon", str(exc)) from None
                if cfg.n[0] < sched.min_valid_n:
                    raise ConfigError("n", f"horizon {cfg.n[0]} below the schedule's minimal valid n {sched.min_valid_n}")
        del BlockSchedule
    if cfg.command == "report" and not cfg.input:
        raise ConfigError("input", "report needs --input pointing at an existing table")
    return cfg


def _variants(cfg):
    return ("zero", "one") if cfg.variant == "both" else (cfg.variant,)


def _schedule(alpha, variant, epsilon):
    from .experiments import BlockSchedule

    if epsilon is None:
        return BlockSchedule.default(alpha, variant)
    return BlockSchedule(alpha, variant, epsilon)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="runlength-lab", description="Run-length laboratory for intermittent maps")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--alpha", metavar="F[,F...]")
    p.add_argument("--n", metavar="INT[,INT...]")
    p.add_argument("--trials", type=str)
    p.add_argument("--seed", type=str)
    p.add_argument("--cells", type=str)
    p.add_argument("--grading")
    p.add_argument("--burn-in", dest="burn_in", type=str)
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--format")
    p.add_argument("--plot", action="store_const", const=True, default=None)
    p.add_argument("--threads", type=str)
    p.add_argument("--x0", type=str)
    p.add_argument("--fit-lo", dest="fit_lo", type=str)
    p.add_argument("--fit-hi", dest="fit_hi", type=str)
    p.add_argument("--k-max", dest="k_max", type=str)
    p.add_argument("--max-lag", dest="max_lag", type=str)
    p.add_argument("--lag-lo", dest="lag_lo", type=str)
    p.add_argument("--lag-hi", dest="lag_hi", type=str)
    p.add_argument("--method")
    p.add_argument("--samples", type=str)
    p.add_argument("--orbits", type=str)
    p.add_argument("--mode")
    p.add_argument("--alpha1", type=str)
    p.add_argument("--k-coef", dest="k_coef", type=str)
    p.add_argument("--variant")
    p.add_argument("--epsilon", type=str)
    p.add_argument("--input", metavar="PATH")
    return p


def parse_config(argv=None, env=None) -> RunConfig:
    """Merge defaults, the optional TOML file and flags into a validated config."""
    env = os.environ if env is None else env
    args = build_parser().parse_args(argv)
    values = {}
    known = {f.name for f in fields(RunConfig)}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                doc = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("config", f"{args.config} is not valid TOML: {exc}") from None
        for key, v in doc.items():
            k = key.replace("-", "_")
            if k not in known:
                raise ConfigError(key, "unknown key")
            values[k] = _coerce(k, v)
    for k, v in vars(args).items():
        if k == "config" or v is None:
            continue
        values[k] = _coerce(k, v)
    if env.get(OUT_ENV):
        values["out"] = env[OUT_ENV]
    return validate(RunConfig(**values))


# commands ---------------------------------------------------------------

def _meta(cfg: RunConfig, **extra):
    meta = {"config_hash": cfg.config_hash(), "master_seed": cfg.seed, "code_version": __version__}
    meta.update(extra)
    return meta


def _partition(cfg):
    from .measure_est import build_partition

    return build_partition(cfg.cells, cfg.grading)


def cmd_orbit(cfg):
    from .experiments import sample_mu_typical
    from .map_core import orbit_array
    from .tables import ExperimentTable

    a = cfg.alpha[0]
    x0 = cfg.x0 if cfg.x0 is not None else sample_mu_typical(a, cfg.seed, cfg.burn_in)
    n = cfg.n[-1]
    pts, digits = orbit_array(a, x0, n)
    rows = [(k, float(p), int(d)) for k, (p, d) in enumerate(zip(pts, digits))]
    return ExperimentTable(rows, _meta(cfg, alpha=a, x0=x0), ("k", "point", "digit"))


def _plan(cfg, a):
    from .experiments import TrialPlan

    return TrialPlan(a, tuple(cfg.n), cfg.trials, cfg.seed, cfg.burn_in, cfg.x0)


def cmd_runlength(cfg):
    from .experiments import runlength_scaling_experiment
    from .tables import ExperimentTable

    rows = []
    for a in cfg.alpha:
        tab = runlength_scaling_experiment(_plan(cfg, a))
        rows += [r for r in tab.rows if r[3] in ("r_n", "R_n")]
    return ExperimentTable(rows, _meta(cfg, experiment="runlength"))


def cmd_scaling(cfg):
    from .experiments import median_trend, runlength_scaling_experiment
    from .tables import ExperimentTable

    rows, summary = [], {}
    for a in cfg.alpha:
        tab = runlength_scaling_experiment(_plan(cfg, a))
        rows += tab.rows
        for stat in ("ratio_r", "ratio_R"):
            ns, meds, mads, ok = median_trend(tab, stat)
            summary[f"{a}:{stat}"] = {"n": ns, "median": meds, "mad": mads, "trend_to_1": ok}
    return ExperimentTable(rows, _meta(cfg, experiment="scaling", summary=summary))


def cmd_windows(cfg):
    from .experiments import WindowMode, erdos_renyi_window_experiment
    from .tables import ExperimentTable

    mode = WindowMode("zero", alpha1=cfg.alpha1) if cfg.mode == "zero" else WindowMode("one", coef=cfg.k_coef)
    rows, summary = [], {}
    for a in cfg.alpha:
        tab = erdos_renyi_window_experiment(_plan(cfg, a), mode)
        rows += tab.rows
        summary[str(a)] = {str(n): float(np.median(tab.values("max_average", n))) for n in cfg.n}
    return ExperimentTable(rows, _meta(cfg, experiment="windows", mode=asdict(mode), median_max_average=summary))


def cmd_blocks(cfg):
    from .experiments import block_experiment
    from .tables import ExperimentTable

    rows = []
    for a in cfg.alpha:
        for var in _variants(cfg):
            sched = _schedule(a, var, cfg.epsilon)
            tab = block_experiment(a, sched, cfg.n, cfg.trials, cfg.seed, cfg.burn_in)
            rows += [(a, n, t, f"{var}:{stat}", v) for a, n, t, stat, v in tab.rows]
    return ExperimentTable(rows, _meta(cfg, experiment="blocks"))


def cmd_density(cfg):
    from .measure_est import birkhoff_measure, cdf_scaling_fit, density_prefactor, stationary_density, ulam_matrix
    from .experiments import sample_mu_typical
    from .tables import ExperimentTable

    part = _partition(cfg)
    rows, fits = [], {}
    for a in cfg.alpha[:1]:
        if cfg.method == "birkhoff":
            x0 = cfg.x0 if cfg.x0 is not None else sample_mu_typical(a, cfg.seed, 0)
            dens = birkhoff_measure(a, x0, cfg.n[-1], cfg.burn_in, part)
        else:
            dens = stationary_density(ulam_matrix(a, part))
        b = part.boundaries
        rows += [(float(lo), float(hi), float(m), float(h)) for lo, hi, m, h in zip(b[:-1], b[1:], dens.weights, dens.density)]
        cf = cdf_scaling_fit(dens, cfg.fit_lo, cfg.fit_hi)
        pf = density_prefactor(dens, cfg.fit_lo, cfg.fit_hi, alpha=a)
        fits[str(a)] = {
            "cdf_exponent": cf.exponent, "cdf_prefactor": cf.prefactor, "cdf_residual_rms": cf.residual_rms,
            "prefactor_mean": pf.mean, "prefactor_relative_variation": pf.relative_variation,
        }
    meta = _meta(
        cfg, experiment="density", alpha=cfg.alpha[0], method=cfg.method, fit_range=[cfg.fit_lo, cfg.fit_hi], fits=fits
    )
    return ExperimentTable(rows, meta, DENSITY_COLUMNS)


def cmd_cylinder(cfg):
    import warnings

    from .errors import SubCellWarning
    from .measure_est import cylinder_measure, fit_loglog, stationary_density, ulam_matrix
    from .tables import ExperimentTable

    part = _partition(cfg)
    rows, fits = [], {}
    k_ones = range(1, min(cfg.k_max, 40) + 1)
    k_zeros = range(1, cfg.k_max + 1)
    for a in cfg.alpha:
        dens = stationary_density(ulam_matrix(a, part))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SubCellWarning)
            ones = [cylinder_measure(a, k, 1, dens) for k in k_ones]
            zeros = [cylinder_measure(a, k, 0, dens) for k in k_zeros]
        rows += [(a, k, 0, "mu_ones", m) for k, m in zip(k_ones, ones)]
        rows += [(a, k, 0, "mu_zeros", m) for k, m in zip(k_zeros, zeros)]
        f = {}
        sel = [(k, m) for k, m in zip(k_ones, ones) if 4 <= k <= 14]
        if len(sel) >= 2:
            f["ones_log2_slope"] = fit_loglog(2.0 ** np.array([k for k, _ in sel]), [m for _, m in sel], base=2).exponent
        sel = [(k, m) for k, m in zip(k_zeros, zeros) if 10 <= k]
        if len(sel) >= 2:
            f["zeros_loglog_slope"] = fit_loglog([k for k, _ in sel], [m for _, m in sel]).exponent
        fits[str(a)] = f
    return ExperimentTable(rows, _meta(cfg, experiment="cylinder", fits=fits))


def cmd_correlation(cfg):
    from .correlation import correlation_series, decay_exponent_fit
    from .tables import ExperimentTable

    lags = range(0, cfg.max_lag + 1)
    rows, fits = [], {}
    for a in cfg.alpha:
        if cfg.method == "ulam":
            s = correlation_series(a, lags=lags, method="ulam", partition=_partition(cfg))
        else:
            s = correlation_series(
                a, lags=lags, method="montecarlo", n_samples=cfg.samples, n_orbits=cfg.orbits,
                seed=cfg.seed, burn_in=cfg.burn_in,
            )
        for j, lag in enumerate(s.lags):
            rows.append((a, int(lag), 0, "raw", float(s.raw[j])))
            rows.append((a, int(lag), 0, "centered", float(s.centered[j])))
            if s.stderr is not None:
                rows.append((a, int(lag), 0, "stderr", float(s.stderr[j])))
        try:
            fit = decay_exponent_fit(s, cfg.lag_lo, min(cfg.lag_hi, cfg.max_lag))
            fits[str(a)] = {"exponent": fit.exponent, "prefactor": fit.prefactor, "lags_used": fit.n_used}
        except ValueError as exc:
            fits[str(a)] = {"refused": str(exc)}
    meta = _meta(cfg, experiment="correlation", method=cfg.method, A=[0.5, 1.0], B=[0.5, 1.0], fits=fits)
    return ExperimentTable(rows, meta)


def cmd_report(cfg):
    from .tables import LONG_COLUMNS, ExperimentTable

    try:
        src = ExperimentTable.read(cfg.input)
    except OSError:
        raise
    except (ValueError, KeyError, StopIteration) as exc:
        raise ConfigError("input", f"cannot parse {cfg.input}: {exc}") from None
    if src.columns != LONG_COLUMNS:
        raise ConfigError("input", "report needs a long-form (alpha, n, trial, statistic, value) table")
    groups = {}
    for a, n, _, stat, v in src.rows:
        groups.setdefault((stat, a, n), []).append(v)
    rows = []
    for (stat, a, n), vals in groups.items():
        v = np.asarray(vals, dtype=float)
        med = float(np.median(v))
        rows.append((a, n, -1, f"{stat}:median", med))
        rows.append((a, n, -1, f"{stat}:mad", float(np.median(np.abs(v - med)))))
        rows.append((a, n, -1, f"{stat}:count", float(v.size)))
    meta = _meta(cfg, experiment="report", source=str(cfg.input), source_metadata=src.metadata)
    return ExperimentTable(rows, meta)


_DISPATCH = {
    "orbit": cmd_orbit, "runlength": cmd_runlength, "density": cmd_density, "cylinder": cmd_cylinder,
    "correlation": cmd_correlation, "scaling": cmd_scaling, "windows": cmd_windows, "blocks": cmd_blocks,
    "report": cmd_report,
}


def _plot(table, path, stamp):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "runlength-lab"
    fig, ax = plt.subplots(figsize=(6, 4))
    cols = table.columns
    if cols == ("k", "point", "digit"):
        ax.plot(table.column("k"), table.column("point"), ".", ms=2)
        ax.set_xlabel("k")
        ax.set_ylabel("T^k x0")
    elif cols == DENSITY_COLUMNS:
        lo, h = np.array(table.column("cell_lo")), np.array(table.column("density"))
        ax.loglog(np.maximum(lo, 1e-300), h, ".", ms=2)
        ax.set_xlabel("x")
        ax.set_ylabel("h(x)")
    else:
        for stat in sorted(set(table.column("statistic"))):
            pts = table.select(statistic=stat)
            ax.plot([r[1] for r in pts], [r[4] for r in pts], ".", ms=3, label=stat)
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": stamp})
    plt.close(fig)


def run_command(cfg: RunConfig) -> int:
    """Run a validated config and write its artifacts; return the exit status."""
    if cfg.threads > 1:
        import numba

        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
    written = []
    try:
        table = _DISPATCH[cfg.command](cfg)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = cfg.command + "_summary" if cfg.command == "report" else cfg.command
        fmts = ("csv", "json") if cfg.format == "both" else (cfg.format,)
        for fmt in fmts:
            p = out / f"{stem}.{fmt}"
            written.append(p)
            table.write(p, fmt)
        echo = out / f"{stem}.config.json"
        written.append(echo)
        echo.write_text(json.dumps({"config": cfg.effective(), "config_hash": cfg.config_hash()}, sort_keys=True, indent=1) + "\n")
        if cfg.plot:
            p = out / f"{stem}.svg"
            written.append(p)
            _plot(table, p, f"config_hash={cfg.config_hash()} master_seed={cfg.seed}")
    except BaseException as exc:
        for p in written:
            Path(p).unlink(missing_ok=True)
        if isinstance(exc, ConfigError):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if isinstance(exc, SolverError):
            print(f"solver failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        if isinstance(exc, ConvergenceError):
            print(f"non-convergence: {exc}", file=sys.stderr)
            return EXIT_CONVERGENCE
        if isinstance(exc, OSError):
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        if isinstance(exc, ValueError):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise
    print(f"{cfg.command}: config {cfg.config_hash()}, seed {cfg.seed}")
    for p in written:
        print(f"  wrote {p}")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
