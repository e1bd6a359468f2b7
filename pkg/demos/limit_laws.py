"""
Run-length limit laws at finite n
=================================

Many independent typical orbits, medians of the normalised run lengths
along a grid of horizons, the windowed averages and the block-schedule
probabilities.  Everything is driven by seeded trial plans, so rerunning
prints the same numbers.
"""

import numpy as np

from runlength_lab.experiments import (
    BlockSchedule,
    TrialPlan,
    WindowMode,
    block_experiment,
    erdos_renyi_window_experiment,
    median_trend,
    runlength_scaling_experiment,
)

plan = TrialPlan(0.5, (10**4, 10**5, 10**6, 10**7), trials=40, master_seed=0)
tab = runlength_scaling_experiment(plan)
for stat in ("ratio_r", "ratio_R"):
    ns, meds, mads, ok = median_trend(tab, stat)
    print(stat, [f"{m:.3f}±{d:.3f}" for m, d in zip(meds, mads)], "approaching 1:", ok)
print("median r_n / median R_n at 1e7:", np.median(tab.values("r_n", 10**7)) / np.median(tab.values("R_n", 10**7)))

short = TrialPlan(0.5, (10**5, 10**6, 10**7), trials=20)
for mode in (WindowMode("zero", alpha1=0.3), WindowMode("one", coef=0.9)):
    w = erdos_renyi_window_experiment(short, mode)
    print(mode.kind, "windows", [int(w.values("window", n)[0]) for n in short.n_grid],
          "median max average", [float(np.median(w.values("max_average", n))) for n in short.n_grid])

for var in ("zero", "one"):
    s = BlockSchedule.default(0.5, var)
    p = block_experiment(0.5, s, [10**4, 10**5, 10**6], trials=300).values("short_run_probability")
    print(f"{var}-run block schedule (eps={s.epsilon}): P(run < t_n) =", p)
