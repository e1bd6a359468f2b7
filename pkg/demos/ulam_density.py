"""
Invariant density by Ulam's method
==================================

Discretise the transfer operator on a graded partition, take the stationary
vector and compare it with a long-orbit histogram.  Then look at how the
density blows up at the neutral fixed point.
"""

import numpy as np

from runlength_lab.experiments import sample_mu_typical
from runlength_lab.measure_est import (
    birkhoff_measure,
    build_partition,
    cdf_scaling_fit,
    density_prefactor,
    stationary_density,
    total_variation,
    ulam_matrix,
)

part = build_partition(4096, "geometric")
for alpha in (0.25, 0.5, 0.75):
    dens = stationary_density(ulam_matrix(alpha, part))
    fit = cdf_scaling_fit(dens, 1e-3, 1e-1)
    pf = density_prefactor(dens, 1e-3, 1e-1, alpha=alpha)
    print(f"alpha = {alpha}: mu([1/2,1)) = {dens.mass(0.5, 1.0):.4f}, "
          f"cdf slope {fit.exponent:.4f} (1 - alpha = {1 - alpha}), "
          f"x^alpha h(x) mean {pf.mean:.3f}, (max - min)/mean {100 * pf.relative_variation:.0f}%")

# local slopes show the cdf exponent drifting with x: the power law is only
# reached as x -> 0
alpha = 0.25
dens = stationary_density(ulam_matrix(alpha, part))
for lo in (1e-7, 1e-5, 1e-3, 1e-2, 1e-1):
    print(f"  local cdf slope on [{lo:.0e}, {2 * lo:.0e}]: {cdf_scaling_fit(dens, lo, 2 * lo).exponent:.3f}")

# the histogram of a long orbit should land on the same measure
coarse = build_partition(256)
ulam = stationary_density(ulam_matrix(0.5, coarse))
hist = birkhoff_measure(0.5, sample_mu_typical(0.5, seed=1), 2 * 10**7, 10**4, coarse)
print(f"total variation Ulam vs orbit histogram (N=256): {total_variation(ulam, hist):.4f}")
print("first cells:", np.round(ulam.density[:4], 3), np.round(hist.density[:4], 3))
