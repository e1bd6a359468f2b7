"""
Orbits, itineraries and run lengths
===================================

Follow one orbit of the intermittent map, read off its 0/1 itinerary and
watch the two run-length functions grow at very different speeds.
"""

import math

import numpy as np

from runlength_lab import orbit_array, preimage_sequence
from runlength_lab.experiments import sample_mu_typical
from runlength_lab.runlength import feed_all, longest_run

alpha = 0.5

# hand-checkable start: 3/4 -> 1/2 -> 0 and then stuck at the fixed point
pts, digits = orbit_array(alpha, 0.75, 4)
print("orbit of 0.75:", pts.tolist(), "digits", digits.tolist())

# a typical start: Lebesgue draw pushed through a burn-in
x0 = sample_mu_typical(alpha, seed=7)
pts, digits = orbit_array(alpha, x0, 10**6)
state = feed_all(digits[:20000])
print(f"after 2e4 steps: r_n = {state.max_run_0}, R_n = {state.max_run_1}")

for n in (10**3, 10**4, 10**5, 10**6):
    r, R = longest_run(digits[:n], 0), longest_run(digits[:n], 1)
    print(f"n = {n:>8d}  r_n = {r:6d}  log r_n/(alpha log n) = {math.log(r) / (alpha * math.log(n)):.3f}"
          f"  R_n = {R:3d}  R_n/log2 n = {R / math.log2(n):.3f}")

# long 0-runs come from visits close to 0; the ladder a_k says how close
lad = preimage_sequence(alpha, 10**4).values
k = np.array([10, 100, 1000, 10000])
print("a_k * k^(1/alpha):", (lad[k] * k ** (1 / alpha)).round(4).tolist())
