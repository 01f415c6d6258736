"""
Noise scaling by code distance
==============================

A surface-code patch of distance d fails once per cycle with probability
P_L(d) = A (p / p_th) ** ((d + 1) / 2). Running the same logical circuit at a
smaller distance raises that rate by a known factor, so the distance itself
becomes the noise knob for zero-noise extrapolation.
"""

import numpy as np

from dszne import DistancePlan, NoiseModel, ds_scale_factors, logical_error_rate, virtual_cores

model = NoiseModel(p=0.006, p_th=0.009, prefactor=0.03)

# logical error rate per cycle falls geometrically with distance
for d in range(5, 29, 2):
    print(f"d={d:2d}  P_L={logical_error_rate(model, d):.3e}")

# reducing d_max = 11 by j = 0, 2, 4, 6 multiplies the rate by (p_th / p) ** (j / 2)
plan = DistancePlan(11, reductions=(0, 2, 4, 6))
lam = ds_scale_factors(model, plan)
print("distances:", plan.distances)
print("scale factors:", np.round(lam, 6))

# the prefactor cancels in the ratio
other = NoiseModel(p=0.006, p_th=0.009, prefactor=0.5)
assert np.allclose(ds_scale_factors(other, plan), lam)

# a fixed patch of side d_max hosts floor(d_max^2 / d'^2) smaller patches,
# which run in parallel and multiply the shot count for free
for d_prime in plan.distances:
    print(f"d'={d_prime:2d}  virtual cores={virtual_cores(11, d_prime)}")
