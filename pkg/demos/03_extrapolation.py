"""
Extrapolating to zero noise
===========================

Given expectation values at scale factors lambda >= 1, fit a model and read
it off at lambda = 0. Distance scaling produces closely spaced, geometric
factors; folding produces odd integers.
"""

import numpy as np

from dszne import ScaledData, extrapolate

rng = np.random.default_rng(3)


def truth(lam):
    return 0.25 + 0.75 * np.exp(-0.04 * lam)


for name, lam in [("distance", np.array([1, 1.5, 2.25, 3.375])), ("folding", np.array([1.0, 3, 5, 7]))]:
    noisy = truth(lam) + rng.normal(0, 1e-4, lam.size)
    data = ScaledData(lam, noisy)
    print(f"{name:8s} lambda={lam}")
    for method in ("linear", "polynomial", "richardson", "exponential"):
        fit = extrapolate(data, method, order=2)
        print(f"    {method:11s} E(0)={fit.zne_value:.6f}  error={abs(fit.zne_value - 1):.2e}")

# inverse-variance weights come from per-point standard errors
data = ScaledData.from_std_errors([1, 1.5, 2.25, 3.375], truth(np.array([1, 1.5, 2.25, 3.375])), [1e-4] * 4)
fit = extrapolate(data, "polynomial", order=2)
print("weighted quadratic:", fit.zne_value, "std", np.sqrt(fit.covariance[0, 0]))
