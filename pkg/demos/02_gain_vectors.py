"""Gain vectors: expected best reward after j more draws.

For a discrete distribution the vector is exact.  For a fitted density it is
estimated by simulation, one running maximum per replicate.
"""

# %%
import numpy as np

from adabon import Discrete, estimators, gain
from adabon.streams import make_rng

dist = Discrete((0.0, 0.5, 1.0), (0.6, 0.3, 0.1))
exact = gain.exact_gain_vector(dist, floor=0.0, horizon=8)
print("exact      ", np.round(exact.values, 4))
print("increments ", np.round(np.diff(exact.values), 4))
print("monotone", exact.is_monotone(), "concave", exact.is_concave())

# %% a higher floor flattens the early part of the curve
print("floor 0.5  ", np.round(gain.exact_gain_vector(dist, 0.5, 8).values, 4))

# %% Monte Carlo estimate from 20 observed draws.  The sample already holds the
# top value 1.0, so the empirical row is flat while the smooth estimates are not
rng = make_rng(3, "demo")
observed = dist.draw(20, rng)
for kind in ("empirical", "kde", "gaussian_mle"):
    est = estimators.fit(observed, kind)
    g = gain.mc_gain_vector(observed, est, 8, 2048, make_rng(3, "mc", kind))
    print(f"{kind:13s}", np.round(g.values, 4))

# %% Scott's rule bandwidth shrinks like n^(-1/5)
for n in (10, 100, 1000, 10000):
    print(n, round(estimators.scott_bandwidth(make_rng(n).normal(size=n)), 4))
