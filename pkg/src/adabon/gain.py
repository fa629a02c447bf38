"""Gain vectors: expected best reward after ``j`` more draws, floored at the
best reward seen so far.

The Monte Carlo estimate draws one sequence of ``J`` values per replicate and
reads every ``j`` off the running maximum, so each ``V_j`` stays unbiased at
``O(m J)`` cost.  Columns are generated in fixed-size chunks; the allocation
code uses :class:`MonteCarloGain` lazily and only pays for the columns the
greedy step actually inspects.  Because the chunking is the same either way,
a lazily evaluated prefix is bit-identical to the full vector.
"""

from __future__ import annotations

import numpy as np

from .core import GainVector
from .distributions import SyntheticDistribution, exact_expected_max
from .estimators import DensityEstimate, sample

CHUNK = 32


class MonteCarloGain:
    """Lazily extended Monte Carlo gain vector of horizon ``J``.

    Indexing ``g[j]`` computes any missing columns up to ``j``.  The rng is
    consumed in chunks of :data:`CHUNK` columns, ``m`` rows each.
    """

    def __init__(self, observed, estimate: DensityEstimate, horizon: int, m: int,
                 rng: np.random.Generator):
        observed = np.asarray(observed, dtype=np.float64)
        if observed.size < 1:
            raise ValueError("need at least one observed reward")
        if horizon < 0 or m < 1:
            raise ValueError("horizon must be >= 0 and m >= 1")
        self.estimate = estimate
        self.horizon = int(horizon)
        self.m = int(m)
        self.rng = rng
        self.floor = float(observed.max())
        self._values = [self.floor]
        self._carry = np.full(self.m, self.floor)
        self._flat = _cannot_exceed(estimate, self.floor)

    def __len__(self):
        return self.horizon + 1

    def __getitem__(self, j):
        if j < 0 or j > self.horizon:
            raise IndexError(f"gain index {j} outside 0..{self.horizon}")
        while len(self._values) <= j:
            self._extend()
        return self._values[j]

    @property
    def computed(self) -> int:
        """Number of columns (``j >= 1``) evaluated so far."""
        return len(self._values) - 1

    def _extend(self):
        width = min(CHUNK, self.horizon - self.computed)
        if self._flat:
            self._values.extend([self.floor] * width)
            return
        z = sample(self.estimate, (self.m, width), self.rng)
        run = np.maximum.accumulate(z, axis=1)
        np.maximum(run, self._carry[:, None], out=run)
        self._carry = run[:, -1].copy()
        self._values.extend(run.mean(axis=0).tolist())

    def to_gain_vector(self, full: bool = False) -> GainVector:
        if full:
            self[self.horizon]
        return GainVector(np.array(self._values), origin="monte_carlo")


def _cannot_exceed(estimate: DensityEstimate, floor: float) -> bool:
    """True when every draw from ``estimate`` is at most ``floor``, so the
    gain vector is exactly flat."""
    if estimate.kind == "gaussian_mle":
        return estimate.sigma_hat == 0.0 and estimate.mu_hat <= floor
    if estimate.kind == "empirical" or estimate.bandwidth == 0.0:
        return estimate.max_observed <= floor
    return False


def mc_gain_vector(observed, estimate: DensityEstimate, horizon: int, m: int,
                   rng: np.random.Generator) -> GainVector:
    """Monte Carlo estimate of ``V_0..V_J`` with ``V_0 = max(observed)``."""
    return MonteCarloGain(observed, estimate, horizon, m, rng).to_gain_vector(full=True)


def exact_gain_vector(dist: SyntheticDistribution, floor: float, horizon: int) -> GainVector:
    """``[E max(floor, X_1..X_j) for j in 0..J]`` for a discrete ``dist``."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    values = [exact_expected_max(dist, floor, j) for j in range(horizon + 1)]
    return GainVector(np.array(values), origin="exact")
