"""Sampleable reward-distribution estimates fit on exploration rewards.

Only sampling is needed downstream, so a Gaussian KDE is stored as its
samples plus a bandwidth: drawing picks a stored sample uniformly and adds
``N(0, h**2)`` noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("kde", "empirical", "gaussian_mle")
_ALIASES = {"gaussian_kde": "kde"}


def _as_samples(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("cannot fit an estimate to an empty sample")
    return arr


def scott_bandwidth(samples) -> float:
    """Scott's rule ``h = sigma_hat * d**(-1/5)``.

    ``sigma_hat`` is the sample standard deviation with denominator ``d - 1``.
    A single sample, or a sample with no spread, gives ``h = 0``.
    """
    x = _as_samples(samples)
    d = x.size
    if d == 1 or np.ptp(x) == 0.0:
        return 0.0
    sigma = float(np.std(x, ddof=1))
    return sigma * d ** (-0.2)


@dataclass(frozen=True)
class DensityEstimate:
    kind: str
    source_samples: np.ndarray
    bandwidth: float = 0.0
    mu_hat: float = 0.0
    sigma_hat: float = 0.0

    def __post_init__(self):
        arr = np.array(self.source_samples, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "source_samples", arr)
        if self.bandwidth < 0 or self.sigma_hat < 0:
            raise ValueError("bandwidth and sigma_hat must be non-negative")

    @property
    def max_observed(self) -> float:
        return float(self.source_samples.max())


def fit(samples, kind: str = "kde") -> DensityEstimate:
    """Fit an estimate of ``kind`` (``"kde"``, ``"empirical"`` or ``"gaussian_mle"``)."""
    x = _as_samples(samples)
    kind = _ALIASES.get(kind, kind)
    if kind == "kde":
        return DensityEstimate("kde", x, bandwidth=scott_bandwidth(x))
    if kind == "empirical":
        return DensityEstimate("empirical", x)
    if kind == "gaussian_mle":
        if np.ptp(x) == 0.0:
            return DensityEstimate("gaussian_mle", x, mu_hat=float(x[0]), sigma_hat=0.0)
        return DensityEstimate("gaussian_mle", x, mu_hat=float(x.mean()),
                               sigma_hat=float(x.std(ddof=0)))
    raise ValueError(f"unknown estimator kind {kind!r}; expected one of {KINDS}")


def sample(estimate: DensityEstimate, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` draws from ``estimate``; ``n`` may also be a shape tuple."""
    kind = estimate.kind
    if kind == "gaussian_mle":
        if estimate.sigma_hat == 0.0:
            return np.full(n, estimate.mu_hat)
        return estimate.mu_hat + estimate.sigma_hat * rng.standard_normal(n)
    stored = estimate.source_samples
    if stored.size == 1:
        picked = np.full(n, stored[0])
    else:
        picked = stored[rng.integers(0, stored.size, size=n)]
    if kind == "empirical" or estimate.bandwidth == 0.0:
        return picked
    if kind == "kde":
        return picked + estimate.bandwidth * rng.standard_normal(n)
    raise ValueError(f"unknown estimator kind {kind!r}")
