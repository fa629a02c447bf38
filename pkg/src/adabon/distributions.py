"""Synthetic reward distributions.

Each family can draw samples, evaluate its CDF and report its mean and
variance.  The discrete families (``Bernoulli``, ``PointMass``,
``Discrete``) also expose their support, which is what
:func:`exact_expected_max` needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PROB_TOL = 1e-12


class UnsupportedFamily(TypeError):
    """The operation needs a finite discrete support."""


def _normal_cdf(x, mu, sigma):
    return 0.5 * (1.0 + math.erf((x - mu) / (sigma * math.sqrt(2.0))))


class SyntheticDistribution:
    family = "abstract"
    discrete = False

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class _DiscreteMixin:
    discrete = True

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def cdf(self, x):
        values, probs = self.support()
        return float(probs[values <= x].sum())

    @property
    def mean(self):
        values, probs = self.support()
        return float(values @ probs)

    @property
    def variance(self):
        values, probs = self.support()
        return float(((values - self.mean) ** 2) @ probs)


@dataclass(frozen=True)
class Bernoulli(_DiscreteMixin, SyntheticDistribution):
    p: float
    family = "bernoulli"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("bernoulli p must lie in [0, 1]")

    def support(self):
        return np.array([0.0, 1.0]), np.array([1.0 - self.p, self.p])

    def draw(self, n, rng):
        return (rng.random(n) < self.p).astype(np.float64)

    def to_dict(self):
        return {"family": self.family, "p": self.p}


@dataclass(frozen=True)
class PointMass(_DiscreteMixin, SyntheticDistribution):
    value: float
    family = "point_mass"

    def support(self):
        return np.array([float(self.value)]), np.array([1.0])

    def draw(self, n, rng):
        return np.full(n, float(self.value))

    def to_dict(self):
        return {"family": self.family, "value": self.value}


@dataclass(frozen=True)
class Discrete(_DiscreteMixin, SyntheticDistribution):
    values: tuple[float, ...]
    probs: tuple[float, ...]
    family = "discrete"

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        q = tuple(float(x) for x in self.probs)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", q)
        if len(v) == 0 or len(v) != len(q):
            raise ValueError("discrete support and probabilities must have equal, nonzero length")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("discrete support must be strictly increasing")
        if any(x < 0 for x in q) or abs(sum(q) - 1.0) > PROB_TOL:
            raise ValueError("discrete probabilities must be non-negative and sum to 1")

    def support(self):
        return np.array(self.values), np.array(self.probs)

    def draw(self, n, rng):
        values, probs = self.support()
        cum = np.cumsum(probs)
        idx = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
        return values[np.minimum(idx, len(values) - 1)]

    def to_dict(self):
        return {"family": self.family, "values": list(self.values), "probs": list(self.probs)}


@dataclass(frozen=True)
class Gaussian(SyntheticDistribution):
    mu: float
    sigma: float
    family = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("gaussian sigma must be positive")

    def draw(self, n, rng):
        return self.mu + self.sigma * rng.standard_normal(n)

    def cdf(self, x):
        return _normal_cdf(x, self.mu, self.sigma)

    @property
    def mean(self):
        return float(self.mu)

    @property
    def variance(self):
        return float(self.sigma) ** 2

    def to_dict(self):
        return {"family": self.family, "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class GaussianMixture(SyntheticDistribution):
    weights: tuple[float, ...]
    mus: tuple[float, ...]
    sigmas: tuple[float, ...]
    family = "gaussian_mixture"

    def __post_init__(self):
        for name in ("weights", "mus", "sigmas"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if not len(self.weights) == len(self.mus) == len(self.sigmas) >= 1:
            raise ValueError("mixture needs matching weights, mus and sigmas")
        if any(w <= 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > PROB_TOL:
            raise ValueError("mixture weights must be positive and sum to 1")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("mixture sigmas must be positive")

    def draw(self, n, rng):
        cum = np.cumsum(self.weights)
        comp = np.minimum(np.searchsorted(cum, rng.random(n) * cum[-1], side="right"),
                          len(self.weights) - 1)
        z = rng.standard_normal(n)
        return np.asarray(self.mus)[comp] + np.asarray(self.sigmas)[comp] * z

    def cdf(self, x):
        return sum(w * _normal_cdf(x, m, s)
                   for w, m, s in zip(self.weights, self.mus, self.sigmas))

    @property
    def mean(self):
        return float(np.dot(self.weights, self.mus))

    @property
    def variance(self):
        w, m, s = (np.asarray(a) for a in (self.weights, self.mus, self.sigmas))
        return float(w @ (s**2 + m**2) - (w @ m) ** 2)

    def to_dict(self):
        return {"family": self.family, "weights": list(self.weights),
                "mus": list(self.mus), "sigmas": list(self.sigmas)}


@dataclass(frozen=True)
class ShiftedNegatedExponential(SyntheticDistribution):
    """``shift - E`` with ``E ~ Exponential(rate)``: left-skewed, skewness -2."""

    rate: float
    shift: float = 0.0
    family = "shifted_negated_exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def draw(self, n, rng):
        return self.shift - rng.standard_exponential(n) / self.rate

    def cdf(self, x):
        if x >= self.shift:
            return 1.0
        return math.exp(-self.rate * (self.shift - x))

    @property
    def mean(self):
        return self.shift - 1.0 / self.rate

    @property
    def variance(self):
        return 1.0 / self.rate**2

    def to_dict(self):
        return {"family": self.family, "rate": self.rate, "shift": self.shift}


FAMILIES = {
    cls.family: cls
    for cls in (Bernoulli, PointMass, Discrete, Gaussian, GaussianMixture,
                ShiftedNegatedExponential)
}


def from_dict(spec: dict) -> SyntheticDistribution:
    """Build a distribution from ``{"family": name, **params}``."""
    spec = dict(spec)
    try:
        cls = FAMILIES[spec.pop("family")]
    except KeyError as exc:
        raise ValueError(f"unknown distribution family {exc.args[0]!r}") from None
    return cls(**spec)


def draw(dist: SyntheticDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent draws from ``dist``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return dist.draw(int(n), rng)


def exact_expected_max(dist: SyntheticDistribution, floor: float, n: int) -> float:
    """``E[max(floor, X_1, ..., X_n)]`` for a discrete ``dist``.

    Telescopes over the support: ``floor * F(floor)**n`` plus, for each
    support point ``v > floor``, ``v * (F(v)**n - F(v_prev)**n)`` where
    ``v_prev`` is the previous support point (or the floor).
    """
    if not getattr(dist, "discrete", False):
        raise UnsupportedFamily(f"exact expected max needs a discrete family, got {dist.family}")
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return float(floor)
    values, probs = dist.support()
    below = float(probs[values <= floor].sum())
    total = floor * below**n
    prev = below**n
    cum = below
    last = len(values) - 1
    for k, (v, q) in enumerate(zip(values, probs)):
        if v <= floor:
            continue
        cum += q
        cur = 1.0 if k == last else min(cum, 1.0) ** n
        total += v * (cur - prev)
        prev = cur
    return float(total)
