"""Domain types shared by the allocation, oracle and evaluation code."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

ORIGINS = ("exact", "monte_carlo")


def sequential_sum(values, axis: int = 0):
    """Left-to-right sum along ``axis``.

    ``ndarray.sum`` switches to pairwise summation for longer axes, which
    could make a policy total and the matching uniform total differ in the
    last bit; a cumulative sum always accumulates in index order.
    """
    arr = np.asarray(values, dtype=np.float64)
    return np.cumsum(arr, axis=axis).take(-1, axis=axis)


class ConfigError(ValueError):
    """A budget configuration violates one of its invariants."""


@dataclass(frozen=True)
class BudgetConfig:
    """Budget and sampling parameters for one experiment.

    Parameters
    ----------
    per_prompt_budget : int
        ``B``, LM queries per prompt available to the uniform allocation.
    batch_size : int
        ``K``, prompts per batch.
    exploration_budget : int
        ``d``, queries spent on each prompt before committing.
    mc_samples : int
        ``m``, Monte Carlo replicates per gain vector.
    est_cap : int, optional
        Largest uniform budget ``N`` in the survival-time sum; ``2B`` if omitted.
    runs : int
        Independent reward matrices per batch.
    seed : int
        Root of every random stream (unsigned 64-bit).
    """

    per_prompt_budget: int
    batch_size: int
    exploration_budget: int
    mc_samples: int = 1024
    est_cap: int | None = None
    runs: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.est_cap is None:
            object.__setattr__(self, "est_cap", 2 * self.per_prompt_budget)

    @property
    def B(self) -> int:
        return self.per_prompt_budget

    @property
    def K(self) -> int:
        return self.batch_size

    @property
    def d(self) -> int:
        return self.exploration_budget

    @property
    def remaining_budget(self) -> int:
        """``(B - d) K``: queries left after exploration."""
        return (self.per_prompt_budget - self.exploration_budget) * self.batch_size

    @property
    def matrix_width(self) -> int:
        """Draws per prompt needed so every policy and every ``N`` reads a prefix."""
        return max(self.est_cap, self.exploration_budget + self.remaining_budget)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate_config(config: BudgetConfig) -> BudgetConfig:
    """Return ``config`` unchanged, or raise :class:`ConfigError` naming the
    first violated invariant."""
    c = config
    for name in ("per_prompt_budget", "batch_size", "exploration_budget",
                 "mc_samples", "est_cap", "runs", "seed"):
        value = getattr(c, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
    if c.per_prompt_budget < 1:
        raise ConfigError("B must be positive")
    if c.batch_size < 1:
        raise ConfigError("K must be positive")
    if c.exploration_budget < 1:
        raise ConfigError("d must be positive")
    if c.exploration_budget > c.per_prompt_budget:
        raise ConfigError("d exceeds B")
    if c.mc_samples < 1:
        raise ConfigError("m must be positive")
    if c.est_cap < c.per_prompt_budget:
        raise ConfigError("est_cap is below B")
    if c.runs < 1:
        raise ConfigError("runs must be positive")
    if not 0 <= c.seed < 2**64:
        raise ConfigError("seed is not an unsigned 64-bit integer")
    return config


@dataclass(frozen=True)
class Allocation:
    """Queries per prompt; the total never exceeds ``B * K``."""

    counts: tuple[int, ...]
    per_prompt_budget: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative query count in {counts}")
        if sum(counts) > self.per_prompt_budget * len(counts):
            raise ValueError(
                f"allocation spends {sum(counts)} queries, budget is "
                f"{self.per_prompt_budget} x {len(counts)}")

    def __len__(self):
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    @property
    def total(self) -> int:
        return sum(self.counts)


class RewardMatrix:
    """Realized rewards for one run: ``K`` rows of ``W`` draws each.

    Every allocation and every uniform baseline reads a prefix of a row, which
    is what couples the comparisons made by the metrics.
    """

    __slots__ = ("_rows",)

    def __init__(self, rows):
        arr = np.array(rows, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("reward matrix needs K >= 1 rows of W >= 1 entries")
        arr.setflags(write=False)
        self._rows = arr

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def K(self) -> int:
        return self._rows.shape[0]

    @property
    def width(self) -> int:
        return self._rows.shape[1]

    def check_width(self, config: BudgetConfig) -> None:
        if self.K != config.batch_size:
            raise ValueError(f"matrix has {self.K} rows, config has K={config.batch_size}")
        if self.width < config.matrix_width:
            raise ValueError(
                f"matrix width {self.width} is below the required {config.matrix_width}")

    def prefix_max(self, counts: Sequence[int]) -> np.ndarray:
        """Best reward among the first ``counts[i]`` entries of each row."""
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.K,):
            raise ValueError("one count per row is required")
        if counts.min() < 1 or counts.max() > self.width:
            raise ValueError(f"counts must lie in [1, {self.width}]")
        return np.array([self._rows[i, :c].max() for i, c in enumerate(counts)])

    def running_max(self) -> np.ndarray:
        """``out[i, n-1]`` is the best of the first ``n`` draws of row ``i``."""
        return np.maximum.accumulate(self._rows, axis=1)

    def __repr__(self):
        return f"RewardMatrix(K={self.K}, width={self.width})"


@dataclass(frozen=True)
class GainVector:
    """Expected best reward after ``j = 0..J`` further draws.

    ``values[0]`` is the floor: the best reward already observed.
    """

    values: np.ndarray
    origin: str = "monte_carlo"

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"origin must be one of {ORIGINS}")
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("gain vector needs at least V_0")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def horizon(self) -> int:
        return self.values.size - 1

    def __len__(self):
        return self.values.size

    def __getitem__(self, j):
        return self.values[j]

    def is_monotone(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))

    def is_concave(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.values, n=2) <= tol))


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one policy on one reward matrix."""

    policy_name: str
    allocation: Allocation
    per_prompt_max: tuple[float, ...]
    total: float
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_matrix(cls, policy_name: str, allocation: Allocation,
                    matrix: RewardMatrix, **extra) -> "RunRecord":
        maxima = matrix.prefix_max(allocation.counts)
        return cls(policy_name, allocation, tuple(float(x) for x in maxima),
                   float(sequential_sum(maxima)), extra)

    def check(self, matrix: RewardMatrix) -> bool:
        """Recompute maxima and total from ``matrix``; True when they match exactly."""
        maxima = matrix.prefix_max(self.allocation.counts)
        return (tuple(float(x) for x in maxima) == self.per_prompt_max
                and float(sequential_sum(maxima)) == self.total)
