"""Allocation policies over a shared reward matrix.

All policies read prefixes of the same :class:`~adabon.core.RewardMatrix`
rows: exploration rewards are the first ``d`` entries of each row, and a
final allocation ``A`` is scored on the first ``A_i`` entries.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import estimators
from .core import Allocation, BudgetConfig, GainVector, RewardMatrix, validate_config
from .gain import MonteCarloGain
from .streams import child_rngs

POLICIES = ("uniform", "adabon", "varbon")


@dataclass(frozen=True)
class PolicyOutcome:
    allocation: Allocation
    exploration_used: tuple[int, ...]
    gain_vectors: tuple[GainVector, ...] | None = None


def greedy_allocate(gain_vectors: Sequence[Sequence[float]], budget: int) -> list[int]:
    """Hand out ``budget`` unit increments one at a time, each to the prompt
    with the largest current marginal ``V[a + 1] - V[a]``.

    Ties go to the lowest prompt index.  A heap keyed on
    ``(-marginal, index)`` replaces the linear scan; only the popped prompt's
    marginal changes per step, so the heap stays exact even when the vectors
    are not concave.

    Returns the per-prompt increment counts, which sum to ``budget``.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    K = len(gain_vectors)
    for i, v in enumerate(gain_vectors):
        if len(v) - 1 < budget:
            raise ValueError(
                f"gain vector {i} has horizon {len(v) - 1}, shorter than budget {budget}")
    counts = [0] * K
    if budget == 0:
        return counts
    heap = [(-(v[1] - v[0]), i) for i, v in enumerate(gain_vectors)]
    heapq.heapify(heap)
    for _ in range(budget):
        _, i = heapq.heappop(heap)
        counts[i] += 1
        a = counts[i]
        v = gain_vectors[i]
        if a < len(v) - 1:
            heapq.heappush(heap, (-(v[a + 1] - v[a]), i))
    return counts


def uniform_policy(config: BudgetConfig) -> PolicyOutcome:
    """``B`` queries for every prompt, no exploration."""
    counts = (config.per_prompt_budget,) * config.batch_size
    return PolicyOutcome(Allocation(counts, config.per_prompt_budget),
                         exploration_used=(0,) * config.batch_size)


def adabon_policy(matrix: RewardMatrix, config: BudgetConfig, estimator_kind: str = "kde",
                  rng: np.random.Generator | None = None) -> PolicyOutcome:
    """Two-stage adaptive Best-of-N allocation.

    Explores ``d`` draws per prompt (the first ``d`` row entries), fits one
    estimate per prompt, builds Monte Carlo gain vectors of horizon
    ``(B - d) K`` with ``m`` replicates, and allocates the remaining budget
    greedily.  Each prompt's gain vector gets its own stream, split from
    ``rng``.

    The returned ``gain_vectors`` hold only the columns the greedy step had
    to evaluate.
    """
    validate_config(config)
    matrix.check_width(config)
    if rng is None:
        raise ValueError("adabon_policy needs a random stream")
    d, T = config.exploration_budget, config.remaining_budget
    streams = child_rngs(rng, config.batch_size)
    gains = []
    for i in range(config.batch_size):
        observed = matrix.rows[i, :d]
        estimate = estimators.fit(observed, estimator_kind)
        gains.append(MonteCarloGain(observed, estimate, T, config.mc_samples, streams[i]))
    increments = greedy_allocate(gains, T)
    counts = tuple(d + a for a in increments)
    return PolicyOutcome(Allocation(counts, config.per_prompt_budget),
                         exploration_used=(d,) * config.batch_size,
                         gain_vectors=tuple(g.to_gain_vector() for g in gains))


def largest_remainder(weights: Sequence[float], total: int) -> list[int]:
    """Split ``total`` integer units proportionally to ``weights``.

    Floors the exact quotas, then gives one extra unit each to the largest
    fractional remainders (ties to the lowest index).  All-zero weights split
    uniformly.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    s = w.sum()
    if s == 0.0:
        w = np.ones_like(w)
        s = w.sum()
    quotas = w * total / s
    base = np.floor(quotas).astype(np.int64)
    left = total - int(base.sum())
    order = sorted(range(len(w)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:left]:
        base[i] += 1
    return base.tolist()


def varbon_policy(matrix: RewardMatrix, config: BudgetConfig) -> PolicyOutcome:
    """Remaining budget split in proportion to each prompt's exploration
    standard deviation (denominator ``d - 1``)."""
    validate_config(config)
    matrix.check_width(config)
    d = config.exploration_budget
    explore = matrix.rows[:, :d]
    if d > 1:
        sigma = np.where(np.ptp(explore, axis=1) == 0.0, 0.0, explore.std(axis=1, ddof=1))
    else:
        sigma = np.zeros(config.batch_size)
    increments = largest_remainder(sigma, config.remaining_budget)
    counts = tuple(d + a for a in increments)
    return PolicyOutcome(Allocation(counts, config.per_prompt_budget),
                         exploration_used=(d,) * config.batch_size)


def run_policy(name: str, matrix: RewardMatrix, config: BudgetConfig,
               estimator_kind: str | None = None,
               rng: np.random.Generator | None = None) -> PolicyOutcome:
    """Dispatch on policy name (``"uniform"``, ``"adabon"``, ``"varbon"``)."""
    if name == "uniform":
        return uniform_policy(config)
    if name == "adabon":
        return adabon_policy(matrix, config, estimator_kind or "kde", rng)
    if name == "varbon":
        return varbon_policy(matrix, config)
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICIES}")
