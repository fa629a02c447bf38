"""Exact expected cumulative reward for small discrete instances, plus a
Monte Carlo simulator to check the exact values and the policies against."""

from __future__ import annotations

import math
from itertools import product
from typing import Sequence

import numpy as np

from .core import BudgetConfig, RunRecord, validate_config
from .distributions import Bernoulli, SyntheticDistribution, UnsupportedFamily, exact_expected_max
from .policies import run_policy
from .sources import SyntheticSource
from .streams import derive_key, make_rng


def _floorless_max(dist, n: int) -> float:
    # flooring at the smallest support value changes nothing for n >= 1
    if not getattr(dist, "discrete", False):
        raise UnsupportedFamily(f"exact oracle needs discrete families, got {dist.family}")
    values, _ = dist.support()
    return exact_expected_max(dist, float(values.min()), n)


def exact_uniform_value(dists: Sequence[SyntheticDistribution], B: int) -> float:
    """Expected sum of per-prompt maxima when every prompt gets ``B`` draws."""
    return float(sum(_floorless_max(dist, B) for dist in dists))


def exact_two_stage_value(dists: Sequence[Bernoulli], B: int, d: int) -> float:
    """Expected reward of the explore-then-rescue rule on two Bernoulli prompts.

    Each prompt gets ``d`` draws.  If exactly one prompt is still at 0, it
    receives all ``2B - 2d`` remaining draws; if both are at 0 they get
    ``B - d`` each; if both hit 1 the split is irrelevant.
    """
    if len(dists) != 2 or not all(isinstance(x, Bernoulli) for x in dists):
        raise UnsupportedFamily("the two-stage oracle takes exactly two Bernoulli prompts")
    if not 1 <= d <= B:
        raise ValueError("need 1 <= d <= B")
    p = [x.p for x in dists]
    rest = 2 * (B - d)

    def hit(pi, n):
        return 1.0 - (1.0 - pi) ** n

    value = 0.0
    for outcome in product((0, 1), repeat=2):
        prob = math.prod(hit(pi, d) if o else 1.0 - hit(pi, d) for pi, o in zip(p, outcome))
        if outcome == (1, 1):
            branch = 2.0
        elif outcome == (1, 0):
            branch = 1.0 + hit(p[1], rest)
        elif outcome == (0, 1):
            branch = hit(p[0], rest) + 1.0
        else:
            branch = hit(p[0], B - d) + hit(p[1], B - d)
        value += prob * branch
    return value


def exploration_branches(dists: Sequence[Bernoulli], d: int) -> dict[tuple[int, int], float]:
    """Probability of each exploration outcome (max of ``d`` draws per prompt)."""
    p = [x.p for x in dists]
    out = {}
    for outcome in product((0, 1), repeat=len(p)):
        out[outcome] = math.prod(
            (1.0 - (1.0 - pi) ** d) if o else (1.0 - pi) ** d for pi, o in zip(p, outcome))
    return out


def simulate_policy_value(policy: str, dists: Sequence[SyntheticDistribution],
                          config: BudgetConfig, runs: int | None = None,
                          seed: int | None = None, estimator_kind: str = "empirical"):
    """Mean total reward of ``policy`` over independent runs, with its standard error.

    Run ``r`` materializes its matrix from ``derive_key(seed, 0, r)`` and feeds
    the policy ``make_rng(seed, 0, r, "policy")``.
    """
    validate_config(config)
    runs = config.runs if runs is None else runs
    seed = config.seed if seed is None else seed
    source = SyntheticSource(tuple(dists))
    if source.K != config.batch_size:
        raise ValueError("one distribution per prompt is required")
    totals = np.empty(runs)
    for r in range(runs):
        matrix = source.materialize(config.matrix_width, derive_key(seed, 0, r))
        outcome = run_policy(policy, matrix, config, estimator_kind,
                             make_rng(seed, 0, r, "policy"))
        totals[r] = RunRecord.from_matrix(policy, outcome.allocation, matrix).total
    se = float(totals.std(ddof=1) / math.sqrt(runs)) if runs > 1 else float("nan")
    return float(totals.mean()), se


def oracle_report(p: Sequence[float], B: int, d: int) -> dict:
    """Exact uniform and two-stage values (and their gap) for a Bernoulli pair."""
    dists = [Bernoulli(float(x)) for x in p]
    uniform = exact_uniform_value(dists, B)
    report = {"p": list(map(float, p)), "B": B, "d": d, "uniform": uniform}
    if len(dists) == 2:
        two_stage = exact_two_stage_value(dists, B, d)
        report.update(two_stage=two_stage, gap=two_stage - uniform)
    return report
