"""Win-rate and survival metrics against the uniform allocation.

Every comparison is coupled: run ``r``'s policy total and the uniform
totals it is compared with come from prefixes of the same reward matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import RewardMatrix, RunRecord, sequential_sum


@dataclass(frozen=True)
class MetricReport:
    bwr: float
    bwtr_curve: tuple[float, ...]
    est: float
    wtr: float
    runs: int
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"bwr": self.bwr, "est": self.est, "wtr": self.wtr, "runs": self.runs,
                "bwtr_curve": list(self.bwtr_curve), **self.extra}


def batch_win_rate(policy_totals, baseline_totals) -> float:
    """Fraction of runs the policy wins, ties counting one half."""
    a = np.asarray(policy_totals, dtype=np.float64)
    b = np.asarray(baseline_totals, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("policy and baseline totals must be equal-length vectors")
    if a.size == 0:
        raise ValueError("need at least one run")
    return (np.count_nonzero(a > b) + 0.5 * np.count_nonzero(a == b)) / a.size


def uniform_curve(matrix: RewardMatrix, cap: int) -> np.ndarray:
    """``out[N-1] = sum_i max(row_i[:N])`` for ``N = 1..cap``."""
    if cap > matrix.width:
        raise ValueError(f"N={cap} exceeds matrix width {matrix.width}")
    return sequential_sum(matrix.running_max()[:, :cap], axis=0)


def _check_paired(records, matrices):
    if len(records) != len(matrices) or not records:
        raise ValueError("need one reward matrix per run record, at least one run")


def bwtr(records: Sequence[RunRecord], matrices: Sequence[RewardMatrix], N: int) -> float:
    """Fraction of runs where the policy total is at least the uniform-``N``
    total (ties count fully)."""
    _check_paired(records, matrices)
    if N < 1:
        raise ValueError("N must be at least 1")
    wins = 0
    for rec, mat in zip(records, matrices):
        if N > mat.width:
            raise ValueError(f"N={N} exceeds matrix width {mat.width}")
        wins += rec.total >= sequential_sum(mat.rows[:, :N].max(axis=1))
    return wins / len(records)


def bwtr_curve(records: Sequence[RunRecord], matrices: Sequence[RewardMatrix],
               cap: int) -> np.ndarray:
    """``bwtr`` for every ``N = 1..cap`` at once."""
    _check_paired(records, matrices)
    totals = np.array([r.total for r in records])
    curves = np.stack([uniform_curve(m, cap) for m in matrices])
    return survival_curve(totals, curves)


def survival_curve(totals, curves) -> np.ndarray:
    """Win-tie rate per ``N`` from policy totals (``R``) and uniform curves (``R x cap``)."""
    totals = np.asarray(totals, dtype=np.float64)
    return (totals[:, None] >= np.asarray(curves)).mean(axis=0)


def expected_survival_time(records, matrices, est_cap: int) -> float:
    """Sum of ``bwtr(N)`` over ``N = 1..est_cap``."""
    return float(sequential_sum(bwtr_curve(records, matrices, est_cap)))


def per_prompt_wtr(records: Sequence[RunRecord], matrices: Sequence[RewardMatrix],
                   B: int) -> float:
    """Average over prompts and runs of ``max(row_i[:A_i]) >= max(row_i[:B])``."""
    _check_paired(records, matrices)
    hits = []
    for rec, mat in zip(records, matrices):
        if B > mat.width:
            raise ValueError(f"B={B} exceeds matrix width {mat.width}")
        base = mat.rows[:, :B].max(axis=1)
        hits.append(np.asarray(rec.per_prompt_max) >= base)
    return float(np.mean(hits))


def metric_report(records: Sequence[RunRecord], matrices: Sequence[RewardMatrix],
                  B: int, est_cap: int) -> MetricReport:
    _check_paired(records, matrices)
    uniform_totals = [uniform_curve(m, B)[-1] for m in matrices]
    curve = bwtr_curve(records, matrices, est_cap)
    return MetricReport(
        bwr=batch_win_rate([r.total for r in records], uniform_totals),
        bwtr_curve=tuple(curve.tolist()),
        est=float(sequential_sum(curve)),
        wtr=per_prompt_wtr(records, matrices, B),
        runs=len(records))


def skewness(samples) -> float:
    """Pearson's moment coefficient ``m3 / m2**1.5`` (denominator ``n``)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 3:
        raise ValueError("skewness needs at least 3 samples")
    dev = x - x.mean()
    m2 = np.mean(dev**2)
    if m2 == 0.0 or np.ptp(x) == 0.0:
        raise ValueError("skewness is undefined for zero variance")
    return float(np.mean(dev**3) / m2**1.5)


def quartile_summary(values) -> tuple[float, float, float]:
    """``(median, Q1, Q3)`` with linear interpolation between order statistics."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("quartile summary of an empty sequence")
    q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
    return float(med), float(q1), float(q3)
