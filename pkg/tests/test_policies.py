import numpy as np
import pytest

from adabon.core import BudgetConfig, RewardMatrix, RunRecord
from adabon.distributions import Bernoulli
from adabon.gain import exact_gain_vector
from adabon.policies import (adabon_policy, greedy_allocate, largest_remainder, run_policy,
                             uniform_policy, varbon_policy)
from adabon.sources import SyntheticSource
from adabon.streams import make_rng
from oracles import best_allocation_value, random_concave_vector


def scan_greedy(vectors, T):
    """Reference greedy: linear argmax scan, lowest index wins ties."""
    a = [0] * len(vectors)
    for _ in range(T):
        gains = [v[ai + 1] - v[ai] for v, ai in zip(vectors, a)]
        a[int(np.argmax(gains))] += 1
    return a


def test_greedy_example():
    v1 = [0, 0.5, 0.75, 0.875]
    v2 = [0, 0.1, 0.19, 0.271]
    assert greedy_allocate([v1, v2], 3) == [3, 0]
    # enumeration: [3,0] -> 0.875, [2,1] -> 0.85, [1,2] -> 0.69, [0,3] -> 0.271
    assert best_allocation_value([v1, v2], 3) == pytest.approx(0.875)


def test_greedy_identical_vectors_round_robin():
    v = [0, 0.5, 0.75, 0.875, 0.9375]
    assert greedy_allocate([v] * 4, 4) == [1, 1, 1, 1]
    flat = [0.0] * 6
    assert greedy_allocate([flat] * 3, 5) == [5, 0, 0]


def test_greedy_zero_budget():
    assert greedy_allocate([[0, 1], [0, 2]], 0) == [0, 0]


def test_greedy_horizon_too_short():
    with pytest.raises(ValueError):
        greedy_allocate([[0, 1, 2], [0, 1]], 2)


def test_greedy_optimal_on_concave_vectors():
    rng = np.random.default_rng(0)
    for _ in range(300):
        K, T = int(rng.integers(1, 4)), int(rng.integers(0, 9))
        vs = [random_concave_vector(rng, T) for _ in range(K)]
        a = greedy_allocate(vs, T)
        assert sum(a) == T
        assert sum(v[ai] for v, ai in zip(vs, a)) == best_allocation_value(vs, T)


def test_heap_matches_scan_on_arbitrary_vectors():
    rng = np.random.default_rng(1)
    for _ in range(300):
        K, T = int(rng.integers(1, 6)), int(rng.integers(0, 15))
        vs = [np.round(rng.normal(size=T + 1), 1) for _ in range(K)]
        assert greedy_allocate(vs, T) == scan_greedy(vs, T)


@pytest.mark.parametrize("B,K", [(120, 5), (25, 2), (1, 1)])
def test_uniform(B, K):
    out = uniform_policy(BudgetConfig(B, K, 1))
    assert out.allocation.counts == (B,) * K
    assert out.exploration_used == (0,) * K
    assert out.gain_vectors is None


def _matrix(cfg, seed=0, p=(0.6, 0.2, 0.9)):
    src = SyntheticSource(tuple(Bernoulli(x) for x in p[: cfg.batch_size]))
    return src.materialize(cfg.matrix_width, seed)


def test_adabon_single_prompt_takes_everything():
    cfg = BudgetConfig(20, 1, 5, mc_samples=32)
    m = RewardMatrix(np.random.default_rng(0).normal(size=(1, cfg.matrix_width)))
    assert adabon_policy(m, cfg, "kde", make_rng(0)).allocation.counts == (20,)


def test_adabon_sends_remaining_budget_to_varying_prompt():
    cfg = BudgetConfig(10, 2, 6, mc_samples=128)
    W = cfg.matrix_width
    rows = [[3.0] * W, [float(j % 2) for j in range(W)]]
    out = adabon_policy(RewardMatrix(rows), cfg, "kde", make_rng(1))
    assert out.allocation.counts == (6, 6 + cfg.remaining_budget)
    assert out.gain_vectors[0].values.tolist() == [3.0] * len(out.gain_vectors[0])


@pytest.mark.parametrize("kind", ["kde", "empirical", "gaussian_mle"])
def test_adabon_spends_full_budget(kind):
    cfg = BudgetConfig(12, 3, 4, mc_samples=64)
    rng = np.random.default_rng(3)
    for seed in range(10):
        m = RewardMatrix(rng.normal(size=(3, cfg.matrix_width)))
        out = adabon_policy(m, cfg, kind, make_rng(seed))
        assert sum(out.allocation.counts) == cfg.per_prompt_budget * cfg.batch_size
        assert min(out.allocation.counts) >= cfg.exploration_budget


def test_adabon_deterministic_given_seed():
    cfg = BudgetConfig(12, 3, 4, mc_samples=64)
    m = RewardMatrix(np.random.default_rng(5).normal(size=(3, cfg.matrix_width)))
    a = adabon_policy(m, cfg, "kde", make_rng(42))
    b = adabon_policy(m, cfg, "kde", make_rng(42))
    assert a.allocation == b.allocation
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a.gain_vectors, b.gain_vectors))


def test_adabon_requires_wide_matrix_and_stream():
    cfg = BudgetConfig(12, 2, 4)
    with pytest.raises(ValueError):
        adabon_policy(RewardMatrix(np.zeros((2, 10))), cfg, "kde", make_rng(0))
    with pytest.raises(ValueError):
        adabon_policy(RewardMatrix(np.zeros((2, cfg.matrix_width))), cfg, "kde", None)


def test_adabon_and_uniform_read_the_same_prefixes():
    cfg = BudgetConfig(12, 3, 4, mc_samples=64)
    m = RewardMatrix(np.random.default_rng(7).normal(size=(3, cfg.matrix_width)))
    a = adabon_policy(m, cfg, "kde", make_rng(0)).allocation.counts
    common = [min(x, cfg.per_prompt_budget) for x in a]
    shared = m.prefix_max(common)
    ada = RunRecord.from_matrix("a", adabon_policy(m, cfg, "kde", make_rng(0)).allocation, m)
    uni = RunRecord.from_matrix("u", uniform_policy(cfg).allocation, m)
    for i in range(3):
        big = ada if a[i] >= cfg.per_prompt_budget else uni
        assert big.per_prompt_max[i] >= shared[i]
        assert min(ada.per_prompt_max[i], uni.per_prompt_max[i]) == shared[i]


# ---- Bernoulli pair from the two-stage example

def _exploration_row(hit, d, W):
    row = [0.0] * W
    if hit:
        row[0] = 1.0
    return row


@pytest.mark.parametrize("outcome", [(1, 0), (0, 1)])
def test_greedy_on_exact_vectors_matches_rescue_rule(outcome):
    B, d = 25, 10
    T = 2 * (B - d)
    vs = [exact_gain_vector(Bernoulli(p), float(o), T) for p, o in zip((0.95, 0.05), outcome)]
    inc = greedy_allocate(vs, T)
    assert inc == ([0, T] if outcome == (1, 0) else [T, 0])


def test_greedy_on_exact_vectors_beats_even_split_when_both_miss():
    B, d = 25, 10
    T = 2 * (B - d)
    vs = [exact_gain_vector(Bernoulli(p), 0.0, T) for p in (0.95, 0.05)]
    inc = greedy_allocate(vs, T)
    assert vs[0][inc[0]] + vs[1][inc[1]] >= vs[0][B - d] + vs[1][B - d]


@pytest.mark.parametrize("kind", ["empirical", "kde"])
def test_adabon_estimates_are_flat_on_bernoulli_pair(kind):
    # observed rows are all-0 or contain a 1: either way the estimate cannot exceed the
    # floor, so every increment ties at zero and goes to prompt 0
    cfg = BudgetConfig(25, 2, 10, mc_samples=16)
    W = cfg.matrix_width
    for outcome in [(0, 0), (1, 0), (0, 1), (1, 1)]:
        rows = [_exploration_row(o, 10, W) for o in outcome]
        out = adabon_policy(RewardMatrix(rows), cfg, kind, make_rng(0))
        if kind == "empirical" or outcome in [(0, 0), (1, 1)]:
            assert out.allocation.counts == (40, 10)


def test_largest_remainder_example():
    assert largest_remainder([3.0, 1.0], 30) == [23, 7]
    assert largest_remainder([2.0, 2.0, 2.0], 12) == [4, 4, 4]
    assert largest_remainder([0.0, 0.0], 10) == [5, 5]
    assert largest_remainder([0.0, 0.0, 0.0], 10) == [4, 3, 3]


def test_largest_remainder_always_sums():
    rng = np.random.default_rng(0)
    for _ in range(200):
        w = rng.random(int(rng.integers(1, 10))) * (rng.random() < 0.9)
        total = int(rng.integers(0, 500))
        out = largest_remainder(w, total)
        assert sum(out) == total and min(out) >= 0


def test_varbon_proportional_to_exploration_sd():
    cfg = BudgetConfig(40, 2, 25)  # remaining 30
    W = cfg.matrix_width
    base = np.tile([-1.0, 1.0], 13)[:25]
    base = base / base.std(ddof=1)
    rows = [np.concatenate([3 * base, np.zeros(W - 25)]),
            np.concatenate([base, np.zeros(W - 25)])]
    out = varbon_policy(RewardMatrix(rows), cfg)
    assert out.allocation.counts == (25 + 23, 25 + 7)


def test_varbon_constant_rows_fall_back_to_uniform():
    cfg = BudgetConfig(10, 2, 5)
    out = varbon_policy(RewardMatrix(np.ones((2, cfg.matrix_width))), cfg)
    assert out.allocation.counts == (10, 10)


def test_run_policy_dispatch():
    cfg = BudgetConfig(6, 2, 3, mc_samples=8)
    m = _matrix(cfg)
    for name in ("uniform", "adabon", "varbon"):
        out = run_policy(name, m, cfg, "kde", make_rng(0))
        assert sum(out.allocation.counts) == 12
    with pytest.raises(ValueError):
        run_policy("oracle", m, cfg)
