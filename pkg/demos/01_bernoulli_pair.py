"""Two Bernoulli prompts: where an adaptive second stage pays off.

One prompt almost always succeeds, the other almost never does.  Spending
the budget evenly wastes draws on the easy one; exploring first and then
sending the rest of the budget to whichever prompt is still stuck helps.
"""

# %%
from adabon import Bernoulli, BudgetConfig, oracle

pair = [Bernoulli(0.95), Bernoulli(0.05)]

# %% exact values for a few budgets, exploration d = 10
for B in (15, 25, 50, 100):
    rep = oracle.oracle_report([0.95, 0.05], B, 10)
    print(f"B={B:3d}  uniform={rep['uniform']:.4f}  two-stage={rep['two_stage']:.4f}"
          f"  gap={rep['gap']:+.4f}")

# %% probability of each exploration outcome (1 = some draw succeeded)
for outcome, prob in oracle.exploration_branches(pair, 10).items():
    print(outcome, f"{prob:.4f}")

# %% the simulator agrees with the closed form for the uniform split
cfg = BudgetConfig(per_prompt_budget=25, batch_size=2, exploration_budget=10, runs=4000)
mean, se = oracle.simulate_policy_value("uniform", pair, cfg)
print(f"simulated uniform {mean:.4f} +- {se:.4f}, exact {oracle.exact_uniform_value(pair, 25):.4f}")

# %% the plug-in greedy with an empirical estimate sees nothing to gain on a
# prompt whose exploration draws were all equal, so it cannot rescue it
mean, se = oracle.simulate_policy_value("adabon", pair, cfg, estimator_kind="empirical")
print(f"adabon[empirical] {mean:.4f} +- {se:.4f}")
