"""Adaptive Best-of-N budget allocation across a batch of prompts."""

from .core import (Allocation, BudgetConfig, ConfigError, GainVector, RewardMatrix, RunRecord,
                   validate_config)
from .distributions import (Bernoulli, Discrete, Gaussian, GaussianMixture, PointMass,
                            ShiftedNegatedExponential, draw, exact_expected_max)
from .estimators import DensityEstimate, fit, sample, scott_bandwidth
from .gain import exact_gain_vector, mc_gain_vector
from .metrics import (MetricReport, batch_win_rate, bwtr, expected_survival_time,
                      per_prompt_wtr, quartile_summary, skewness)
from .oracle import exact_two_stage_value, exact_uniform_value, simulate_policy_value
from .policies import adabon_policy, greedy_allocate, uniform_policy, varbon_policy
from .sources import load_reward_log, materialize_matrix

__version__ = "0.1.0"
