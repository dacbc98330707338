"""Offline validation: synthetic environments, policy rollouts, regret
analysis, and the study statistics toolkit."""

from .engagement import EngagementReport, engagement_metrics
from .env import SyntheticEnv, Trajectory, TrajectoryStep, default_env
from .policies import (
    EpsilonGreedyPolicy,
    LinUCBPolicy,
    OraclePolicy,
    RandomPolicy,
    cumulative_regret,
    make_policy,
    optimal_arm_rate,
    run_policy,
)
from .stats import StatReport, ols_trend, paired_t_test, wilcoxon_signed_rank

__all__ = [
    "EngagementReport",
    "engagement_metrics",
    "SyntheticEnv",
    "Trajectory",
    "TrajectoryStep",
    "default_env",
    "EpsilonGreedyPolicy",
    "LinUCBPolicy",
    "OraclePolicy",
    "RandomPolicy",
    "cumulative_regret",
    "make_policy",
    "optimal_arm_rate",
    "run_policy",
    "StatReport",
    "ols_trend",
    "paired_t_test",
    "wilcoxon_signed_rank",
]
