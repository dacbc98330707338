"""Rollout policies and regret accounting.

run_policy draws contexts i.i.d. from the environment, lets the policy
choose, observes a noisy reward, and (for learning policies) updates after
every step. Regret is measured against the environment's true expectations,
not the realized noise.
"""

from __future__ import annotations

import numpy as np

from ..bandit import BanditModel
from ..context import DIM
from .env import SyntheticEnv, Trajectory, TrajectoryStep, context_vector_for


class RandomPolicy:
    name = "random"

    def __init__(self, n_arms: int):
        self.n_arms = n_arms

    def choose(self, x, rng) -> int:
        return int(rng.integers(self.n_arms))

    def learn(self, x, arm: int, reward: float) -> None:
        pass


class OraclePolicy:
    """Always plays the true-best arm; the zero-regret reference."""

    name = "oracle"

    def __init__(self, env: SyntheticEnv):
        self.env = env

    def choose(self, x, rng) -> int:
        expected = np.clip(self.env.true_weights @ np.asarray(x), 0.0, 1.0)
        return int(np.argmax(expected))

    def learn(self, x, arm: int, reward: float) -> None:
        pass


class EpsilonGreedyPolicy:
    """Context-free running-mean baseline with epsilon exploration."""

    name = "epsilon_greedy"

    def __init__(self, n_arms: int, epsilon: float = 0.1):
        self.epsilon = float(epsilon)
        self.counts = np.zeros(n_arms, dtype=int)
        self.means = np.zeros(n_arms)

    def choose(self, x, rng) -> int:
        if rng.random() < self.epsilon:
            return int(rng.integers(len(self.counts)))
        best = self.means.max()
        tied = np.flatnonzero(self.means == best)
        return int(tied[rng.integers(len(tied))])

    def learn(self, x, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.means[arm] += (reward - self.means[arm]) / self.counts[arm]


class LinUCBPolicy:
    name = "linucb"

    def __init__(self, arm_names, dim: int = DIM, alpha: float = 1.0, seed: int = 0):
        self.model = BanditModel(arm_names, dim, alpha=alpha, seed=seed)

    def choose(self, x, rng) -> int:
        return self.model.select(x).index

    def learn(self, x, arm: int, reward: float) -> None:
        self.model.update(self.model.arm_ids[arm], x, reward)


def make_policy(name: str, env: SyntheticEnv, seed: int,
                alpha: float = 1.0, epsilon: float = 0.1):
    if name == "random":
        return RandomPolicy(env.n_arms)
    if name == "oracle":
        return OraclePolicy(env)
    if name == "epsilon_greedy":
        return EpsilonGreedyPolicy(env.n_arms, epsilon)
    if name == "linucb":
        return LinUCBPolicy(env.arm_names, DIM, alpha=alpha, seed=seed)
    raise ValueError(f"unknown policy {name!r}")


def run_policy(env: SyntheticEnv, policy, n_rounds: int, seed: int) -> Trajectory:
    """Roll one seeded trajectory; same (env, policy, seed) always yields
    identical steps."""
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    rng_env = np.random.default_rng([seed, 0])
    rng_policy = np.random.default_rng([seed, 1])
    vectors = [context_vector_for(i).values for i in range(env.expected.shape[1])]
    steps = []
    for _ in range(n_rounds):
        c = env.sample_context(rng_env)
        x = vectors[c]
        arm = policy.choose(x, rng_policy)
        reward = env.observe(arm, c, rng_env)
        policy.learn(x, arm, reward)
        steps.append(TrajectoryStep(
            context_index=c,
            context_values=x,
            arm=arm,
            reward=reward,
            expected=float(env.expected[arm, c]),
            optimal_expected=float(env.optimal_expected[c]),
        ))
    return Trajectory(policy=policy.name, seed=seed, steps=tuple(steps))


def cumulative_regret(trajectory: Trajectory) -> np.ndarray:
    """Prefix sums of per-step true-expectation regret (non-decreasing)."""
    if not trajectory.steps:
        raise ValueError("trajectory is empty")
    gaps = np.array([s.optimal_expected - s.expected for s in trajectory.steps])
    return np.cumsum(gaps)


def optimal_arm_rate(env: SyntheticEnv, trajectory: Trajectory, tail_fraction: float = 0.2) -> float:
    """Fraction of optimal-arm choices over the trailing part of a run."""
    steps = trajectory.steps
    tail = steps[int(len(steps) * (1.0 - tail_fraction)):]
    hits = sum(1 for s in tail if s.arm == env.optimal_arms[s.context_index])
    return hits / len(tail)
