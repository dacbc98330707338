from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from sleepcoach.domain import ChatTurn, Mode, Role, Session
from sleepcoach.errors import EmptyPhase
from sleepcoach.simkit import (
    SyntheticEnv,
    cumulative_regret,
    default_env,
    engagement_metrics,
    make_policy,
    optimal_arm_rate,
    run_policy,
)
from sleepcoach.simkit.env import N_CONTEXTS, context_vector_for


def dominant_env(margin=0.3, n_arms=5, noise_sd=0.05):
    """Arm 0 beats every other arm by exactly `margin` in every context."""
    base = np.full(16, 0.1)
    weights = [base + margin / 3.0] + [base.copy() for _ in range(n_arms - 1)]
    return SyntheticEnv(np.array(weights), noise_sd=noise_sd, seed=1)


class TestEnv:
    def test_context_space(self):
        assert N_CONTEXTS == 140
        for i in (0, 77, 139):
            values = context_vector_for(i).values
            assert sum(values) == 3.0

    def test_default_fixture_pins_acceptance_shape(self):
        env = default_env()
        assert env.n_arms == 5
        assert env.true_weights.shape == (5, 16)
        assert env.noise_sd == 0.05
        assert env.min_margin() >= 0.15
        assert env.expected.min() >= 0.0 and env.expected.max() <= 1.0

    def test_rewards_clamped(self):
        env = SyntheticEnv(np.full((2, 16), 0.9), noise_sd=3.0, seed=1)
        assert env.expected.max() <= 1.0
        rng = np.random.default_rng(0)
        samples = [env.observe(0, 5, rng) for _ in range(200)]
        assert all(0.0 <= s <= 1.0 for s in samples)

    def test_roundtrip_dict(self):
        env = default_env()
        again = SyntheticEnv.from_dict(env.to_dict())
        np.testing.assert_array_equal(env.true_weights, again.true_weights)
        assert again.arm_names == env.arm_names


class TestRollouts:
    def test_oracle_has_zero_regret(self):
        env = default_env()
        traj = run_policy(env, make_policy("oracle", env, 0), 500, seed=0)
        regret = cumulative_regret(traj)
        assert np.all(regret == 0.0)

    def test_regret_non_decreasing(self):
        env = default_env()
        traj = run_policy(env, make_policy("random", env, 0), 500, seed=0)
        regret = cumulative_regret(traj)
        assert np.all(np.diff(regret) >= 0)
        for step in traj.steps:
            assert step.optimal_expected >= step.expected

    def test_same_seed_same_trajectory(self):
        env = default_env()
        t1 = run_policy(env, make_policy("linucb", env, 3), 300, seed=3)
        t2 = run_policy(env, make_policy("linucb", env, 3), 300, seed=3)
        assert t1 == t2

    def test_random_policy_matches_analytic_regret(self):
        # one arm dominates by m everywhere: mean regret = m (k-1) / k
        margin, k = 0.3, 5
        env = dominant_env(margin=margin, n_arms=k)
        traj = run_policy(env, make_policy("random", env, 0), 5000, seed=0)
        mean_regret = cumulative_regret(traj)[-1] / 5000
        assert mean_regret == pytest.approx(margin * (k - 1) / k, abs=0.02)

    def test_linucb_beats_random_quickly(self):
        env = default_env()
        lin = cumulative_regret(run_policy(env, make_policy("linucb", env, 0), 2000, 0))[-1]
        rnd = cumulative_regret(run_policy(env, make_policy("random", env, 0), 2000, 0))[-1]
        assert lin < 0.4 * rnd

    def test_epsilon_greedy_learns_dominant_arm(self):
        env = dominant_env()
        pol = make_policy("epsilon_greedy", env, 0, epsilon=0.1)
        traj = run_policy(env, pol, 3000, seed=0)
        tail = [s.arm for s in traj.steps[-500:]]
        assert tail.count(0) / len(tail) > 0.8

    def test_optimal_arm_rate_on_oracle(self):
        env = default_env()
        traj = run_policy(env, make_policy("oracle", env, 0), 400, seed=1)
        assert optimal_arm_rate(env, traj) == 1.0


class TestEngagement:
    def _session(self, turn_days, mode=Mode.COACH, turns_per_day=1):
        session = Session("u1", mode, created_at=datetime(2024, 7, 1, tzinfo=timezone.utc))
        ts = datetime(2024, 7, 1, 9, 0, tzinfo=timezone.utc)
        for day in turn_days:
            base = ts.replace(day=day)
            for i in range(turns_per_day):
                role = Role.USER if i % 2 == 0 else Role.ASSISTANT
                session.turns.append(ChatTurn(role, f"m{day}-{i}", base + timedelta(minutes=i)))
        return session

    def test_active_ratio(self):
        session = self._session([1, 4, 9, 15, 20])
        report = engagement_metrics([session], datetime(2024, 7, 1).date(),
                                    datetime(2024, 7, 20).date())
        assert report.active_ratio == 0.25
        assert report.active_days == 5
        assert report.phase_days == 20

    def test_no_sessions(self):
        report = engagement_metrics([], datetime(2024, 7, 1).date(),
                                    datetime(2024, 7, 20).date())
        assert report.active_ratio == 0.0
        assert report.mean_turns == 0.0

    def test_mean_turns_over_conversations(self):
        s1 = self._session([1], turns_per_day=4)
        s2 = self._session([2], turns_per_day=8)
        report = engagement_metrics([s1, s2], datetime(2024, 7, 1).date(),
                                    datetime(2024, 7, 20).date())
        assert report.mean_turns == 6.0
        assert report.n_conversations == 2

    def test_empty_phase(self):
        with pytest.raises(EmptyPhase):
            engagement_metrics([], datetime(2024, 7, 20).date(), datetime(2024, 7, 1).date())

    def test_turns_outside_phase_ignored(self):
        session = self._session([1, 25])
        report = engagement_metrics([session], datetime(2024, 7, 1).date(),
                                    datetime(2024, 7, 20).date())
        assert report.active_days == 1
