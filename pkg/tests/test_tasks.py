import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qubesim.core import PendulumState, wrap_angle
from qubesim.errors import UsageError
from qubesim.tasks import (
    TASK_NAMES,
    InitialState,
    RotorProgress,
    TaskKind,
    TaskSpec,
    is_terminal,
    reward_balance,
    reward_dampen,
    reward_follow,
    reward_rotor,
    sample_target,
    sparsify,
    task_spec,
)

PI = math.pi
wrapped_angles = st.floats(-PI + 1e-12, PI)


def rotor_oracle(alphas):
    """Independent Rotor total: floor(peak |net unwrapped displacement| / 2pi)."""
    unwrapped = np.unwrap(np.asarray(alphas))
    return int(np.max(np.abs(unwrapped - unwrapped[0])) // (2 * PI))


class TestRewardBalance:
    def test_goal_is_exactly_one(self):
        assert reward_balance(0.0, 0.0) == 1.0

    def test_anti_goal_is_exactly_zero(self):
        assert reward_balance(PI, PI) == 0.0

    def test_half_upright(self):
        assert reward_balance(0.0, PI / 2) == pytest.approx(0.6, abs=1e-12)

    @given(wrapped_angles, wrapped_angles)
    def test_in_unit_interval(self, theta, alpha):
        r = reward_balance(theta, alpha)
        assert 0.0 <= r <= 1.0

    def test_vectorized(self):
        thetas = np.array([0.0, PI, 0.0])
        alphas = np.array([0.0, PI, PI / 2])
        np.testing.assert_allclose(reward_balance(thetas, alphas), [1.0, 0.0, 0.6], atol=1e-12)


class TestRewardDampen:
    def test_goal_is_exactly_one(self):
        assert reward_dampen(0.0, PI) == 1.0

    def test_upright_scores_pointer_weight(self):
        assert reward_dampen(0.0, 0.0) == pytest.approx(0.2, abs=1e-12)

    def test_anti_goal_is_exactly_zero(self):
        assert reward_dampen(PI, 0.0) == 0.0

    @given(wrapped_angles, wrapped_angles)
    def test_in_unit_interval(self, theta, alpha):
        assert 0.0 <= reward_dampen(theta, alpha) <= 1.0


class TestRewardFollow:
    def test_goal(self):
        assert reward_follow(0.7, 0.0, 0.7) == 1.0

    def test_anti_goal(self):
        assert reward_follow(0.0, PI, PI) == 0.0

    def test_clamp_engages_for_large_raw_arm_error(self):
        # raw |target - theta| approaches 2*pi; pre-clamp value is ~ -0.2
        theta, target = -PI + 0.01, PI
        alpha = PI
        pre_clamp = 1.0 - (0.8 * abs(alpha) + 0.2 * abs(target - theta)) / PI
        assert pre_clamp == pytest.approx(-0.1994, abs=1e-3)
        assert reward_follow(theta, alpha, target) == 0.0

    @given(wrapped_angles, wrapped_angles, wrapped_angles)
    def test_in_unit_interval(self, theta, alpha, target):
        assert 0.0 <= reward_follow(theta, alpha, target) <= 1.0

    @given(wrapped_angles, wrapped_angles)
    def test_zero_target_equals_balance(self, theta, alpha):
        assert reward_follow(theta, alpha, 0.0) == reward_balance(theta, alpha)


class TestBalanceSwingUpShareReward:
    @given(wrapped_angles, wrapped_angles)
    def test_pointwise_equal(self, theta, alpha):
        balance = task_spec("balance")
        swingup = task_spec("swingup")
        s = PendulumState(theta, alpha, 0.0, 0.0)
        assert balance.dense_reward(s) == swingup.dense_reward(s)


class TestRotor:
    def test_stationary_never_rewards(self):
        progress = RotorProgress(start_alpha=PI)
        for _ in range(100):
            assert progress.update(PI) == 0
        assert progress.rotations_awarded == 0

    def test_single_rotation_rewards_once(self):
        # sweep alpha through exactly 2*pi in small steps
        alphas = [wrap_angle(PI + x) for x in np.linspace(0, 2 * PI, 400)]
        progress = RotorProgress(start_alpha=alphas[0])
        rewards = [progress.update(a) for a in alphas[1:]]
        assert sum(rewards) == 1
        assert rotor_oracle(alphas) == 1

    def test_double_rotation_rewards_twice(self):
        alphas = [wrap_angle(PI + x) for x in np.linspace(0, 4 * PI, 800)]
        progress = RotorProgress(start_alpha=alphas[0])
        rewards = [progress.update(a) for a in alphas[1:]]
        assert sum(rewards) == 2
        assert rotor_oracle(alphas) == 2

    def test_dither_across_boundary_rewards_once(self):
        # cross 2*pi, retreat, cross again: net-peak counting pays only once
        forward = list(np.linspace(0, 2 * PI + 0.2, 300))
        back = list(np.linspace(2 * PI + 0.2, 2 * PI - 0.4, 60))
        again = list(np.linspace(2 * PI - 0.4, 2 * PI + 0.3, 60))
        path = forward + back + again
        alphas = [wrap_angle(PI + x) for x in path]
        progress = RotorProgress(start_alpha=alphas[0])
        total = sum(progress.update(a) for a in alphas[1:])
        assert total == 1
        assert rotor_oracle(alphas) == 1

    def test_reverse_direction_counts(self):
        alphas = [wrap_angle(PI - x) for x in np.linspace(0, 2 * PI + 0.1, 500)]
        progress = RotorProgress(start_alpha=alphas[0])
        assert sum(progress.update(a) for a in alphas[1:]) == 1

    def test_matches_oracle_on_random_walks(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            steps = rng.normal(0.0, 0.35, size=rng.integers(50, 400))
            path = np.cumsum(steps)
            alphas = [wrap_angle(PI + x) for x in path]
            progress = RotorProgress(start_alpha=alphas[0])
            total = sum(progress.update(a) for a in alphas[1:])
            assert total == rotor_oracle(alphas)

    def test_reward_rotor_wrapper(self):
        progress = RotorProgress(start_alpha=0.0)
        assert reward_rotor(progress, PendulumState(0, 0.1, 0, 0)) == 0


class TestSparsify:
    def test_balance_inside_goal_box(self):
        task = task_spec("balance-sparse")
        assert sparsify(task, PendulumState(0.05, 0.02, 0, 0)) == 1.0

    def test_balance_outside_alpha_tolerance(self):
        task = task_spec("balance-sparse")
        assert sparsify(task, PendulumState(0.0, 0.3, 0, 0)) == 0.0

    def test_dampen_exact_goal(self):
        task = task_spec("dampen-sparse")
        assert sparsify(task, PendulumState(0.0, PI, 0, 0)) == 1.0

    def test_follow_uses_target_error(self):
        task = task_spec("balance-follow-sparse")
        state = PendulumState(0.5, 0.0, 0, 0)
        assert sparsify(task, state, theta_target=0.5) == 1.0
        assert sparsify(task, state, theta_target=-0.5) == 0.0

    def test_rotor_unsupported(self):
        task = task_spec("rotor")
        with pytest.raises(UsageError):
            sparsify(task, PendulumState(0, 0, 0, 0))

    @given(wrapped_angles, wrapped_angles)
    def test_binary(self, theta, alpha):
        task = task_spec("swingup-sparse")
        assert sparsify(task, PendulumState(theta, alpha, 0, 0)) in (0.0, 1.0)


class TestSampleTarget:
    def test_deterministic_given_seed(self):
        a = sample_target(np.random.default_rng(5), 1.0)
        b = sample_target(np.random.default_rng(5), 1.0)
        assert a == b

    def test_support(self):
        rng = np.random.default_rng(0)
        r = math.radians(80)
        samples = [sample_target(rng, r) for _ in range(10_000)]
        assert all(-r <= s <= r for s in samples)

    def test_mean_near_zero(self):
        rng = np.random.default_rng(1)
        r = math.radians(80)
        samples = np.array([sample_target(rng, r) for _ in range(10_000)])
        # uniform on [-r, r]: std = r/sqrt(3); mean within 3 standard errors
        stderr = (r / math.sqrt(3)) / math.sqrt(len(samples))
        assert abs(samples.mean()) < 3 * stderr


class TestIsTerminal:
    def test_step_budget(self):
        task = task_spec("swingup", episode_steps=100)
        s = PendulumState(0, PI, 0, 0)
        assert not is_terminal(s, task, 99)
        assert is_terminal(s, task, 100)

    def test_arm_limit_all_tasks(self):
        for name in ("swingup", "dampen", "rotor", "balance"):
            task = task_spec(name)
            assert is_terminal(PendulumState(1.8, PI, 0, 0), task, 1)

    def test_balance_fall_rule(self):
        balance = task_spec("balance")
        assert is_terminal(PendulumState(0, 2.0, 0, 0), balance, 1)
        swingup = task_spec("swingup")
        assert not is_terminal(PendulumState(0, PI, 0, 0), swingup, 1)


class TestTaskSpec:
    def test_canonical_names(self):
        assert set(TASK_NAMES) == {
            "dampen", "balance", "swingup", "balance-follow", "swingup-follow", "rotor",
            "dampen-sparse", "balance-sparse", "swingup-sparse",
            "balance-follow-sparse", "swingup-follow-sparse",
        }

    def test_sparse_suffix(self):
        task = task_spec("balance-sparse")
        assert task.kind is TaskKind.BALANCE and task.sparse
        assert task.name == "balance-sparse"

    def test_rotor_sparse_rejected(self):
        with pytest.raises(UsageError, match="valid tasks"):
            task_spec("rotor-sparse")

    def test_unknown_name_lists_valid(self):
        with pytest.raises(UsageError, match="valid tasks"):
            task_spec("cartpole")

    def test_default_initials(self):
        assert task_spec("swingup").initial is InitialState.DOWN
        assert task_spec("rotor").initial is InitialState.DOWN
        assert task_spec("dampen").initial is InitialState.DOWN
        assert task_spec("balance").initial is InitialState.UPRIGHT
        assert task_spec("balance-follow").initial is InitialState.UPRIGHT

    def test_observation_dims(self):
        assert task_spec("swingup").observation_dim == 4
        assert task_spec("swingup-follow").observation_dim == 5

    def test_arbitrary_requires_state(self):
        with pytest.raises(ValueError):
            TaskSpec(kind=TaskKind.BALANCE, initial=InitialState.ARBITRARY)

    def test_rotor_has_no_dense_reward(self):
        with pytest.raises(ValueError):
            task_spec("rotor").dense_reward(PendulumState(0, 0, 0, 0))
