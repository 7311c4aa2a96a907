"""The six Qube task definitions: rewards, initial states, termination.

Reward orientation: the task sheets express each objective as a normalized
cost c in [0, 1] that is smallest at the goal; the per-step reward used
everywhere in this package is ``1 - c``, so the goal state scores 1.0 and
the worst state 0.0, and Follow rewards clamp at zero. This transform is
deliberate and documented in the README.

The dense reward functions depend only on angles, accept scalars or numpy
arrays, and are exact at the goal/anti-goal corners (the 0.8/0.2 weights
are evaluated as 4/5 and 1/5 so the extreme costs cancel without rounding
residue).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import PendulumState, angle_from_down, wrap_angle
from .errors import UsageError

DEG = math.pi / 180.0


class TaskKind(enum.Enum):
    DAMPEN = "dampen"
    BALANCE = "balance"
    SWING_UP = "swingup"
    BALANCE_FOLLOW = "balance-follow"
    SWING_UP_FOLLOW = "swingup-follow"
    ROTOR = "rotor"


FOLLOW_KINDS = (TaskKind.BALANCE_FOLLOW, TaskKind.SWING_UP_FOLLOW)
BALANCE_KINDS = (TaskKind.BALANCE, TaskKind.BALANCE_FOLLOW)


class InitialState(enum.Enum):
    """Where an episode begins; Arbitrary states are set via TaskSpec.initial_state."""

    DOWN = "down"
    UPRIGHT = "upright"
    ARBITRARY = "arbitrary"


def _cost(alpha_term, theta_term):
    # (0.8*a + 0.2*t)/pi, scaled by 5/5 so a = t = pi gives exactly 1.0
    return (4.0 * alpha_term + theta_term) / (5.0 * math.pi)


def reward_balance(theta, alpha):
    """Dense reward for Balance and Swing-Up: 1 - (0.8|alpha| + 0.2|theta|)/pi."""
    r = 1.0 - _cost(np.abs(alpha), np.abs(theta))
    return np.maximum(r, 0.0)


def reward_dampen(theta, alpha):
    """Dense reward for Dampen: distance from hanging-down replaces |alpha|."""
    r = 1.0 - _cost(math.pi - np.abs(alpha), np.abs(theta))
    return np.maximum(r, 0.0)


def reward_follow(theta, alpha, theta_target):
    """Dense reward for the Follow tasks, clamped below at zero.

    The arm error is the raw absolute difference (up to 2*pi), which is what
    makes the clamp reachable.
    """
    r = 1.0 - _cost(np.abs(alpha), np.abs(theta_target - theta))
    return np.maximum(r, 0.0)


@dataclass
class RotorProgress:
    """Per-episode net pendulum displacement tracker for the Rotor task.

    ``unwrapped_alpha`` accumulates shortest-path deltas of the wrapped
    pendulum angle; a rotation is awarded each time the peak |displacement|
    from the episode start crosses another multiple of 2*pi. Counting the
    peak of the *net* displacement (instead of boundary crossings) means
    dithering back and forth across a rotation boundary never re-awards.
    """

    start_alpha: float
    unwrapped_alpha: float = field(init=False)
    peak_displacement: float = field(init=False, default=0.0)
    rotations_awarded: int = field(init=False, default=0)
    _prev_wrapped: float = field(init=False, repr=False)

    def __post_init__(self):
        self.unwrapped_alpha = self.start_alpha
        self._prev_wrapped = self.start_alpha

    def update(self, alpha: float) -> int:
        """Advance with the next wrapped angle; returns 1 on a newly completed rotation."""
        self.unwrapped_alpha += wrap_angle(alpha - self._prev_wrapped)
        self._prev_wrapped = alpha
        displacement = abs(self.unwrapped_alpha - self.start_alpha)
        if displacement > self.peak_displacement:
            self.peak_displacement = displacement
        completed = int(self.peak_displacement // (2.0 * math.pi))
        if completed > self.rotations_awarded:
            self.rotations_awarded = completed
            return 1
        return 0


def reward_rotor(progress: RotorProgress, state: PendulumState) -> int:
    """Binary per-step Rotor reward; mutates progress."""
    return progress.update(state.alpha)


@dataclass(frozen=True)
class TaskSpec:
    """Everything the environment needs to run one task."""

    kind: TaskKind
    sparse: bool = False
    episode_steps: int = 2048
    initial: InitialState = InitialState.DOWN
    initial_state: PendulumState | None = None  # required iff initial == ARBITRARY
    target_range: float = 80.0 * DEG            # Follow tasks only
    sparse_alpha_tol: float = 5.0 * DEG
    sparse_theta_tol: float = 10.0 * DEG
    indicator_threshold: float = 0.8

    def __post_init__(self):
        if self.episode_steps < 1:
            raise ValueError(f"episode_steps must be >= 1, got {self.episode_steps}")
        if self.sparse and self.kind is TaskKind.ROTOR:
            raise ValueError("the Rotor task has no sparse variant")
        if not 0.0 < self.target_range <= math.pi:
            raise ValueError(f"target_range must be in (0, pi], got {self.target_range}")
        if self.initial is InitialState.ARBITRARY and self.initial_state is None:
            raise ValueError("initial=ARBITRARY requires initial_state")

    @property
    def is_follow(self) -> bool:
        return self.kind in FOLLOW_KINDS

    @property
    def name(self) -> str:
        return self.kind.value + ("-sparse" if self.sparse else "")

    @property
    def observation_dim(self) -> int:
        return 5 if self.is_follow else 4

    def dense_reward(self, state: PendulumState, theta_target: float | None = None) -> float:
        if self.kind is TaskKind.DAMPEN:
            return float(reward_dampen(state.theta, state.alpha))
        if self.is_follow:
            if theta_target is None:
                raise ValueError("Follow tasks need theta_target")
            return float(reward_follow(state.theta, state.alpha, theta_target))
        if self.kind is TaskKind.ROTOR:
            raise ValueError("Rotor has no dense state reward; use reward_rotor")
        return float(reward_balance(state.theta, state.alpha))


def sparsify(task: TaskSpec, state: PendulumState, theta_target: float | None = None) -> float:
    """Binary goal-box reward: 1.0 inside the task's goal box, else 0.0."""
    if task.kind is TaskKind.ROTOR:
        raise UsageError("the Rotor task does not support sparse rewards")
    if task.kind is TaskKind.DAMPEN:
        alpha_ok = angle_from_down(state.alpha) <= task.sparse_alpha_tol
        theta_err = abs(state.theta)
    elif task.is_follow:
        if theta_target is None:
            raise ValueError("Follow tasks need theta_target")
        alpha_ok = abs(state.alpha) <= task.sparse_alpha_tol
        theta_err = abs(theta_target - state.theta)
    else:
        alpha_ok = abs(state.alpha) <= task.sparse_alpha_tol
        theta_err = abs(state.theta)
    return 1.0 if (alpha_ok and theta_err <= task.sparse_theta_tol) else 0.0


def sample_target(rng: np.random.Generator, target_range: float) -> float:
    """Episode-fixed Follow target, uniform on [-target_range, +target_range]."""
    return float(rng.uniform(-target_range, target_range))


ARM_LIMIT = math.pi / 2.0
FALL_LIMIT = math.pi / 2.0


def is_terminal(state: PendulumState, task: TaskSpec, step: int) -> bool:
    """Episode end: step budget, arm limit (all tasks), or a Balance fall."""
    if step >= task.episode_steps:
        return True
    if abs(state.theta) > ARM_LIMIT:
        return True
    if task.kind in BALANCE_KINDS and abs(state.alpha) > FALL_LIMIT:
        return True
    return False


_DEFAULT_INITIAL = {
    TaskKind.DAMPEN: InitialState.DOWN,
    TaskKind.BALANCE: InitialState.UPRIGHT,
    TaskKind.SWING_UP: InitialState.DOWN,
    TaskKind.BALANCE_FOLLOW: InitialState.UPRIGHT,
    TaskKind.SWING_UP_FOLLOW: InitialState.DOWN,
    TaskKind.ROTOR: InitialState.DOWN,
}

TASK_NAMES = tuple(
    [k.value for k in TaskKind] + [k.value + "-sparse" for k in TaskKind if k is not TaskKind.ROTOR]
)


def task_spec(name: str, **overrides) -> TaskSpec:
    """Build a TaskSpec from a canonical task name (``-sparse`` suffix allowed)."""
    base = name
    sparse = False
    if name.endswith("-sparse"):
        base = name[: -len("-sparse")]
        sparse = True
    try:
        kind = TaskKind(base)
    except ValueError:
        raise UsageError(f"unknown task {name!r}; valid tasks: {', '.join(TASK_NAMES)}") from None
    if sparse and kind is TaskKind.ROTOR:
        raise UsageError(f"unknown task {name!r}; valid tasks: {', '.join(TASK_NAMES)}")
    spec = TaskSpec(kind=kind, sparse=sparse, initial=_DEFAULT_INITIAL[kind])
    return replace(spec, **overrides) if overrides else spec
