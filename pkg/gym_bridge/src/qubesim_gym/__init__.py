"""Gym-compatible adapter over the qubesim environment factory.

Exposes the classic Gym control API (reset/step/render/close plus
``observation_space`` and ``action_space`` Box descriptors) without
depending on the gym package itself: ``step`` returns the Gym 0.21-style
4-tuple ``(observation, reward, done, info)``, which is what e.g.
stable-baselines expects. The adapter owns no logic — rewards, termination,
and voltage clamping all happen natively, so the bound and native paths
cannot diverge; observations cross the boundary as float64 with no
conversion loss.

    import qubesim_gym
    env = qubesim_gym.make("swingup", seed=0)
    obs = env.reset()
    obs, reward, done, info = env.step([0.0])
"""

from dataclasses import dataclass, field

import numpy as np

import qubesim

__version__ = "0.1.0"

#: task names accepted by :func:`make` (mirrors the native factory)
ENV_IDS = tuple(qubesim.TASK_NAMES)


class GymAdapterError(Exception):
    """Invalid use of the binding (bad action shape, unknown env id)."""


class ResetError(GymAdapterError):
    """The native reset controller failed to reach the initial state."""


@dataclass(frozen=True)
class Box:
    """Minimal Gym-style box space: elementwise bounds plus shape/dtype."""

    low: np.ndarray
    high: np.ndarray
    shape: tuple = field(init=False)
    dtype: type = np.float64

    def __post_init__(self):
        low = np.asarray(self.low, dtype=np.float64)
        high = np.asarray(self.high, dtype=np.float64)
        if low.shape != high.shape or np.any(low > high):
            raise ValueError("invalid box bounds")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        object.__setattr__(self, "shape", low.shape)

    def contains(self, x) -> bool:
        arr = np.asarray(x, dtype=np.float64)
        return arr.shape == self.shape and bool(
            np.all(arr >= self.low) and np.all(arr <= self.high)
        )


class GymEnvAdapter:
    """Bind one native environment instance behind the Gym API surface."""

    def __init__(self, env: "qubesim.QubeEnv"):
        self._env = env
        task = env.task
        frequency = env.config.domain.frequency
        max_v = env.config.domain.max_voltage
        # velocity estimates are bounded by the wrapped one-period delta
        velocity_bound = np.pi * frequency
        low = [-np.pi, -np.pi, -velocity_bound, -velocity_bound]
        high = [np.pi, np.pi, velocity_bound, velocity_bound]
        if task.is_follow:
            low.append(-np.pi)
            high.append(np.pi)
        self.observation_space = Box(np.array(low), np.array(high))
        self.action_space = Box(np.array([-max_v]), np.array([max_v]))
        self.metadata = {"render.modes": ["text", "csv-frame"]}

    @property
    def native(self) -> "qubesim.QubeEnv":
        """The wrapped environment (bridge-internal escape hatch)."""
        return self._env

    def reset(self) -> np.ndarray:
        try:
            return self._env.reset()
        except qubesim.ResetFailed as exc:
            raise ResetError(str(exc)) from exc

    def step(self, action):
        voltage = self._validate_action(action)
        result = self._env.step(voltage)
        return result.observation, result.reward, result.done, result.info

    def render(self, mode: str = "text") -> str:
        return self._env.render(mode)

    def close(self) -> None:
        self._env.close()

    def _validate_action(self, action) -> float:
        try:
            arr = np.asarray(action, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise GymAdapterError(f"action {action!r} is not numeric") from exc
        flat = arr.reshape(-1)
        if flat.size != 1:
            raise GymAdapterError(
                f"action shape {arr.shape} does not match the action space {self.action_space.shape}"
            )
        # out-of-box magnitudes pass through: the native layer clamps and
        # reports the actuated value in info
        return float(flat[0])


def make(task_name: str, **config) -> GymEnvAdapter:
    """Build an adapter for a canonical task name.

    Keyword arguments pass through to the native factory: ``seed``,
    ``params`` / ``domain_config`` (objects or config-file paths), and task
    overrides such as ``episode_steps``.
    """
    if not isinstance(task_name, str) or task_name not in ENV_IDS:
        raise GymAdapterError(
            f"unknown env id {task_name!r}; valid ids: {', '.join(ENV_IDS)}"
        )
    return GymEnvAdapter(qubesim.make_env(task_name, **config))


__all__ = [
    "Box",
    "ENV_IDS",
    "GymAdapterError",
    "GymEnvAdapter",
    "ResetError",
    "make",
    "__version__",
]
