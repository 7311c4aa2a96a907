"""Gym-style environment: a task layered on a simulated Qube domain.

``reset`` drives the plant to the task's initial state (running a reset
controller where the task demands it, with the indicator yellow), ``step``
actuates one control period and scores the resulting state with the task
reward. Identical configs and seeds give bit-identical episodes in
virtual-clock mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Observation, PendulumState, PhysicalParams, make_observation
from .domain import DomainConfig, IndicatorColor, ResetTarget, SimulatedQube
from .errors import ProtocolError
from .records import TrajectoryRecord, TrajectoryRecorder, csv_row_text
from .tasks import (
    InitialState,
    RotorProgress,
    TaskKind,
    TaskSpec,
    is_terminal,
    reward_rotor,
    sample_target,
    sparsify,
    task_spec,
)

# Balance starts "almost inverted": zero-mean Gaussian perturbation of the
# upright rest state (simulation stand-in for the hardware's innate spread).
BALANCE_ALPHA_SIGMA = math.radians(2.0)
BALANCE_ALPHA_DOT_SIGMA = 0.05


@dataclass(frozen=True)
class EnvConfig:
    """Bundle of task, domain, plant parameters and the episode seed.

    The task's episode_steps are counted in domain control periods, so the
    episode duration is episode_steps / domain.frequency seconds.
    """

    task: TaskSpec
    domain: DomainConfig = field(default_factory=DomainConfig)
    params: PhysicalParams = field(default_factory=PhysicalParams)
    seed: int = 0


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict

    def __post_init__(self):
        if not 0.0 <= self.reward <= 1.0:
            raise ValueError(f"reward {self.reward!r} outside [0, 1]")


class QubeEnv:
    """One task on one simulated device; single-owner, not thread-shared."""

    def __init__(self, config: EnvConfig, recorder: TrajectoryRecorder | None = None):
        self.config = config
        self.task = config.task
        self.domain = SimulatedQube(config.domain, config.params)
        self._rng = np.random.default_rng(config.seed)
        self._open = True
        self._needs_reset = True
        self._done = False
        self._step_idx = 0
        self._row_idx = 0
        self._recorder = None
        if recorder is not None:
            self.attach_recorder(recorder)
        self._theta_target: float | None = None
        self._rotor: RotorProgress | None = None
        self._last_reward = 0.0
        self._cumulative = 0.0
        self._last_record: TrajectoryRecord | None = None

    # -- lifecycle ----------------------------------------------------------

    def _check_open(self):
        if not self._open:
            raise ProtocolError("environment is closed")

    def attach_recorder(self, recorder: TrajectoryRecorder) -> None:
        """Log every step (including reset-controller steps) to the recorder.

        Row numbering continues from the recorder's existing rows so a shared
        file stays strictly increasing across episodes.
        """
        self._recorder = recorder
        self._row_idx = len(recorder.records)

    def reset(self) -> Observation:
        """Start a new episode and return its first observation."""
        self._check_open()
        if self.task.is_follow:
            self._theta_target = sample_target(self._rng, self.task.target_range)
        else:
            self._theta_target = None
        self.domain.reset(self._reset_target(), on_step=self._record_reset_step)
        self._step_idx = 0
        self._done = False
        self._needs_reset = False
        self._cumulative = 0.0
        state = self.domain.read_full_state()
        self._rotor = RotorProgress(state.alpha) if self.task.kind is TaskKind.ROTOR else None
        reward = 0.0 if self.task.kind is TaskKind.ROTOR else self._state_reward(state)
        self._set_reward_indicator(reward)
        self._last_reward = reward
        observation = make_observation(state, self._theta_target)
        self._record_row(state, observation, reward, done=False)
        return observation

    def step(self, action) -> StepResult:
        """Actuate one control period; errors if the episode is over."""
        self._check_open()
        if self._needs_reset:
            raise ProtocolError("reset() must be called before step()")
        if self._done:
            raise ProtocolError("episode is done; call reset()")
        voltage = _as_voltage(action)
        self.domain.step(voltage)
        state = self.domain.read_full_state()
        self._step_idx += 1
        if self._rotor is not None:
            reward = float(reward_rotor(self._rotor, state))
        else:
            reward = self._state_reward(state)
        self._cumulative += reward
        self._done = is_terminal(state, self.task, self._step_idx)
        self._set_reward_indicator(reward)
        self._last_reward = reward
        observation = make_observation(state, self._theta_target)
        self._record_row(state, observation, reward, done=self._done)
        info = {
            "step": self._step_idx,
            "indicator": self.domain.indicator,
            "overruns": self.domain.overruns,
            "voltage_commanded": self.domain.commanded_voltage,
            "voltage_actuated": self.domain.actuated_voltage,
        }
        if self._theta_target is not None:
            info["theta_target"] = self._theta_target
        if self.config.domain.oracle_state:
            info["true_state"] = self.domain.state
        return StepResult(observation, reward, self._done, info)

    def render(self, mode: str = "text") -> str:
        """Text line or CSV row describing the current step."""
        self._check_open()
        if mode == "text":
            line = self.domain.render_line(self._last_reward)
            return f"{line} task={self.task.name} return={self._cumulative:.6f}"
        if mode == "csv-frame":
            if self._last_record is None:
                raise ProtocolError("nothing to render before reset()")
            return csv_row_text(self._last_record)
        raise ValueError(f"unknown render mode {mode!r}")

    def close(self) -> None:
        """Release the domain and flush any recorder; idempotent."""
        if not self._open:
            return
        self._open = False
        if self._recorder is not None:
            self._recorder.flush()

    # -- internals ----------------------------------------------------------

    def _reset_target(self) -> ResetTarget:
        initial = self.task.initial
        if initial is InitialState.DOWN:
            return ResetTarget.down()
        if initial is InitialState.ARBITRARY:
            return ResetTarget.arbitrary(self.task.initial_state)
        # Upright: in simulation the perturbed state is set directly rather
        # than re-running the swing-up controller for every episode.
        alpha = self._rng.normal(0.0, BALANCE_ALPHA_SIGMA)
        alpha_dot = self._rng.normal(0.0, BALANCE_ALPHA_DOT_SIGMA)
        return ResetTarget.arbitrary(PendulumState(0.0, alpha, 0.0, alpha_dot))

    def _state_reward(self, state: PendulumState) -> float:
        if self.task.sparse:
            return sparsify(self.task, state, self._theta_target)
        return self.task.dense_reward(state, self._theta_target)

    def _set_reward_indicator(self, reward: float) -> None:
        color = IndicatorColor.GREEN if reward >= self.task.indicator_threshold else IndicatorColor.RED
        self.domain.set_indicator(color)

    def _record_reset_step(self) -> None:
        if self._recorder is None:
            return
        state = self.domain.read_full_state()
        if self._rotor is not None or self.task.kind is TaskKind.ROTOR:
            reward = 0.0
        else:
            reward = self._state_reward(state)
        observation = make_observation(state, self._theta_target)
        self._record_row(state, observation, reward, done=False)

    def _record_row(self, state, observation, reward: float, done: bool) -> None:
        truth = self.domain.state
        record = TrajectoryRecord(
            step=self._row_idx,
            time=self.domain.time,
            theta=truth.theta,
            alpha=truth.alpha,
            theta_dot=truth.theta_dot,
            alpha_dot=truth.alpha_dot,
            observation=[float(v) for v in observation],
            voltage_commanded=self.domain.commanded_voltage,
            voltage_actuated=self.domain.actuated_voltage,
            reward=float(reward),
            indicator=self.domain.indicator,
            done=done,
        )
        self._row_idx += 1
        self._last_record = record
        if self._recorder is not None:
            self._recorder.append(record)


def _as_voltage(action) -> float:
    values = np.asarray(action, dtype=float).reshape(-1)
    if values.size != 1:
        raise ValueError(f"action must be a single voltage, got shape {values.shape}")
    return float(values[0])


def make_env(
    task,
    params=None,
    domain_config=None,
    seed: int = 0,
    recorder: TrajectoryRecorder | None = None,
    **task_overrides,
) -> QubeEnv:
    """Environment factory: task name (or TaskSpec) plus optional config files.

    ``params`` and ``domain_config`` accept ready objects or paths to
    key-value config files. Keyword overrides are applied to the task spec
    (e.g. ``episode_steps=512``).
    """
    if isinstance(task, str):
        spec = task_spec(task, **task_overrides)
    elif isinstance(task, TaskSpec):
        spec = replace(task, **task_overrides) if task_overrides else task
    else:
        raise TypeError(f"task must be a name or TaskSpec, got {type(task)!r}")
    if params is None:
        params = PhysicalParams()
    elif not isinstance(params, PhysicalParams):
        params = PhysicalParams.from_file(params)
    if domain_config is None:
        domain_config = DomainConfig()
    elif not isinstance(domain_config, DomainConfig):
        domain_config = DomainConfig.from_file(domain_config)
    config = EnvConfig(task=spec, domain=domain_config, params=params, seed=seed)
    return QubeEnv(config, recorder=recorder)
