"""Simulated Quanser Qube Servo2 rotary pendulum with RL tasks and baselines.

The quickest way in is the environment factory:

    import qubesim
    env = qubesim.make_env("swingup", seed=0)
    obs = env.reset()
    result = env.step(0.0)
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .core import Observation, PendulumState, PhysicalParams, angle_from_down, make_observation, wrap_angle
from .domain import DomainConfig, IndicatorColor, ResetTarget, SensorFrame, SimulatedQube
from .env import EnvConfig, QubeEnv, StepResult, make_env
from .errors import (
    ConfigError,
    IntegrationError,
    NotReady,
    ProtocolError,
    QubeSimError,
    ResetFailed,
    SafetyViolation,
    SolverFailed,
    UsageError,
)
from .tasks import TASK_NAMES, TaskKind, TaskSpec, task_spec

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Observation",
    "PendulumState",
    "PhysicalParams",
    "angle_from_down",
    "make_observation",
    "wrap_angle",
    "DomainConfig",
    "IndicatorColor",
    "ResetTarget",
    "SensorFrame",
    "SimulatedQube",
    "EnvConfig",
    "QubeEnv",
    "StepResult",
    "make_env",
    "TaskSpec",
    "TaskKind",
    "TASK_NAMES",
    "task_spec",
    "QubeSimError",
    "ConfigError",
    "IntegrationError",
    "NotReady",
    "ProtocolError",
    "ResetFailed",
    "SafetyViolation",
    "SolverFailed",
    "UsageError",
    "__version__",
]
