"""Shared plant types, angle conventions, and observation packing.

Conventions (used everywhere in this package):

* ``theta`` — rotary arm angle, zero at front-center, wrapped to (-pi, pi].
* ``alpha`` — pendulum angle measured from upright, wrapped to (-pi, pi];
  ``alpha = pi`` is the hanging-down rest position.
* Angular velocities are in rad/s and are not wrapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

#: An observation is a flat float64 vector: [theta, alpha, theta_dot,
#: alpha_dot] plus, for Follow tasks only, the arm target angle.
Observation = np.ndarray


def wrap_angle(raw: float) -> float:
    """Wrap a finite angle into (-pi, pi]; the boundary maps to +pi."""
    if not math.isfinite(raw):
        raise ValueError(f"cannot wrap non-finite angle {raw!r}")
    wrapped = math.remainder(raw, TWO_PI)
    # math.remainder returns values in [-pi, pi]; fold the open end.
    if wrapped <= -math.pi:
        wrapped = math.pi
    return wrapped


def angle_from_down(alpha: float) -> float:
    """Distance in radians from the hanging-down position, in [0, pi].

    Zero iff the pendulum hangs straight down (alpha = pi), pi iff upright.
    """
    if not math.isfinite(alpha) or alpha > math.pi or alpha <= -math.pi:
        raise ValueError(f"alpha {alpha!r} outside (-pi, pi]")
    return math.pi - abs(alpha)


@dataclass(frozen=True)
class PendulumState:
    """Ground-truth continuous plant state; angles wrapped at construction."""

    theta: float
    alpha: float
    theta_dot: float
    alpha_dot: float

    def __post_init__(self):
        for name in ("theta", "alpha", "theta_dot", "alpha_dot"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.alpha, self.theta_dot, self.alpha_dot])

    @classmethod
    def from_array(cls, values) -> "PendulumState":
        t, a, td, ad = (float(v) for v in values)
        return cls(t, a, td, ad)


def make_observation(state: PendulumState, target: float | None = None) -> Observation:
    """Pack a state (and, for Follow tasks, the arm target) into a vector."""
    if target is None:
        return np.array([state.theta, state.alpha, state.theta_dot, state.alpha_dot])
    return np.array(
        [state.theta, state.alpha, state.theta_dot, state.alpha_dot, wrap_angle(float(target))]
    )


@dataclass(frozen=True)
class PhysicalParams:
    """Plant and motor constants defining the simulated Qube.

    Defaults are the manufacturer's published Qube-Servo 2 constants
    (datasheet-sourced, SI units); rod inertias use the thin-rod formula
    m*L^2/12 about the center of mass. Every value is overridable, e.g.
    from a key-value config file via :meth:`from_file`.
    """

    motor_resistance: float = 8.4        # ohm
    torque_constant: float = 0.042       # N*m/A
    back_emf_constant: float = 0.042     # V*s/rad
    arm_mass: float = 0.095              # kg
    arm_length: float = 0.085            # m
    arm_inertia: float = 0.095 * 0.085**2 / 12.0       # kg*m^2, about pivot
    pendulum_mass: float = 0.024         # kg
    pendulum_length: float = 0.129       # m
    pendulum_inertia_cm: float = 0.024 * 0.129**2 / 12.0  # kg*m^2, about CoM
    arm_damping: float = 0.0005          # N*m*s/rad
    pendulum_damping: float = 0.00005    # N*m*s/rad
    gravity: float = 9.81                # m/s^2

    def __post_init__(self):
        positive = (
            "motor_resistance",
            "arm_mass",
            "arm_length",
            "arm_inertia",
            "pendulum_mass",
            "pendulum_length",
            "pendulum_inertia_cm",
            "gravity",
        )
        nonnegative = ("torque_constant", "back_emf_constant", "arm_damping", "pendulum_damping")
        for name in positive + nonnegative:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}")
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be strictly positive, got {getattr(self, name)!r}")
        for name in nonnegative:
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    @classmethod
    def from_file(cls, path) -> "PhysicalParams":
        values = load_key_value(path)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown keys in {path}: {', '.join(unknown)}")
        return cls(**{k: float(v) for k, v in values.items()})


def load_key_value(path) -> dict[str, str]:
    """Parse a plain-text ``name = value`` config file (one pair per line).

    Blank lines and ``#`` comments are skipped; duplicate keys are rejected.
    """
    text = Path(path).read_text()
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'name = value', got {line!r}")
        name, _, value = stripped.partition("=")
        name = name.strip()
        value = value.strip()
        if not name or not value:
            raise ConfigError(f"{path}:{lineno}: expected 'name = value', got {line!r}")
        if name in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {name!r}")
        values[name] = value
    return values


def parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")
