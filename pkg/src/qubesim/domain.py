"""Hardware-abstraction layer: the simulated Qube device.

A domain owns the plant and its I/O realism: encoder quantization,
velocity estimation from angle differences, voltage clamping and safety
checks, fixed-frequency pacing (virtual clock by default, wall clock on
request), and the indicator LED. Tasks and rewards live above this layer,
so a hardware backend could be swapped in behind the same surface.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, fields

from .core import (
    PendulumState,
    PhysicalParams,
    load_key_value,
    parse_bool,
    wrap_angle,
)
from .dynamics import integrate_step
from .errors import ConfigError, NotReady, SafetyViolation

TWO_PI = 2.0 * math.pi


class IndicatorColor:
    """LED protocol: yellow while a reset controller owns the actuator,
    green/red for high/low reward during agent control."""

    YELLOW = "yellow"
    GREEN = "green"
    RED = "red"


@dataclass(frozen=True)
class SensorFrame:
    """One raw sensor readout: encoder counts plus the domain clock."""

    encoder_theta: int
    encoder_alpha: int
    timestamp: float


@dataclass(frozen=True)
class DomainConfig:
    frequency: float = 250.0             # control rate, Hz
    encoder_counts_per_rev: int = 2048
    max_voltage: float = 3.0             # action clamp
    safety_voltage: float = 18.0         # hard abort level (controller bug)
    realtime: bool = False               # wall-clock pacing; virtual clock otherwise
    integrator_substeps: int = 10
    velocity_filter_cutoff: float = 50.0  # Hz; 0 disables filtering
    oracle_state: bool = False           # bypass sensor models (debug only)

    def __post_init__(self):
        if not self.frequency > 0.0:
            raise ConfigError(f"frequency must be positive, got {self.frequency!r}")
        if self.encoder_counts_per_rev < 4:
            raise ConfigError(f"encoder_counts_per_rev must be >= 4, got {self.encoder_counts_per_rev!r}")
        if not 0.0 < self.max_voltage <= self.safety_voltage:
            raise ConfigError(
                f"need 0 < max_voltage <= safety_voltage, got {self.max_voltage!r}, {self.safety_voltage!r}"
            )
        if self.integrator_substeps < 1:
            raise ConfigError(f"integrator_substeps must be >= 1, got {self.integrator_substeps!r}")
        if self.velocity_filter_cutoff < 0.0:
            raise ConfigError(f"velocity_filter_cutoff must be >= 0, got {self.velocity_filter_cutoff!r}")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    @classmethod
    def from_file(cls, path) -> "DomainConfig":
        raw = load_key_value(path)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown keys in {path}: {', '.join(unknown)}")
        parsed: dict = {}
        for key, value in raw.items():
            if key in ("realtime", "oracle_state"):
                parsed[key] = parse_bool(value)
            elif key in ("encoder_counts_per_rev", "integrator_substeps"):
                parsed[key] = int(value)
            else:
                parsed[key] = float(value)
        return cls(**parsed)


@dataclass(frozen=True)
class ResetTarget:
    """Initial-state descriptor for a domain reset."""

    kind: str  # "down" | "upright" | "arbitrary"
    state: PendulumState | None = None

    @classmethod
    def down(cls) -> "ResetTarget":
        return cls("down")

    @classmethod
    def upright(cls) -> "ResetTarget":
        return cls("upright")

    @classmethod
    def arbitrary(cls, state: PendulumState) -> "ResetTarget":
        return cls("arbitrary", state)


def quantize_encoder(angle: float, counts_per_rev: int) -> int:
    """Encoder counts for an angle: round-toward-zero of angle/(2*pi) revs."""
    return int(angle * counts_per_rev / TWO_PI)


def decode_encoder(counts: int, counts_per_rev: int) -> float:
    """Angle represented by encoder counts (exact inverse up to one count)."""
    return counts * TWO_PI / counts_per_rev


def estimate_velocity(
    current: float,
    previous: float,
    dt: float,
    filter_state: float | None,
    cutoff_hz: float,
) -> tuple[float, float]:
    """Angle-difference velocity estimate through a single-pole low-pass.

    The raw difference takes the wrapped shortest path, so a crossing of the
    +/-pi boundary does not spike. Returns (estimate, new_filter_state);
    pass the returned state back in on the next sample. cutoff_hz <= 0
    disables filtering.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    raw = wrap_angle(current - previous) / dt
    if cutoff_hz <= 0.0:
        return raw, raw
    previous_estimate = 0.0 if filter_state is None else filter_state
    beta = 1.0 - math.exp(-TWO_PI * cutoff_hz * dt)
    estimate = previous_estimate + beta * (raw - previous_estimate)
    return estimate, estimate


class SimulatedQube:
    """Simulation backend of the device interface.

    Single-owner: exactly one caller may drive reset/step at a time.
    """

    def __init__(self, config: DomainConfig | None = None, params: PhysicalParams | None = None):
        self.config = config or DomainConfig()
        self.params = params or PhysicalParams()
        # Physical rest: pendulum hanging down, arm centered.
        self._state = PendulumState(0.0, math.pi, 0.0, 0.0)
        self._frames = 0
        self._has_reset = False
        self._indicator = IndicatorColor.RED
        self._commanded = 0.0
        self._actuated = 0.0
        self._overruns = 0
        self._prev_decoded = (0.0, 0.0)
        self._filter_theta: float | None = None
        self._filter_alpha: float | None = None
        self._velocity = (0.0, 0.0)
        self._wall_next: float | None = None

    # -- introspection ----------------------------------------------------

    @property
    def state(self) -> PendulumState:
        """Ground-truth plant state (simulation only)."""
        return self._state

    @property
    def time(self) -> float:
        """Domain clock in seconds (frames / frequency)."""
        return self._frames / self.config.frequency

    @property
    def indicator(self) -> str:
        return self._indicator

    @property
    def overruns(self) -> int:
        return self._overruns

    @property
    def commanded_voltage(self) -> float:
        return self._commanded

    @property
    def actuated_voltage(self) -> float:
        return self._actuated

    def set_indicator(self, color: str) -> None:
        if color not in (IndicatorColor.YELLOW, IndicatorColor.GREEN, IndicatorColor.RED):
            raise ValueError(f"unknown indicator color {color!r}")
        self._indicator = color

    # -- sensors -----------------------------------------------------------

    def _sensor_frame(self) -> SensorFrame:
        cpr = self.config.encoder_counts_per_rev
        return SensorFrame(
            encoder_theta=quantize_encoder(self._state.theta, cpr),
            encoder_alpha=quantize_encoder(self._state.alpha, cpr),
            timestamp=self.time,
        )

    def _decoded_angles(self) -> tuple[float, float]:
        cpr = self.config.encoder_counts_per_rev
        return (
            decode_encoder(quantize_encoder(self._state.theta, cpr), cpr),
            decode_encoder(quantize_encoder(self._state.alpha, cpr), cpr),
        )

    def _prime_sensors(self, true_velocities: bool) -> None:
        self._prev_decoded = self._decoded_angles()
        if true_velocities:
            self._filter_theta = self._state.theta_dot
            self._filter_alpha = self._state.alpha_dot
            self._velocity = (self._state.theta_dot, self._state.alpha_dot)
        else:
            self._filter_theta = None
            self._filter_alpha = None
            self._velocity = (0.0, 0.0)

    def _update_sensors(self) -> None:
        theta, alpha = self._decoded_angles()
        dt = self.config.period
        cutoff = self.config.velocity_filter_cutoff
        td, self._filter_theta = estimate_velocity(
            theta, self._prev_decoded[0], dt, self._filter_theta, cutoff
        )
        ad, self._filter_alpha = estimate_velocity(
            alpha, self._prev_decoded[1], dt, self._filter_alpha, cutoff
        )
        self._prev_decoded = (theta, alpha)
        self._velocity = (td, ad)

    def read_full_state(self) -> PendulumState:
        """Decoded angles plus estimated velocities (ground truth if oracle_state)."""
        if not self._has_reset:
            raise NotReady("domain must be reset before reading state")
        if self.config.oracle_state:
            return self._state
        theta, alpha = self._prev_decoded
        return PendulumState(theta, alpha, self._velocity[0], self._velocity[1])

    # -- actuation ---------------------------------------------------------

    def _step_raw(self, voltage: float) -> SensorFrame:
        if not math.isfinite(voltage):
            raise SafetyViolation(f"non-finite voltage command {voltage!r}")
        if abs(voltage) > self.config.safety_voltage:
            raise SafetyViolation(
                f"command {voltage!r} V exceeds safety level {self.config.safety_voltage} V"
            )
        limit = self.config.max_voltage
        actuated = min(max(voltage, -limit), limit)
        self._state = integrate_step(
            self._state,
            actuated,
            self.config.period,
            self.config.integrator_substeps,
            self.params,
        )
        self._commanded = voltage
        self._actuated = actuated
        self._frames += 1
        self._update_sensors()
        if self.config.realtime:
            self._pace()
        return self._sensor_frame()

    def _pace(self) -> None:
        period = self.config.period
        now = time.monotonic()
        if self._wall_next is None:
            self._wall_next = now + period
            return
        self._wall_next += period
        remaining = self._wall_next - now
        if remaining > 0.0:
            time.sleep(remaining)
        else:
            self._overruns += 1
            self._wall_next = now  # re-anchor instead of chasing missed deadlines

    def step(self, voltage: float) -> SensorFrame:
        """Clamp, actuate, advance one control period, return the sensor frame."""
        if not self._has_reset:
            raise NotReady("domain must be reset before stepping")
        return self._step_raw(voltage)

    def begin_controller_reset(self) -> None:
        """Make a fresh domain drivable by a reset controller.

        Reset controllers own the actuator before the first conventional
        reset completes, so they may need to unlock stepping themselves.
        No-op on a domain that has already been reset (sensors stay warm).
        """
        if not self._has_reset:
            self._has_reset = True
            self._prime_sensors(true_velocities=False)

    # -- reset -------------------------------------------------------------

    def reset(self, target: ResetTarget, on_step=None) -> SensorFrame:
        """Drive the plant to an initial state; indicator is yellow throughout.

        Arbitrary targets are set directly (simulation privilege) and prime
        the velocity estimator with the true velocities; Down/Upright run the
        corresponding reset controller on the sensor path until convergence.
        ``on_step`` (if given) is called after every internal controller step.
        """
        from . import controllers  # deferred: controllers drive this domain

        was_reset = self._has_reset
        self.set_indicator(IndicatorColor.YELLOW)
        self._wall_next = None
        try:
            if target.kind == "arbitrary":
                if target.state is None:
                    raise ValueError("arbitrary reset needs a state")
                self._state = target.state
                self._prime_sensors(true_velocities=True)
            elif target.kind == "down":
                self._has_reset = True
                self._prime_sensors(true_velocities=False)
                controllers.reset_to_down(self, self.params, on_step=on_step)
            elif target.kind == "upright":
                self._has_reset = True
                self._prime_sensors(true_velocities=False)
                controllers.reset_to_upright(self, self.params, on_step=on_step)
            else:
                raise ValueError(f"unknown reset target {target.kind!r}")
        except BaseException:
            self._has_reset = was_reset
            self.set_indicator(IndicatorColor.RED)
            raise
        self._has_reset = True
        return self._sensor_frame()

    # -- rendering ---------------------------------------------------------

    def render_line(self, reward: float) -> str:
        s = self._state
        return (
            f"t={self.time:.6f} theta={s.theta:.6f} alpha={s.alpha:.6f} "
            f"V={self._actuated:.3f} r={reward:.6f} led={self._indicator}"
        )
