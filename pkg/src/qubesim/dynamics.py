"""Continuous-time rotary-pendulum dynamics and the fixed-step integrator.

The plant is the standard two-joint Furuta model: a motor-driven horizontal
arm (angle theta) carrying a free pendulum (angle alpha, measured from
upright), actuated by an ideal DC motor with back-EMF and no inductance.
The equations of motion come from the Lagrangian of the mass matrix below,
so the energy bookkeeping in :func:`total_energy` is exactly consistent
with :func:`accelerations`; tests rely on that consistency.

The hot loop lives in ``qubesim._kernels`` (compiled when available).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import PendulumState, PhysicalParams


@dataclass(frozen=True)
class Derivative:
    """Time derivative of the plant state."""

    theta_dot: float
    alpha_dot: float
    theta_ddot: float
    alpha_ddot: float


@dataclass(frozen=True)
class LinearModel:
    """Linearization x_dot = A x + B u about the upright equilibrium."""

    a_matrix: np.ndarray  # 4x4
    b_matrix: np.ndarray  # 4x1

    def __post_init__(self):
        a = np.asarray(self.a_matrix, dtype=float)
        b = np.asarray(self.b_matrix, dtype=float).reshape(4, 1)
        if a.shape != (4, 4) or not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
            raise ValueError("linear model matrices must be finite and 4x4 / 4x1")
        if not np.any(b):
            raise ValueError("input matrix is zero; the arm must be actuated")
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "b_matrix", b)


def _kernel_params(params: PhysicalParams) -> tuple:
    return (
        params.motor_resistance,
        params.torque_constant,
        params.back_emf_constant,
        params.arm_inertia,
        params.arm_length,
        params.pendulum_mass,
        params.pendulum_length,
        params.pendulum_inertia_cm,
        params.arm_damping,
        params.pendulum_damping,
        params.gravity,
    )


def motor_torque(voltage: float, theta_dot: float, params: PhysicalParams) -> float:
    """Arm torque of the ideal DC motor: kt*(V - km*theta_dot)/Rm."""
    return (
        params.torque_constant
        * (voltage - params.back_emf_constant * theta_dot)
        / params.motor_resistance
    )


def accelerations(state: PendulumState, voltage: float, params: PhysicalParams) -> Derivative:
    """Solve the 2x2 mass-matrix system for the joint accelerations."""
    tdd, add = _kernels.active.accel(
        state.alpha, state.theta_dot, state.alpha_dot, voltage, *_kernel_params(params)
    )
    return Derivative(state.theta_dot, state.alpha_dot, tdd, add)


def integrate_step(
    state: PendulumState,
    voltage: float,
    dt: float,
    substeps: int,
    params: PhysicalParams,
) -> PendulumState:
    """Advance the plant by dt (zero-order-hold voltage, classical RK4)."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps!r}")
    t, a, td, ad = _kernels.active.integrate(
        state.theta,
        state.alpha,
        state.theta_dot,
        state.alpha_dot,
        voltage,
        dt,
        int(substeps),
        *_kernel_params(params),
    )
    return PendulumState(t, a, td, ad)


def total_energy(state: PendulumState, params: PhysicalParams) -> float:
    """Kinetic plus potential energy, zero at the hanging-down rest state."""
    mp = params.pendulum_mass
    lp = params.pendulum_length
    lr = params.arm_length
    sin_a = math.sin(state.alpha)
    cos_a = math.cos(state.alpha)
    aq = 0.25 * mp * lp * lp
    m11 = params.arm_inertia + mp * lr * lr + aq * sin_a * sin_a
    m12 = -0.5 * mp * lp * lr * cos_a
    m22 = params.pendulum_inertia_cm + aq
    td = state.theta_dot
    ad = state.alpha_dot
    kinetic = 0.5 * (m11 * td * td + 2.0 * m12 * td * ad + m22 * ad * ad)
    potential = 0.5 * mp * params.gravity * lp * (cos_a + 1.0)
    return kinetic + potential


def linearize_upright(params: PhysicalParams, fd_step: float = 1e-6) -> LinearModel:
    """Jacobians of the dynamics at the upright rest state, by central differences.

    Rows 0 and 1 (d theta/dt = theta_dot, d alpha/dt = alpha_dot) are exact
    kinematic identities and are set directly.
    """
    a = np.zeros((4, 4))
    a[0, 2] = 1.0
    a[1, 3] = 1.0
    kp = _kernel_params(params)

    def accel_raw(x, v):
        return _kernels.active.accel(x[1], x[2], x[3], v, *kp)

    for j in range(4):
        plus = np.zeros(4)
        plus[j] = fd_step
        tdd_p, add_p = accel_raw(plus, 0.0)
        tdd_m, add_m = accel_raw(-plus, 0.0)
        a[2, j] = (tdd_p - tdd_m) / (2.0 * fd_step)
        a[3, j] = (add_p - add_m) / (2.0 * fd_step)

    zero = np.zeros(4)
    tdd_p, add_p = accel_raw(zero, fd_step)
    tdd_m, add_m = accel_raw(zero, -fd_step)
    b = np.array([[0.0], [0.0], [(tdd_p - tdd_m) / (2.0 * fd_step)], [(add_p - add_m) / (2.0 * fd_step)]])
    return LinearModel(a, b)
