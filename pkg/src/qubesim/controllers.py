"""Classical control baselines and reset controllers.

All controllers map a plant state to a motor voltage, clamp their own
output, and expose a ``converged`` predicate plus a timeout so they can
double as reset controllers. Gains below were tuned against the linearized
default plant (poles of the balance loop pushed left of -4; energy gain
sized so the swing-up finishes in a few seconds); every one of them is a
constructor argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PendulumState, PhysicalParams, angle_from_down
from .dynamics import linearize_upright, total_energy
from .errors import ResetFailed, SolverFailed, UsageError

DEG = math.pi / 180.0


class Controller:
    """Stateful policy: PendulumState -> voltage. Subclasses override __call__."""

    #: simulated seconds before a reset driven by this controller gives up
    timeout: float = 15.0

    def __init__(self, max_voltage: float = 3.0):
        self.max_voltage = float(max_voltage)

    def _clamp(self, voltage: float) -> float:
        if not math.isfinite(voltage):
            raise ValueError(f"controller produced non-finite voltage {voltage!r}")
        return min(max(voltage, -self.max_voltage), self.max_voltage)

    def __call__(self, state: PendulumState) -> float:
        raise NotImplementedError

    def converged(self, state: PendulumState) -> bool:
        return False

    def reset(self) -> None:
        """Clear internal state (hysteresis, progress) between episodes."""


class ZeroController(Controller):
    """Always outputs 0 V; the do-nothing baseline."""

    def __call__(self, state: PendulumState) -> float:
        return 0.0


class RandomController(Controller):
    """Uniform random voltage in the clamp range."""

    def __init__(self, seed: int = 0, max_voltage: float = 3.0):
        super().__init__(max_voltage)
        self._rng = np.random.default_rng(seed)

    def __call__(self, state: PendulumState) -> float:
        return float(self._rng.uniform(-self.max_voltage, self.max_voltage))


# Full-state feedback V = g . [theta, alpha, theta_dot, alpha_dot], placed on
# the linearized default plant; closed-loop poles ~[-34.8, -11.3, -5.2, -5.2].
PD_GAINS = (2.0, -26.0, 1.1, -2.1)


class PDBalance(Controller):
    """Linear state feedback holding the pendulum upright."""

    def __init__(self, gains=PD_GAINS, max_voltage: float = 3.0):
        super().__init__(max_voltage)
        self.gains = tuple(float(g) for g in gains)

    def __call__(self, state: PendulumState) -> float:
        kt, ka, ktd, kad = self.gains
        v = (
            kt * state.theta
            + ka * state.alpha
            + ktd * state.theta_dot
            + kad * state.alpha_dot
        )
        return self._clamp(v)

    def converged(self, state: PendulumState) -> bool:
        return abs(state.alpha) < 0.2 and abs(state.alpha_dot) < 2.0


@dataclass(frozen=True)
class LqrGain:
    """State-feedback gain and the Riccati solution it came from."""

    k: np.ndarray  # m x n
    p: np.ndarray  # n x n, symmetric positive semidefinite

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.k, dtype=float))
        p = np.asarray(self.p, dtype=float)
        if not np.all(np.isfinite(k)) or not np.all(np.isfinite(p)):
            raise ValueError("gain matrices must be finite")
        if np.max(np.abs(p - p.T)) > 1e-9:
            raise ValueError("Riccati solution is not symmetric")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "p", 0.5 * (p + p.T))


def _solve_lyapunov(acl: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve acl^T P + P acl = rhs via the Kronecker linear system."""
    n = acl.shape[0]
    eye = np.eye(n)
    coeff = np.kron(acl.T, eye) + np.kron(eye, acl.T)
    return np.linalg.solve(coeff, rhs.reshape(-1)).reshape(n, n)


def _stabilizing_gain(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Initial gain with A - B K stable, by shifted-Lyapunov pole damping."""
    n, m = b.shape
    if np.max(np.linalg.eigvals(a).real) < 0.0:
        return np.zeros((m, n))
    beta = max(1.0, float(np.linalg.norm(a, "fro")))
    for _ in range(40):
        shifted = a + beta * np.eye(n)
        try:
            # shifted Z + Z shifted^T = 2 B B^T  (solve in transposed form)
            z = _solve_lyapunov(shifted.T, 2.0 * b @ b.T)
            k = np.linalg.solve(z.T, b).T  # K = B^T Z^{-1}
        except np.linalg.LinAlgError:
            beta *= 2.0
            continue
        if np.max(np.linalg.eigvals(a - b @ k).real) < 0.0:
            return k
        beta *= 2.0
    raise SolverFailed("could not find a stabilizing initial gain; is (A, B) stabilizable?")


def solve_care(a, b, q, r, tol: float = 1e-10, max_iter: int = 60) -> LqrGain:
    """Solve A^T P + P A - P B R^-1 B^T P + Q = 0 by Newton-Kleinman iteration.

    Starts from a stabilizing gain (found by pole shifting when A itself is
    unstable); each iteration is one Lyapunov solve, so convergence is
    quadratic and monotone. Returns the gain K = R^-1 B^T P.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[0]
    b = np.asarray(b, dtype=float).reshape(n, -1)
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.atleast_2d(np.asarray(r, dtype=float))
    if np.max(np.abs(q - q.T)) > 1e-12 or np.min(np.linalg.eigvalsh(q)) < -1e-12:
        raise ValueError("Q must be symmetric positive semidefinite")
    if np.max(np.abs(r - r.T)) > 1e-12 or np.min(np.linalg.eigvalsh(r)) <= 0.0:
        raise ValueError("R must be symmetric positive definite")

    def residual_norm(p: np.ndarray) -> float:
        res = a.T @ p + p @ a - p @ b @ np.linalg.solve(r, b.T @ p) + q
        return float(np.max(np.abs(res)))

    k = _stabilizing_gain(a, b)
    residuals: list[float] = []
    p = np.zeros((n, n))
    for _ in range(max_iter):
        acl = a - b @ k
        p = _solve_lyapunov(acl, -(q + k.T @ r @ k))
        p = 0.5 * (p + p.T)
        k = np.linalg.solve(r, b.T @ p)
        residuals.append(residual_norm(p))
        if residuals[-1] < tol:
            break
    if not residuals or not residuals[-1] < 1e-8:
        raise SolverFailed(
            f"Riccati iteration did not converge (last residual {residuals[-1] if residuals else 'n/a'})",
            residual_history=residuals,
        )
    if np.max(np.linalg.eigvals(a - b @ k).real) >= 0.0:
        raise SolverFailed("converged Riccati solution is not stabilizing", residual_history=residuals)
    return LqrGain(k=k, p=p)


LQR_Q = np.diag([1.0, 1.0, 0.1, 0.1])
LQR_R = 1.0


class LQRController(Controller):
    """Balance by LQR state feedback computed from the linearized plant."""

    def __init__(self, params: PhysicalParams | None = None, q=None, r=None, max_voltage: float = 3.0):
        super().__init__(max_voltage)
        params = params or PhysicalParams()
        model = linearize_upright(params)
        gain = solve_care(model.a_matrix, model.b_matrix, LQR_Q if q is None else q, LQR_R if r is None else r)
        self.gain = gain
        self._k = gain.k[0]

    def __call__(self, state: PendulumState) -> float:
        x = (state.theta, state.alpha, state.theta_dot, state.alpha_dot)
        return self._clamp(-float(np.dot(self._k, x)))

    def converged(self, state: PendulumState) -> bool:
        return abs(state.alpha) < 0.2 and abs(state.alpha_dot) < 2.0


class EnergySwingUp(Controller):
    """Pump the pendulum toward upright by regulating its swing energy.

    V = gain * (E_target - E_pend) * sign(alpha_dot * cos alpha); the sign
    term is 0 at exact standstill, where a fixed kick voltage breaks the
    deadband. Three practical refinements over the textbook law, all needed
    for this plant to swing up inside the 3 V clamp:

    * E_pend is the pendulum-only energy; measuring total energy lets the
      arm's kinetic energy satisfy the regulator long before the pendulum
      is anywhere near the top.
    * The target carries a margin above the upright-rest level so the swing
      can coast through the near-top zone where the arm-to-pendulum
      coupling (weighted by cos alpha) has almost no authority.
    * A containment override takes over when the arm strays past
      ``arm_guard``, steering it back inside before it can hit the +/-pi/2
      arm limit that terminates episodes.
    """

    def __init__(
        self,
        params: PhysicalParams | None = None,
        gain: float = 400.0,
        kick: float = 0.5,
        energy_margin: float = 2.4,
        arm_guard: float = 1.1,
        guard_kp: float = 15.0,
        guard_kd: float = 1.5,
        max_voltage: float = 3.0,
    ):
        super().__init__(max_voltage)
        self.params = params or PhysicalParams()
        self.gain = gain
        self.kick = kick
        self.e_ref = self.params.pendulum_mass * self.params.gravity * self.params.pendulum_length
        self.energy_target = energy_margin * self.e_ref
        self.arm_guard = arm_guard
        self.guard_kp = guard_kp
        self.guard_kd = guard_kd
        self._jp_pivot = (
            self.params.pendulum_inertia_cm
            + 0.25 * self.params.pendulum_mass * self.params.pendulum_length ** 2
        )

    def pendulum_energy(self, state: PendulumState) -> float:
        """Swing energy of the pendulum link alone, zero at hanging rest."""
        potential = (
            0.5
            * self.params.pendulum_mass
            * self.params.gravity
            * self.params.pendulum_length
            * (math.cos(state.alpha) + 1.0)
        )
        return 0.5 * self._jp_pivot * state.alpha_dot ** 2 + potential

    def __call__(self, state: PendulumState) -> float:
        if abs(state.theta) > self.arm_guard:
            edge = math.copysign(self.arm_guard, state.theta)
            return self._clamp(-self.guard_kp * (state.theta - edge) - self.guard_kd * state.theta_dot)
        pump = state.alpha_dot * math.cos(state.alpha)
        if abs(pump) < 1e-12:
            return self._clamp(self.kick)
        energy_error = self.energy_target - self.pendulum_energy(state)
        return self._clamp(self.gain * energy_error * math.copysign(1.0, pump))

    def converged(self, state: PendulumState) -> bool:
        return abs(state.alpha) < 20.0 * DEG


class HybridSwingUp(Controller):
    """Energy swing-up far from upright, balance feedback near it.

    The branch switch has hysteresis (enter balance at ``switch_angle``,
    fall back only beyond ``switch_angle + hysteresis``) so the controller
    cannot chatter at the boundary.
    """

    timeout = 15.0

    def __init__(
        self,
        params: PhysicalParams | None = None,
        balance: str = "lqr",
        switch_angle: float = 20.0 * DEG,
        hysteresis: float = 5.0 * DEG,
        max_voltage: float = 3.0,
    ):
        super().__init__(max_voltage)
        params = params or PhysicalParams()
        self.switch_angle = switch_angle
        self.hysteresis = hysteresis
        self._swing = EnergySwingUp(params, max_voltage=max_voltage)
        if balance == "lqr":
            self._balance: Controller = LQRController(params, max_voltage=max_voltage)
        elif balance == "pd":
            self._balance = PDBalance(max_voltage=max_voltage)
        else:
            raise ValueError(f"unknown balance branch {balance!r} (choose 'lqr' or 'pd')")
        self._balancing = False
        self.switch_count = 0

    @property
    def active_branch(self) -> str:
        return "balance" if self._balancing else "swingup"

    def __call__(self, state: PendulumState) -> float:
        distance = abs(state.alpha)
        if self._balancing:
            if distance > self.switch_angle + self.hysteresis:
                self._balancing = False
                self.switch_count += 1
        elif distance <= self.switch_angle:
            self._balancing = True
            self.switch_count += 1
        branch = self._balance if self._balancing else self._swing
        return branch(state)

    def converged(self, state: PendulumState) -> bool:
        return abs(state.alpha) < 0.2 and abs(state.alpha_dot) < 2.0

    def reset(self) -> None:
        self._balancing = False
        self.switch_count = 0


class DampenController(Controller):
    """Bring the pendulum to hanging rest by dissipating energy.

    Arm braking -kd*theta_dot plus the reverse of the swing-up pumping term.
    The removal term only fires when it opposes the current arm motion and
    the arm is moving faster than ``arm_speed_guard``, so the motor never
    injects power (even across a zero-order-hold period) and total energy is
    non-increasing along the closed loop.
    """

    timeout = 20.0

    def __init__(
        self,
        params: PhysicalParams | None = None,
        brake_gain: float = 0.3,
        removal_gain: float = 30.0,
        arm_speed_guard: float = 0.2,
        max_voltage: float = 3.0,
    ):
        super().__init__(max_voltage)
        self.params = params or PhysicalParams()
        self.brake_gain = brake_gain
        self.removal_gain = removal_gain
        self.arm_speed_guard = arm_speed_guard

    def __call__(self, state: PendulumState) -> float:
        energy = total_energy(state, self.params)
        v = -self.brake_gain * state.theta_dot
        pump = state.alpha_dot * math.cos(state.alpha)
        if energy > 0.0 and abs(pump) >= 1e-12 and abs(state.theta_dot) >= self.arm_speed_guard:
            removal = -self.removal_gain * energy * math.copysign(1.0, pump)
            if state.theta_dot * removal <= 0.0:  # only ever extract through the motor
                v += removal
        return self._clamp(v)

    # Encoder quantization makes velocity estimates spiky near rest, so the
    # reset loop additionally requires the decoded angles to sit still for
    # this many frames before trusting the velocity thresholds below.
    settle_frames = 125
    settle_span = 0.008  # rad, ~2.5 counts on the default 2048-count encoder

    def converged(self, state: PendulumState) -> bool:
        return (
            angle_from_down(state.alpha) < 0.1
            and abs(state.theta_dot) < 0.1
            and abs(state.alpha_dot) < 0.1
        )


def _run_reset(domain, controller: Controller, label: str, on_step=None) -> PendulumState:
    """Drive the domain with a reset controller until convergence or timeout.

    Controllers with ``settle_frames > 0`` must also hold their decoded
    angles within ``settle_span`` over that many frames, which certifies the
    plant is genuinely at rest rather than the velocity estimate dipping.
    """
    from collections import deque

    settle_frames = getattr(controller, "settle_frames", 0)
    settle_span = getattr(controller, "settle_span", 0.0)
    window: deque = deque(maxlen=max(settle_frames, 1))
    domain.begin_controller_reset()
    start = domain.time
    domain.step(0.0)  # prime the velocity estimator with a passive frame
    if on_step is not None:
        on_step()

    def _span(values) -> float:
        # circular span: spread of wrapped offsets from the first sample,
        # so an oscillation straddling the +/-pi seam is measured correctly
        from .core import wrap_angle

        ref = values[0]
        offsets = [wrap_angle(v - ref) for v in values]
        return max(offsets) - min(offsets)

    while True:
        state = domain.read_full_state()
        window.append((state.theta, state.alpha))
        settled = True
        if settle_frames > 0:
            settled = len(window) == settle_frames and (
                _span([t for t, _ in window]) <= settle_span
                and _span([a for _, a in window]) <= settle_span
            )
        if settled and controller.converged(state):
            return state
        elapsed = domain.time - start
        if elapsed > controller.timeout:
            raise ResetFailed(
                f"reset to {label} did not converge within {controller.timeout} s",
                elapsed=elapsed,
                final_state=state,
            )
        domain.step(controller(state))
        if on_step is not None:
            on_step()


def reset_to_down(domain, params: PhysicalParams, timeout: float | None = None, on_step=None) -> PendulumState:
    """Dampen the pendulum to hanging rest (the Swing-Up/Rotor initial state)."""
    controller = DampenController(params, max_voltage=domain.config.max_voltage)
    if timeout is not None:
        controller.timeout = timeout
    return _run_reset(domain, controller, "down", on_step=on_step)


def reset_to_upright(domain, params: PhysicalParams, timeout: float | None = None, on_step=None) -> PendulumState:
    """Swing up and catch the pendulum (the Balance initial state)."""
    controller = HybridSwingUp(params, max_voltage=domain.config.max_voltage)
    if timeout is not None:
        controller.timeout = timeout
    return _run_reset(domain, controller, "upright", on_step=on_step)


CONTROLLER_NAMES = ("pd", "lqr", "energy", "hybrid", "dampen", "zero", "random")


def make_controller(
    name: str,
    params: PhysicalParams | None = None,
    max_voltage: float = 3.0,
    seed: int = 0,
) -> Controller:
    """Instantiate a controller by its canonical harness name."""
    if name == "pd":
        return PDBalance(max_voltage=max_voltage)
    if name == "lqr":
        return LQRController(params, max_voltage=max_voltage)
    if name == "energy":
        return EnergySwingUp(params, max_voltage=max_voltage)
    if name == "hybrid":
        return HybridSwingUp(params, max_voltage=max_voltage)
    if name == "dampen":
        return DampenController(params, max_voltage=max_voltage)
    if name == "zero":
        return ZeroController(max_voltage=max_voltage)
    if name == "random":
        return RandomController(seed=seed, max_voltage=max_voltage)
    raise UsageError(f"unknown controller {name!r}; valid controllers: {', '.join(CONTROLLER_NAMES)}")
