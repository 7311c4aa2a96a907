"""Exception hierarchy shared across the package."""


class QubeSimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QubeSimError):
    """Invalid configuration value or malformed config file."""


class IntegrationError(QubeSimError):
    """The integrator produced a non-finite state."""

    def __init__(self, message: str, substep: int | None = None):
        super().__init__(message)
        self.substep = substep


class SafetyViolation(QubeSimError):
    """A commanded voltage failed the safety checks and was not actuated."""


class NotReady(QubeSimError):
    """The domain cannot serve full state yet (no reset performed)."""


class ResetFailed(QubeSimError):
    """A reset controller did not converge within its timeout."""

    def __init__(self, message: str, elapsed: float, final_state=None):
        super().__init__(message)
        self.elapsed = elapsed
        self.final_state = final_state


class ProtocolError(QubeSimError):
    """Environment API misuse: step after done, step before reset, use after close."""


class SolverFailed(QubeSimError):
    """Riccati iteration diverged or the system is not stabilizable."""

    def __init__(self, message: str, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class UsageError(QubeSimError):
    """Invalid harness/CLI arguments (unknown names, empty inputs)."""
