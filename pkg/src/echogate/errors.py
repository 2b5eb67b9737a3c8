"""Exception types shared across the package."""


class EchoGateError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedSizeError(EchoGateError, ValueError):
    """Atom count outside the supported range 1..4."""


class PulseRangeError(EchoGateError, ValueError):
    """Time argument outside the pulse schedule."""


class IntegrationError(EchoGateError, RuntimeError):
    """Integrator failed to advance (e.g. step-size underflow).

    Attributes
    ----------
    tau : float
        Dimensionless time at which integration failed.
    """

    def __init__(self, message: str, tau: float):
        super().__init__(f"{message} (tau={tau:.6g})")
        self.tau = tau


class TrackingError(EchoGateError, RuntimeError):
    """Adiabatic branch tracking lost continuity (degenerate branches)."""

    def __init__(self, message: str, tau: float):
        super().__init__(f"{message} (tau={tau:.6g})")
        self.tau = tau


class EffectiveDimensionError(EchoGateError, ValueError):
    """Dynamics is not effectively two-level for the requested projection.

    Attributes
    ----------
    max_leakage : float
        Largest population found outside the two tracked basis vectors.
    """

    def __init__(self, message: str, max_leakage: float):
        super().__init__(f"{message} (max leakage {max_leakage:.3g})")
        self.max_leakage = max_leakage


class InfeasibleProblemError(EchoGateError, ValueError):
    """No pulse within the bounds can satisfy the physical constraints."""


class ConfigError(EchoGateError, ValueError):
    """Configuration file failed to parse or validate."""
