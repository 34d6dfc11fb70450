"""Exception types shared across the package."""

from __future__ import annotations


class DimensionError(ValueError):
    """Vector or matrix sizes do not match the chain."""


class ConfigError(ValueError):
    """Invalid or incomplete configuration."""


class RankDeficientError(ValueError):
    """Least-squares basis matrix lacks full column rank."""


class IntegrationError(RuntimeError):
    """Numerical integration produced a non-finite state."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (t={t:.6g} s)")
        self.t = t


class _TimedError(ValueError):
    def __init__(self, message: str, measure: float | None = None, t: float | None = None):
        super().__init__(message)
        self.message = message
        self.measure = measure
        self.t = t

    def at_time(self, t: float):
        """Return a copy tagged with the simulation time it occurred at."""
        return type(self)(self.message, self.measure, t)

    def __str__(self):
        s = self.message
        if self.measure is not None:
            s += f" (measure={self.measure:.3e})"
        if self.t is not None:
            s += f" at t={self.t:.6g} s"
        return s


class SingularHOBMError(_TimedError):
    """HOBM positional Jacobian is singular; radial payload motion is impossible."""


class SingularLWRError(_TimedError):
    """LWR Jacobian is singular."""


class UnreachableError(_TimedError):
    """Payload position lies outside the HOBM workspace annulus."""
