"""Dynamics toolkit for a balanced manipulator (HOBM) coupled to a lightweight robot (LWR)."""

from hobm_lwr.errors import (
    ConfigError,
    DimensionError,
    IntegrationError,
    RankDeficientError,
    SingularHOBMError,
    SingularLWRError,
    UnreachableError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "IntegrationError",
    "RankDeficientError",
    "SingularHOBMError",
    "SingularLWRError",
    "UnreachableError",
]
