"""Trapezoidal-velocity point-to-point motion law for a single joint."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrapezoidalProfile:
    """Accelerate for ``ramp_time``, cruise, then decelerate symmetrically.

    A zero-duration profile (``total_time == ramp_time == 0``) is accepted as a
    stationary hold and requires equal endpoints.
    """

    theta_initial: float
    theta_final: float
    ramp_time: float
    total_time: float

    def __post_init__(self):
        if self.total_time == 0 and self.ramp_time == 0:
            if self.theta_initial != self.theta_final:
                raise ValueError("a zero-duration profile must have equal endpoints")
            return
        if not (0 < self.ramp_time <= self.total_time / 2):
            raise ValueError("ramp_time must satisfy 0 < ramp_time <= total_time / 2")

    @classmethod
    def from_degrees(cls, theta_initial, theta_final, ramp_time, total_time) -> "TrapezoidalProfile":
        return cls(math.radians(theta_initial), math.radians(theta_final), ramp_time, total_time)

    @property
    def stationary(self) -> bool:
        return self.total_time == 0

    @property
    def cruise_rate(self) -> float:
        if self.stationary:
            return 0.0
        return (self.theta_final - self.theta_initial) / (self.total_time - self.ramp_time)

    @property
    def ramp_accel(self) -> float:
        if self.stationary:
            return 0.0
        return self.cruise_rate / self.ramp_time

    @property
    def breakpoints(self) -> tuple[float, float]:
        return self.ramp_time, self.total_time - self.ramp_time

    def _check(self, t: float) -> float:
        t = float(t)
        if not (0.0 <= t <= self.total_time):
            raise ValueError(f"t={t} outside [0, {self.total_time}]")
        return t

    def position(self, t: float) -> float:
        t = self._check(t)
        if self.stationary:
            return self.theta_initial
        tau, tf = self.ramp_time, self.total_time
        if t <= tau:
            return self.theta_initial + 0.5 * t * t * self.ramp_accel
        if t <= tf - tau:
            return self.theta_initial + (t - 0.5 * tau) * self.cruise_rate
        return self.theta_final - 0.5 * (tf - t) ** 2 * self.ramp_accel

    def velocity(self, t: float) -> float:
        t = self._check(t)
        if self.stationary:
            return 0.0
        tau, tf = self.ramp_time, self.total_time
        if t <= tau:
            return t * self.ramp_accel
        if t <= tf - tau:
            return self.cruise_rate
        return (tf - t) * self.ramp_accel

    def acceleration(self, t: float) -> float:
        """Piecewise constant; interior breakpoints take the left-limit value."""
        t = self._check(t)
        if self.stationary:
            return 0.0
        tau, tf = self.ramp_time, self.total_time
        if t <= tau:
            return self.ramp_accel
        if t <= tf - tau:
            return 0.0
        return -self.ramp_accel

    def sample_times(self, dt: float) -> np.ndarray:
        """t = 0, dt, ... up to total_time; floor(total_time/dt) + 1 samples."""
        if not dt > 0:
            raise ValueError("dt must be positive")
        n = int(math.floor(self.total_time / dt + 1e-9)) + 1
        return np.minimum(np.arange(n) * dt, self.total_time)
