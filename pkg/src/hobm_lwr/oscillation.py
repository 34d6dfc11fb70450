"""Ringdown of a cable-lift HOBM arm after the LWR stops.

Once the LWR halts, it holds the payload rigidly at an anchor point. The two
rotating HOBM links keep moving and are pulled back by the cable. The cable is
modelled as a small-angle pendulum, i.e. a horizontal spring of stiffness
``m_p g / L`` between the arm tip and the anchor. Joint friction has a viscous
part and a Coulomb part; the Coulomb part is smoothed with ``tanh(qd / eps)``.
The equations are integrated with fixed-step classical RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from hobm_lwr.coupling import hobm_follow, path_states
from hobm_lwr.dynamics import RobotModel, Wrench, mass_matrix
from hobm_lwr.errors import DimensionError, IntegrationError, SingularHOBMError
from hobm_lwr.kinematics import (
    SINGULARITY_TOLERANCE,
    JointType,
    KinematicChain,
    end_effector,
    geometric_jacobian,
    singularity_measure,
    task_block,
)

DEFAULT_SMOOTHING = 1e-3  # rad/s


@dataclass(frozen=True)
class RingdownConfig:
    arm: RobotModel
    cable_length: float
    payload_mass: float
    viscous_friction: Sequence[float] = (0.0, 0.0)
    coulomb_friction: Sequence[float] = (0.0, 0.0)
    initial_phi: Sequence[float] = (0.0, math.pi / 2)
    initial_phid: Sequence[float] = (0.0, 0.0)
    dt: float = 1e-3
    duration: float = 10.0
    anchor: Sequence[float] | None = None  # world point; defaults to the initial tip
    smoothing: float = DEFAULT_SMOOTHING

    def __post_init__(self):
        for name in ("viscous_friction", "coulomb_friction", "initial_phi", "initial_phid"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (2,):
                raise DimensionError(f"{name} must have 2 entries")
            object.__setattr__(self, name, v)
        if self.anchor is not None:
            object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float).reshape(3))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration >= self.dt:
            raise ValueError("duration must be at least dt")
        if not self.cable_length > 0:
            raise ValueError("cable_length must be positive")
        if self.payload_mass < 0:
            raise ValueError("payload_mass must be non-negative")
        if np.any(self.viscous_friction < 0) or np.any(self.coulomb_friction < 0):
            raise ValueError("friction coefficients must be non-negative")
        if not self.smoothing > 0:
            raise ValueError("smoothing must be positive")

    @property
    def stiffness(self) -> float:
        return self.payload_mass * float(np.linalg.norm(self.arm.gravity)) / self.cable_length


@dataclass(frozen=True)
class RingdownSample:
    t: float
    phi: np.ndarray
    phid: np.ndarray
    tip_force: Wrench
    mech_energy: float


@dataclass
class RingdownSeries:
    """Time series stored column-wise; indexing yields :class:`RingdownSample`."""

    t: np.ndarray
    phi: np.ndarray  # (n, 2)
    phid: np.ndarray  # (n, 2)
    force: np.ndarray  # (n, 3) cable pull on the payload, world axes
    energy: np.ndarray
    anchor: np.ndarray
    equilibrium: np.ndarray | None = None

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i) -> RingdownSample:
        return RingdownSample(
            float(self.t[i]),
            self.phi[i].copy(),
            self.phid[i].copy(),
            Wrench(self.force[i], np.zeros(3), self.anchor),
            float(self.energy[i]),
        )

    def __iter__(self) -> Iterator[RingdownSample]:
        return (self[i] for i in range(len(self)))

    @property
    def duration(self) -> float:
        return float(self.t[-1])


@dataclass(frozen=True)
class PlanarArm:
    """Exact closed form of a 2R arm with parallel vertical axes.

    The mass matrix of such an arm is ``A + B cos(q2) + D sin(q2)``. The three
    constant matrices are identified once from the general recursion.
    """

    l1: float
    l2: float
    off1: float
    off2: float
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    height: float = 0.0  # tip z in the base frame

    @classmethod
    def from_model(cls, arm: RobotModel) -> "PlanarArm":
        rows = arm.chain.rows
        if len(rows) != 2 or any(r.joint_type != JointType.REVOLUTE for r in rows) or rows[0].alpha != 0.0:
            raise ValueError("ringdown arm must be two revolute links with parallel axes")
        base = arm.chain.base_pose
        g = arm.gravity
        if np.linalg.norm(np.cross(g, base.rotation[:, 2])) > 1e-9 * max(1.0, np.linalg.norm(g)):
            raise ValueError("ringdown arm axes must be parallel to gravity")
        M0 = mass_matrix(arm, [0.0, 0.0])
        Mpi = mass_matrix(arm, [0.0, math.pi])
        Mh = mass_matrix(arm, [0.0, math.pi / 2])
        A = 0.5 * (M0 + Mpi)
        B = 0.5 * (M0 - Mpi)
        D = Mh - A
        return cls(
            rows[0].a, rows[1].a, rows[0].theta_offset, rows[1].theta_offset,
            A, B, D, base.rotation.copy(), base.translation.copy(),
            rows[0].d + rows[1].d,
        )

    def mass(self, q2: float) -> np.ndarray:
        return self.A + self.B * math.cos(q2) + self.D * math.sin(q2)

    def mass_derivative(self, q2: float) -> np.ndarray:
        return -self.B * math.sin(q2) + self.D * math.cos(q2)

    def coriolis(self, q2: float, qd: np.ndarray) -> np.ndarray:
        dM = self.mass_derivative(q2)
        c = dM @ qd * qd[1]
        c[1] -= 0.5 * qd @ dM @ qd
        return c

    def tip_local(self, q) -> np.ndarray:
        a1 = q[0] + self.off1
        a12 = a1 + q[1] + self.off2
        return np.array([
            self.l1 * math.cos(a1) + self.l2 * math.cos(a12),
            self.l1 * math.sin(a1) + self.l2 * math.sin(a12),
        ])

    def jacobian_local(self, q) -> np.ndarray:
        a1 = q[0] + self.off1
        a12 = a1 + q[1] + self.off2
        s1, c1, s12, c12 = math.sin(a1), math.cos(a1), math.sin(a12), math.cos(a12)
        return np.array([
            [-self.l1 * s1 - self.l2 * s12, -self.l2 * s12],
            [self.l1 * c1 + self.l2 * c12, self.l2 * c12],
        ])

    def to_world(self, xy) -> np.ndarray:
        return self.rotation @ np.array([xy[0], xy[1], self.height]) + self.translation

    def to_local(self, point) -> np.ndarray:
        return (self.rotation.T @ (np.asarray(point, dtype=float) - self.translation))[:2]

    def force_to_world(self, fxy) -> np.ndarray:
        return self.rotation @ np.array([fxy[0], fxy[1], 0.0])


def smooth_sign(v, eps: float):
    return np.tanh(np.asarray(v) / eps)


def _integrate(cfg: RingdownConfig) -> RingdownSeries:
    arm = PlanarArm.from_model(cfg.arm)
    k = cfg.stiffness
    b = cfg.viscous_friction
    tc = cfg.coulomb_friction
    eps = cfg.smoothing
    phi0 = cfg.initial_phi
    if cfg.anchor is None:
        # stay in the arm frame so a start at rest is exactly force free
        anchor = arm.tip_local(phi0)
        anchor_world = arm.to_world(anchor)
    else:
        anchor_world = cfg.anchor
        anchor = arm.to_local(anchor_world)

    # scalar closed form; this loop dominates DOE runtime
    l1, l2, o1, o2 = arm.l1, arm.l2, arm.off1, arm.off2
    (a11, a12), (_, a22) = arm.A
    (b11, b12), (_, b22) = arm.B
    (d11, d12), (_, d22) = arm.D
    ax, ay = float(anchor[0]), float(anchor[1])
    b1, b2 = float(b[0]), float(b[1])
    c1_, c2_ = float(tc[0]), float(tc[1])
    tanh, sin, cos = math.tanh, math.sin, math.cos

    def rhs(q1, q2, w1, w2):
        s1, co1 = sin(q1 + o1), cos(q1 + o1)
        s12, c12 = sin(q1 + o1 + q2 + o2), cos(q1 + o1 + q2 + o2)
        fx = k * (l1 * co1 + l2 * c12 - ax)
        fy = k * (l1 * s1 + l2 * s12 - ay)
        sq, cq = sin(q2), cos(q2)
        m11 = a11 + b11 * cq + d11 * sq
        m12 = a12 + b12 * cq + d12 * sq
        m22 = a22 + b22 * cq + d22 * sq
        g11 = -b11 * sq + d11 * cq
        g12 = -b12 * sq + d12 * cq
        g22 = -b22 * sq + d22 * cq
        # Coriolis: dM qd * qd2 - 0.5 [0, qd^T dM qd]
        v1 = (g11 * w1 + g12 * w2) * w2
        v2 = (g12 * w1 + g22 * w2) * w2 - 0.5 * (g11 * w1 * w1 + 2.0 * g12 * w1 * w2 + g22 * w2 * w2)
        t1 = -((-l1 * s1 - l2 * s12) * fx + (l1 * co1 + l2 * c12) * fy) - b1 * w1 - c1_ * tanh(w1 / eps) - v1
        t2 = -((-l2 * s12) * fx + (l2 * c12) * fy) - b2 * w2 - c2_ * tanh(w2 / eps) - v2
        det = m11 * m22 - m12 * m12
        return w1, w2, (m22 * t1 - m12 * t2) / det, (m11 * t2 - m12 * t1) / det

    def energy(y):
        d = arm.tip_local(y[:2]) - anchor
        return 0.5 * float(y[2:] @ arm.mass(y[1]) @ y[2:]) + 0.5 * k * float(d @ d)

    n = int(math.floor(cfg.duration / cfg.dt + 1e-9)) + 1
    h = cfg.dt
    Y = np.empty((n, 4))
    y = [float(phi0[0]), float(phi0[1]), float(cfg.initial_phid[0]), float(cfg.initial_phid[1])]
    Y[0] = y
    hh = 0.5 * h
    h6 = h / 6.0
    isfinite = math.isfinite
    for i in range(1, n):
        y0, y1, y2, y3 = y
        k1 = rhs(y0, y1, y2, y3)
        k2 = rhs(y0 + hh * k1[0], y1 + hh * k1[1], y2 + hh * k1[2], y3 + hh * k1[3])
        k3 = rhs(y0 + hh * k2[0], y1 + hh * k2[1], y2 + hh * k2[2], y3 + hh * k2[3])
        k4 = rhs(y0 + h * k3[0], y1 + h * k3[1], y2 + h * k3[2], y3 + h * k3[3])
        y = [yj + h6 * (a + 2.0 * b_ + 2.0 * c + d) for yj, a, b_, c, d in zip(y, k1, k2, k3, k4)]
        if not all(isfinite(v) for v in y):
            raise IntegrationError("ringdown integration produced a non-finite state", i * h)
        Y[i] = y

    t = np.arange(n) * h
    force = np.empty((n, 3))
    E = np.empty(n)
    for i in range(n):
        d = arm.tip_local(Y[i, :2]) - anchor
        force[i] = arm.force_to_world(k * d)
        E[i] = energy(Y[i])
    return RingdownSeries(t, Y[:, :2].copy(), Y[:, 2:].copy(), force, E, np.asarray(anchor_world, dtype=float))


def simulate_ringdown(cfg: RingdownConfig) -> RingdownSeries:
    """Integrate the arm from its initial state with the payload held at the anchor."""
    return _integrate(cfg)


def settling_time(samples, band: float, reference=None) -> float:
    """First time after which every joint stays within ``band`` of ``reference``.

    ``reference`` defaults to the final sample. Returns the series duration if
    the final sample itself lies outside the band.
    """
    if not band > 0:
        raise ValueError("band must be positive")
    if isinstance(samples, RingdownSeries):
        t, phi = samples.t, samples.phi
    else:
        samples = list(samples)
        if not samples:
            raise ValueError("empty series")
        t = np.array([s.t for s in samples])
        phi = np.array([np.atleast_1d(s.phi) for s in samples])
    if t.size == 0:
        raise ValueError("empty series")
    ref = phi[-1] if reference is None else np.asarray(reference, dtype=float)
    inside = np.all(np.abs(phi - ref) <= band, axis=1)
    if not inside[-1]:
        return float(t[-1])
    outside = np.flatnonzero(~inside)
    return float(t[0]) if outside.size == 0 else float(t[outside[-1] + 1])


def peak_force(samples) -> float:
    """Largest cable force magnitude on the held payload over the series."""
    if isinstance(samples, RingdownSeries):
        if len(samples) == 0:
            raise ValueError("empty series")
        return float(np.max(np.linalg.norm(samples.force, axis=1)))
    forces = [np.linalg.norm(s.tip_force.force) for s in samples]
    if not forces:
        raise ValueError("empty series")
    return float(max(forces))


def oscillation_peaks(signal: np.ndarray) -> np.ndarray:
    """Indices of strict local maxima of ``|signal|`` (half-cycle peaks)."""
    a = np.abs(np.asarray(signal, dtype=float))
    idx = np.flatnonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:])) + 1
    return idx


def half_cycle_amplitudes(signal: np.ndarray) -> np.ndarray:
    """Largest ``|signal|`` over each complete half cycle between sign changes."""
    x = np.asarray(signal, dtype=float)
    sign = np.where(x >= 0, 1, -1)
    cuts = np.flatnonzero(sign[1:] != sign[:-1]) + 1
    segments = np.split(np.abs(x), cuts)[1:-1]
    return np.array([seg.max() for seg in segments])


def drag_wrench(
    hobm: RobotModel,
    phi,
    phid_direction,
    coulomb_friction,
    tolerance: float = SINGULARITY_TOLERANCE,
) -> Wrench:
    """Cartesian force the LWR needs to overcome Coulomb joint friction in steady motion."""
    phi = np.asarray(phi, dtype=float)
    direction = np.asarray(phid_direction, dtype=float)
    tc = np.asarray(coulomb_friction, dtype=float)
    if not np.any(direction):
        raise ValueError("phid_direction must be nonzero")
    J = geometric_jacobian(hobm.chain, phi)
    Jt = task_block(J)
    measure = singularity_measure(Jt)
    if measure < tolerance:
        raise SingularHOBMError("HOBM Jacobian is singular", measure)
    return drag_from_jacobian(Jt, direction, tc)


def drag_from_jacobian(J_task: np.ndarray, phid_direction, coulomb_friction) -> Wrench:
    """``J^-T (tau_c * sign(phid))`` padded to a 3-vector force."""
    tau = np.asarray(coulomb_friction, dtype=float) * np.sign(phid_direction)
    f = np.linalg.solve(np.asarray(J_task, dtype=float).T, tau)
    force = np.zeros(3)
    force[: f.size] = f
    return Wrench(force)


def drag_along_motion(J_task: np.ndarray, phid_direction, coulomb_friction) -> float:
    """Drag component opposing the tip motion: dissipated power over tip speed."""
    qd = np.asarray(phid_direction, dtype=float)
    speed = float(np.linalg.norm(np.asarray(J_task) @ qd))
    return float(np.asarray(coulomb_friction, dtype=float) @ np.abs(qd)) / speed


def arm_of(hobm: RobotModel) -> RobotModel:
    """The two rotating links of a (placed) HOBM, without the telescopic axis."""
    return RobotModel(KinematicChain(hobm.chain.rows[:2], hobm.chain.base_pose), hobm.links[:2], hobm.gravity)


def ringdown_after_stop(
    sys,
    theta_stop,
    stop_velocity,
    cable_length: float = 1.0,
    viscous_friction=(0.0, 0.0),
    coulomb_friction=(0.0, 0.0),
    payload_mass: float | None = None,
    dt: float = 1e-3,
    duration: float = 10.0,
) -> RingdownConfig:
    """Ringdown set up from the LWR pose at its stop.

    The arm starts at the configuration holding the payload over the stop
    point, moving with the horizontal part of ``stop_velocity`` (the payload
    velocity just before the abrupt stop).
    """
    hobm = sys.placed_hobm
    x = end_effector(sys.lwr.chain, theta_stop).translation
    phi = hobm_follow(hobm, x, sys.elbow, sys.singularity_tolerance)[:2]
    arm = arm_of(hobm)
    J = geometric_jacobian(arm.chain, phi)[:2]
    v = np.asarray(stop_velocity, dtype=float)[:2]
    phid = np.linalg.solve(J, v)
    return RingdownConfig(
        arm=arm,
        cable_length=cable_length,
        payload_mass=sys.payload_mass if payload_mass is None else payload_mass,
        viscous_friction=viscous_friction,
        coulomb_friction=coulomb_friction,
        initial_phi=phi,
        initial_phid=phid,
        dt=dt,
        duration=duration,
        anchor=None,  # the HOBM tip, equal to x up to IK round-off
    )


@dataclass(frozen=True)
class RingdownScenario:
    """Ringdown after the LWR stops at ``theta_stop``.

    A deceleration ``a`` maps to a stop speed ``a * ramp_time``: the payload
    speed a ramp of that rate reaches over the motion law's ramp time. The arm
    keeps that speed, along ``stop_direction``, when the payload is halted.
    """

    system: object  # CoupledSystem
    theta_stop: np.ndarray
    stop_direction: np.ndarray
    ramp_time: float = 0.2
    cable_length: float = 1.0
    viscous_friction: float = 0.0
    coulomb_friction: float = 0.0
    deceleration: float = 2.5
    dt: float = 1e-3
    duration: float = 10.0

    @classmethod
    def reference(cls, system, profile, fixed_joints, joint: int = 0, **kwargs) -> "RingdownScenario":
        """Stop at the end of ``profile``; direction is the cruise payload velocity there."""
        theta, _, _ = path_states(profile, fixed_joints, profile.total_time, joint)
        J = geometric_jacobian(system.lwr.chain, theta)
        v = J[:3, joint] * np.sign(profile.cruise_rate or 1.0)
        v[2] = 0.0
        return cls(system, theta, v / np.linalg.norm(v), ramp_time=profile.ramp_time, **kwargs)

    def config(self, coulomb_friction=None, payload_mass=None, deceleration=None, viscous_friction=None) -> RingdownConfig:
        tc = self.coulomb_friction if coulomb_friction is None else coulomb_friction
        b = self.viscous_friction if viscous_friction is None else viscous_friction
        a = self.deceleration if deceleration is None else deceleration
        return ringdown_after_stop(
            self.system,
            self.theta_stop,
            np.asarray(self.stop_direction) * a * self.ramp_time,
            cable_length=self.cable_length,
            viscous_friction=np.broadcast_to(np.asarray(b, dtype=float), (2,)),
            coulomb_friction=np.broadcast_to(np.asarray(tc, dtype=float), (2,)),
            payload_mass=payload_mass,
            dt=self.dt,
            duration=self.duration,
        )

    def peak_force(self, coulomb_friction, payload_mass, deceleration) -> float:
        return peak_force(simulate_ringdown(self.config(coulomb_friction, payload_mass, deceleration)))
