"""Recursive Newton-Euler inverse dynamics and the M, V, G decomposition.

Everything is evaluated in the world frame. The recursion runs outward over
link angular velocities/accelerations and frame-origin accelerations, then
inward accumulating the force and moment each joint transmits to its link.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from hobm_lwr.errors import DimensionError
from hobm_lwr.kinematics import JointState, KinematicChain, check_dims, frame_matrices

STANDARD_GRAVITY = np.array([0.0, 0.0, -9.81])


@dataclass(frozen=True)
class LinkInertia:
    """Mass, centre of mass and central inertia tensor, both in the link's DH frame."""

    mass: float
    com: np.ndarray = field(default_factory=lambda: np.zeros(3))
    inertia: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        object.__setattr__(self, "com", np.asarray(self.com, dtype=float).reshape(3))
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float).reshape(3, 3))
        if self.mass < 0:
            raise ValueError("link mass must be non-negative")
        if not np.allclose(self.inertia, self.inertia.T, atol=1e-12):
            raise ValueError("inertia tensor must be symmetric")
        if np.min(np.linalg.eigvalsh(self.inertia)) < -1e-12:
            raise ValueError("inertia tensor must be positive semidefinite")

    @classmethod
    def diagonal(cls, mass, com, ixx, iyy, izz) -> "LinkInertia":
        return cls(mass, com, np.diag([ixx, iyy, izz]))

    def satisfies_triangle_inequality(self) -> bool:
        p = np.linalg.eigvalsh(self.inertia)
        return bool(p[0] + p[1] >= p[2] - 1e-12)

    def plus_point_mass(self, mass: float, point) -> "LinkInertia":
        """Lump a point mass at ``point`` (link frame) into this body."""
        if mass == 0:
            return self
        point = np.asarray(point, dtype=float)
        m = self.mass + mass
        com = (self.mass * self.com + mass * point) / m

        def shifted(I, mi, r):
            return I + mi * (r @ r * np.eye(3) - np.outer(r, r))

        inertia = shifted(self.inertia, self.mass, self.com - com) + shifted(np.zeros((3, 3)), mass, point - com)
        return LinkInertia(m, com, 0.5 * (inertia + inertia.T))

    def scaled(self, factor: float) -> "LinkInertia":
        return LinkInertia(self.mass * factor, self.com, self.inertia * factor)


@dataclass(frozen=True)
class RobotModel:
    chain: KinematicChain
    links: tuple[LinkInertia, ...]
    gravity: np.ndarray = field(default_factory=lambda: STANDARD_GRAVITY.copy())

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float).reshape(3))
        if len(self.links) != self.chain.dof:
            raise DimensionError(f"{len(self.links)} links for a {self.chain.dof}-dof chain")

    @property
    def dof(self) -> int:
        return self.chain.dof

    def without_gravity(self) -> "RobotModel":
        return replace(self, gravity=np.zeros(3))

    def with_tip_mass(self, mass: float) -> "RobotModel":
        """Model with a point mass attached at the last frame origin."""
        links = list(self.links)
        links[-1] = links[-1].plus_point_mass(mass, np.zeros(3))
        return replace(self, links=tuple(links))

    def with_mass_scale(self, factor: float) -> "RobotModel":
        return replace(self, links=tuple(l.scaled(factor) for l in self.links))

    def with_base(self, base_pose) -> "RobotModel":
        return replace(self, chain=self.chain.with_base(base_pose))


@dataclass(frozen=True)
class Wrench:
    """Force and moment in world axes; the moment is taken about ``point``."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    moment: np.ndarray = field(default_factory=lambda: np.zeros(3))
    point: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("force", "moment", "point"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            object.__setattr__(self, name, v)
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.moment))):
            raise ValueError("wrench components must be finite")

    @classmethod
    def zero(cls) -> "Wrench":
        return cls()

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.moment])

    def __add__(self, other: "Wrench") -> "Wrench":
        # moments are re-referenced to self.point
        moment = other.moment + np.cross(other.point - self.point, other.force)
        return Wrench(self.force + other.force, self.moment + moment, self.point)


def _rne(model: RobotModel, q, qd, qdd, gravity, ee_wrench: Wrench | None) -> np.ndarray:
    chain = model.chain
    n = chain.dof
    frames = frame_matrices(chain, q)
    origins = [T[:3, 3] for T in frames]
    axes = [T[:3, 2] for T in frames]

    w = np.zeros(3)
    dw = np.zeros(3)
    acc = -np.asarray(gravity, dtype=float)  # gravity as a base acceleration
    com_acc = []
    com_pos = []
    omegas = []
    alphas = []
    inertias = []
    for i, row in enumerate(chain.rows):
        z = axes[i]
        r = origins[i + 1] - origins[i]
        if row.revolute:
            w_new = w + z * qd[i]
            dw = dw + z * qdd[i] + np.cross(w, z * qd[i])
            w = w_new
            acc = acc + np.cross(dw, r) + np.cross(w, np.cross(w, r))
        else:
            acc = acc + np.cross(dw, r) + np.cross(w, np.cross(w, r)) + 2.0 * np.cross(w, z * qd[i]) + z * qdd[i]
        R = frames[i + 1][:3, :3]
        link = model.links[i]
        rc = R @ link.com
        com_pos.append(origins[i + 1] + rc)
        com_acc.append(acc + np.cross(dw, rc) + np.cross(w, np.cross(w, rc)))
        omegas.append(w)
        alphas.append(dw)
        inertias.append(R @ link.inertia @ R.T)

    tau = np.zeros(n)
    if ee_wrench is None:
        f = np.zeros(3)
        moment = np.zeros(3)  # about the frame-n origin
    else:
        f = ee_wrench.force.copy()
        moment = ee_wrench.moment + np.cross(ee_wrench.point - origins[n], ee_wrench.force)
    for i in range(n - 1, -1, -1):
        link = model.links[i]
        o = origins[i]
        F = link.mass * com_acc[i]
        I = inertias[i]
        N = I @ alphas[i] + np.cross(omegas[i], I @ omegas[i])
        # moment about origin i-1 (on the joint axis)
        moment = moment + np.cross(origins[i + 1] - o, f) + np.cross(com_pos[i] - o, F) + N
        f = f + F
        tau[i] = axes[i] @ (moment if chain.rows[i].revolute else f)
    return tau


def _validated(model: RobotModel, *vectors):
    vs = check_dims(model.chain, *vectors)
    for v in vs:
        if not np.all(np.isfinite(v)):
            raise ValueError("joint state must be finite")
    return vs


def inverse_dynamics(model: RobotModel, state: JointState, ee_wrench: Wrench | None = None) -> np.ndarray:
    """Joint torques (forces for prismatic joints) realising ``state``.

    ``ee_wrench`` is the wrench the end effector exerts on its environment;
    its contribution to the torques is ``J^T w``.
    """
    q, qd, qdd = _validated(model, state.q, state.qd, state.qdd)
    return _rne(model, q, qd, qdd, model.gravity, ee_wrench)


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    (q,) = _validated(model, q)
    n = model.dof
    zero = np.zeros(n)
    M = np.empty((n, n))
    for i in range(n):
        M[:, i] = _rne(model, q, zero, np.eye(n)[i], np.zeros(3), None)
    return M


def bias_forces(model: RobotModel, q, qd) -> np.ndarray:
    """Coriolis/centrifugal plus gravity torques, V(q, qd) qd + G(q)."""
    q, qd = _validated(model, q, qd)
    return _rne(model, q, qd, np.zeros(model.dof), model.gravity, None)


def gravity_vector(model: RobotModel, q) -> np.ndarray:
    (q,) = _validated(model, q)
    zero = np.zeros(model.dof)
    return _rne(model, q, zero, zero, model.gravity, None)


def coriolis_vector(model: RobotModel, q, qd) -> np.ndarray:
    """V(q, qd) qd alone."""
    q, qd = _validated(model, q, qd)
    return _rne(model, q, qd, np.zeros(model.dof), np.zeros(3), None)


def kinetic_energy(model: RobotModel, q, qd) -> float:
    qd = np.asarray(qd, dtype=float)
    return 0.5 * float(qd @ mass_matrix(model, q) @ qd)
