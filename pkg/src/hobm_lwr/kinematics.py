"""Serial-chain geometry: DH transforms, forward kinematics, Jacobians.

DH convention is the classic (proximal) one::

    T_i = Rot_z(theta_i) * Trans_z(d_i) * Trans_x(a_i) * Rot_x(alpha_i)

with the joint variable replacing ``theta`` for revolute joints and ``d`` for
prismatic joints. Frame ``i`` is attached to the distal end of link ``i``, so
the axis of joint ``i`` is ``z_{i-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from hobm_lwr.errors import DimensionError

#: Configurations with ``singularity_measure`` below this are flagged singular.
SINGULARITY_TOLERANCE = 1e-6


class JointType(str, Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"


@dataclass(frozen=True)
class DHRow:
    theta_offset: float = 0.0
    a: float = 0.0
    d: float = 0.0
    alpha: float = 0.0
    joint_type: JointType = JointType.REVOLUTE

    @property
    def revolute(self) -> bool:
        return self.joint_type == JointType.REVOLUTE


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T: np.ndarray) -> "RigidTransform":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3].copy(), T[:3, 3].copy())

    @classmethod
    def from_translation(cls, xyz: Sequence[float], yaw: float = 0.0) -> "RigidTransform":
        """Translation plus an optional rotation about world z."""
        c, s = np.cos(yaw), np.sin(yaw)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return cls(R, np.asarray(xyz, dtype=float).copy())

    @property
    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)

    def apply(self, point: Sequence[float]) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def orthonormality_error(self) -> float:
        """Max deviation of R^T R from identity, and of det(R) from 1."""
        R = self.rotation
        return max(
            float(np.max(np.abs(R.T @ R - np.eye(3)))),
            abs(float(np.linalg.det(R)) - 1.0),
        )


@dataclass(frozen=True)
class KinematicChain:
    rows: tuple[DHRow, ...]
    base_pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if len(self.rows) < 1:
            raise ValueError("a kinematic chain needs at least one DH row")

    @property
    def dof(self) -> int:
        return len(self.rows)

    def with_base(self, base_pose: RigidTransform) -> "KinematicChain":
        return KinematicChain(self.rows, base_pose)

    def __add__(self, other: "KinematicChain") -> "KinematicChain":
        # other's base pose is discarded; it is mounted on this chain's tip
        return KinematicChain(self.rows + other.rows, self.base_pose)


@dataclass(frozen=True)
class JointState:
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray

    def __post_init__(self):
        for name in ("q", "qd", "qdd"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if not (self.q.shape == self.qd.shape == self.qdd.shape) or self.q.ndim != 1:
            raise DimensionError("q, qd and qdd must be vectors of equal length")

    @classmethod
    def at_rest(cls, q) -> "JointState":
        q = np.asarray(q, dtype=float)
        return cls(q, np.zeros_like(q), np.zeros_like(q))

    @property
    def dof(self) -> int:
        return self.q.size


def check_dims(chain: KinematicChain, *vectors) -> list[np.ndarray]:
    out = []
    for v in vectors:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if v.shape != (chain.dof,):
            raise DimensionError(f"expected a vector of length {chain.dof}, got shape {v.shape}")
        out.append(v)
    return out


def _dh_matrix(theta: float, a: float, d: float, alpha: float) -> np.ndarray:
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def _row_matrix(row: DHRow, q: float) -> np.ndarray:
    if row.revolute:
        return _dh_matrix(row.theta_offset + q, row.a, row.d, row.alpha)
    return _dh_matrix(row.theta_offset, row.a, row.d + q, row.alpha)


def link_transform(row: DHRow, q: float) -> RigidTransform:
    """Transform from frame i-1 to frame i with joint variable ``q`` substituted."""
    return RigidTransform.from_matrix(_row_matrix(row, float(q)))


def frame_matrices(chain: KinematicChain, q) -> list[np.ndarray]:
    """World 4x4 matrices of frames 0..n (frame 0 is the base)."""
    T = chain.base_pose.matrix
    frames = [T]
    for row, qi in zip(chain.rows, q):
        T = T @ _row_matrix(row, qi)
        frames.append(T)
    return frames


def forward_kinematics(chain: KinematicChain, q) -> list[RigidTransform]:
    """World poses of link frames 1..n; the last one is the end effector."""
    (q,) = check_dims(chain, q)
    return [RigidTransform.from_matrix(T) for T in frame_matrices(chain, q)[1:]]


def end_effector(chain: KinematicChain, q) -> RigidTransform:
    return forward_kinematics(chain, q)[-1]


def _jacobian_from_frames(chain: KinematicChain, frames: list[np.ndarray]) -> np.ndarray:
    p_ee = frames[-1][:3, 3]
    J = np.zeros((6, chain.dof))
    for i, row in enumerate(chain.rows):
        z = frames[i][:3, 2]
        if row.revolute:
            J[:3, i] = np.cross(z, p_ee - frames[i][:3, 3])
            J[3:, i] = z
        else:
            J[:3, i] = z
    return J


def geometric_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """6 x dof world-frame Jacobian, linear rows first, referenced at the end-effector origin."""
    (q,) = check_dims(chain, q)
    return _jacobian_from_frames(chain, frame_matrices(chain, q))


def jacobian_derivative(chain: KinematicChain, q, qd) -> np.ndarray:
    """Time derivative of :func:`geometric_jacobian` along joint velocity ``qd``."""
    q, qd = check_dims(chain, q, qd)
    frames = frame_matrices(chain, q)
    n = chain.dof
    # angular velocity and origin velocity of every frame 0..n
    omega = [np.zeros(3)]
    vel = [np.zeros(3)]
    for i, row in enumerate(chain.rows):
        z = frames[i][:3, 2]
        r = frames[i + 1][:3, 3] - frames[i][:3, 3]
        if row.revolute:
            w = omega[i] + z * qd[i]
            v = vel[i] + np.cross(w, r)
        else:
            w = omega[i]
            v = vel[i] + np.cross(w, r) + z * qd[i]
        omega.append(w)
        vel.append(v)
    p_ee = frames[-1][:3, 3]
    v_ee = vel[-1]
    Jd = np.zeros((6, n))
    for i, row in enumerate(chain.rows):
        z = frames[i][:3, 2]
        zd = np.cross(omega[i], z)
        if row.revolute:
            Jd[:3, i] = np.cross(zd, p_ee - frames[i][:3, 3]) + np.cross(z, v_ee - vel[i])
            Jd[3:, i] = zd
        else:
            Jd[:3, i] = zd
    return Jd


def task_block(J: np.ndarray) -> np.ndarray:
    """Square task-relevant block of a 6 x dof Jacobian.

    dof 6 keeps the full matrix; dof 3 keeps the positional rows; dof 2 keeps
    the planar xy rows.
    """
    n = J.shape[1]
    if n == 6:
        return J
    if n in (2, 3):
        return J[:n, :]
    raise DimensionError(f"no square task block defined for a {n}-dof chain")


def singularity_measure(J_task: np.ndarray) -> float:
    """|det| of a square task Jacobian; zero at a singular configuration."""
    J_task = np.asarray(J_task, dtype=float)
    if J_task.ndim != 2 or J_task.shape[0] != J_task.shape[1]:
        raise DimensionError(f"task Jacobian must be square, got {J_task.shape}")
    return abs(float(np.linalg.det(J_task)))


def chain_singularity(chain: KinematicChain, q) -> float:
    return singularity_measure(task_block(geometric_jacobian(chain, q)))


def is_singular(measure: float, tolerance: float = SINGULARITY_TOLERANCE) -> bool:
    return measure < tolerance
