"""Inertial coupling between the LWR and the gravity-balanced HOBM.

The LWR prescribes the payload motion. The HOBM tip follows it, so its joint
rates and accelerations come from inverting its positional Jacobian. The
inertial torques the HOBM joints would need cannot be produced by its passive
joints, so they show up as a force the LWR must apply at the payload. That
force is mapped back onto the LWR joints with the transpose of the LWR
Jacobian.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from hobm_lwr.dynamics import JointState, RobotModel, Wrench, inverse_dynamics
from hobm_lwr.errors import DimensionError, SingularHOBMError, SingularLWRError, UnreachableError
from hobm_lwr.kinematics import (
    SINGULARITY_TOLERANCE,
    JointType,
    RigidTransform,
    check_dims,
    frame_matrices,
    geometric_jacobian,
    jacobian_derivative,
    singularity_measure,
)
from hobm_lwr.trajectory import TrapezoidalProfile

# Puts the reference-scenario payload arc between 1.95 m and 2.07 m from the
# HOBM axis, i.e. close to the elbow-at-90-degrees radius of 2.05 m.
DEFAULT_HOBM_BASE = (1.27, 0.28, 0.57)


@dataclass(frozen=True)
class CoupledSystem:
    lwr: RobotModel
    hobm: RobotModel
    payload_mass: float = 0.0
    hobm_base_offset: RigidTransform = field(
        default_factory=lambda: RigidTransform.from_translation(DEFAULT_HOBM_BASE)
    )
    singularity_tolerance: float = SINGULARITY_TOLERANCE
    elbow: int = 1  # sign of the HOBM elbow angle

    def __post_init__(self):
        if self.payload_mass < 0:
            raise ValueError("payload_mass must be non-negative")
        if self.elbow not in (1, -1):
            raise ValueError("elbow must be +1 or -1")
        _planar_hobm_geometry(self.hobm)

    @property
    def placed_hobm(self) -> RobotModel:
        """HOBM model with its base at ``hobm_base_offset``."""
        return self.hobm.with_base(self.hobm_base_offset)

    def without_hobm_inertia(self) -> "CoupledSystem":
        return replace(self, hobm=self.hobm.with_mass_scale(0.0), payload_mass=0.0)


@dataclass
class CoupledSample:
    t: float
    theta: JointState
    phi: JointState
    f_hobm: Wrench
    tau_lm: np.ndarray
    tau_total: np.ndarray

    @property
    def reflected(self) -> np.ndarray:
        return self.tau_total - self.tau_lm


@dataclass(frozen=True)
class Violation:
    t: float
    robot: str  # "lwr" or "hobm"
    kind: str  # "singular" or "unreachable"
    measure: float


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[Violation]
    n_samples: int

    @property
    def first_violation_time(self) -> float | None:
        return self.violations[0].t if self.violations else None


def _planar_hobm_geometry(hobm: RobotModel):
    """Validate the revolute-revolute-prismatic vertical-axis layout and return its lengths."""
    rows = hobm.chain.rows
    ok = (
        len(rows) == 3
        and rows[0].joint_type == JointType.REVOLUTE
        and rows[1].joint_type == JointType.REVOLUTE
        and rows[2].joint_type == JointType.PRISMATIC
        and rows[0].alpha == 0.0
        and rows[1].alpha == 0.0
        and rows[2].a == 0.0
    )
    if not ok:
        raise ValueError("HOBM must be a planar 2R arm (alpha = 0) followed by a prismatic axis with a = 0")
    return rows[0].a, rows[1].a


# --- velocity / force transmission ------------------------------------------


def payload_twist(lwr: RobotModel, theta, thetad) -> np.ndarray:
    """Payload twist (linear, angular) in world axes."""
    theta, thetad = check_dims(lwr.chain, theta, thetad)
    return geometric_jacobian(lwr.chain, theta) @ thetad


def hobm_follow(
    hobm: RobotModel,
    payload_position,
    elbow: int = 1,
    tolerance: float = SINGULARITY_TOLERANCE,
) -> np.ndarray:
    """Closed-form HOBM joint vector putting its tip at ``payload_position``."""
    l1, l2 = _planar_hobm_geometry(hobm)
    rows = hobm.chain.rows
    x, y, z = hobm.chain.base_pose.inverse().apply(payload_position)
    r = math.hypot(x, y)
    inner, outer = abs(l1 - l2), l1 + l2
    # a radius within tolerance of either bound counts as the singular boundary
    if r > outer + tolerance or r < inner - tolerance:
        raise UnreachableError(
            f"payload at planar radius {r:.6g} m is outside the HOBM annulus [{inner:.6g}, {outer:.6g}] m"
        )
    c2 = min(1.0, max(-1.0, (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)))
    psi2 = elbow * math.acos(c2)
    measure = abs(l1 * l2 * math.sin(psi2))
    if measure < tolerance:
        raise SingularHOBMError("payload on the HOBM annulus boundary", measure)
    psi1 = math.atan2(y, x) - math.atan2(l2 * math.sin(psi2), l1 + l2 * math.cos(psi2))
    phi1 = psi1 - rows[0].theta_offset
    phi1 = math.atan2(math.sin(phi1), math.cos(phi1))
    phi2 = psi2 - rows[1].theta_offset
    stroke = z - rows[0].d - rows[1].d - rows[2].d
    return np.array([phi1, phi2, stroke])


def _hobm_position_jacobian(hobm: RobotModel, phi, tolerance: float) -> np.ndarray:
    (phi,) = check_dims(hobm.chain, phi)
    J = geometric_jacobian(hobm.chain, phi)[:3]
    measure = singularity_measure(J)
    if measure < tolerance:
        raise SingularHOBMError("HOBM positional Jacobian is singular", measure)
    return J


def hobm_joint_rates(hobm: RobotModel, phi, xdot_linear, tolerance: float = SINGULARITY_TOLERANCE) -> np.ndarray:
    J = _hobm_position_jacobian(hobm, phi, tolerance)
    return np.linalg.solve(J, np.asarray(xdot_linear, dtype=float))


def hobm_joint_accels(
    hobm: RobotModel, phi, phid, xddot_linear, tolerance: float = SINGULARITY_TOLERANCE
) -> np.ndarray:
    """Joint accelerations from J phidd = xddot - Jdot phid."""
    J = _hobm_position_jacobian(hobm, phi, tolerance)
    Jd = jacobian_derivative(hobm.chain, phi, phid)[:3]
    return np.linalg.solve(J, np.asarray(xddot_linear, dtype=float) - Jd @ np.asarray(phid, dtype=float))


def hobm_inertial_load(hobm: RobotModel, phi, phid, phidd, payload_mass: float) -> np.ndarray:
    """Joint loads of the HOBM and tip payload with the static gravity part removed.

    The HOBM balances gravity perfectly, so only inertial terms remain. Since
    the recursion is affine in gravity, this equals inverse dynamics with
    gravity switched off.
    """
    model = hobm.with_tip_mass(payload_mass).without_gravity()
    return inverse_dynamics(model, JointState(phi, phid, phidd))


def reflect_through_jacobian(J_pos: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Solve J^T f = tau for the tip force."""
    return np.linalg.solve(np.asarray(J_pos, dtype=float).T, np.asarray(tau, dtype=float))


def payload_wrench(hobm: RobotModel, phi, tau_hobm, tolerance: float = SINGULARITY_TOLERANCE) -> Wrench:
    """Force the LWR must apply at the payload to drive the HOBM loads ``tau_hobm``.

    The HOBM tip has no orientation freedom, so the moment part is zero.
    """
    J = _hobm_position_jacobian(hobm, phi, tolerance)
    tip = frame_matrices(hobm.chain, phi)[-1][:3, 3]
    return Wrench(reflect_through_jacobian(J, tau_hobm), np.zeros(3), tip)


# --- full coupled evaluation ------------------------------------------------


def coupled_torques(sys: CoupledSystem, theta, thetad, thetadd, t: float = 0.0) -> CoupledSample:
    """LWR joint torques with and without the HOBM inertia at one instant."""
    chain = sys.lwr.chain
    theta, thetad, thetadd = check_dims(chain, theta, thetad, thetadd)
    frames = frame_matrices(chain, theta)
    J = geometric_jacobian(chain, theta)
    lwr_measure = singularity_measure(J) if chain.dof == 6 else float("inf")
    if lwr_measure < sys.singularity_tolerance:
        raise SingularLWRError("LWR Jacobian is singular", lwr_measure, t)

    x = frames[-1][:3, 3]
    xdot = (J @ thetad)[:3]
    xddot = (J @ thetadd + jacobian_derivative(chain, theta, thetad) @ thetad)[:3]

    hobm = sys.placed_hobm
    tol = sys.singularity_tolerance
    try:
        phi = hobm_follow(hobm, x, sys.elbow, tol)
        phid = hobm_joint_rates(hobm, phi, xdot, tol)
        phidd = hobm_joint_accels(hobm, phi, phid, xddot, tol)
        tau_hobm = hobm_inertial_load(hobm, phi, phid, phidd, sys.payload_mass)
        f_hobm = payload_wrench(hobm, phi, tau_hobm, tol)
    except (SingularHOBMError, UnreachableError) as exc:
        raise exc.at_time(t) from None

    tau_lm = inverse_dynamics(sys.lwr, JointState(theta, thetad, thetadd))
    wrench = np.concatenate([f_hobm.force, f_hobm.moment])
    tau_total = tau_lm + J.T @ wrench
    return CoupledSample(t, JointState(theta, thetad, thetadd), JointState(phi, phid, phidd), f_hobm, tau_lm, tau_total)


def path_states(profile: TrapezoidalProfile, fixed_joints: Sequence[float], t: float, joint: int = 0):
    """LWR (theta, thetad, thetadd) with ``joint`` following ``profile`` and the rest held."""
    fixed = list(map(float, fixed_joints))
    theta = np.array(fixed[:joint] + [profile.position(t)] + fixed[joint:])
    thetad = np.zeros_like(theta)
    thetadd = np.zeros_like(theta)
    thetad[joint] = profile.velocity(t)
    thetadd[joint] = profile.acceleration(t)
    return theta, thetad, thetadd


def _check_fixed(sys: CoupledSystem, fixed_joints):
    if len(fixed_joints) != sys.lwr.dof - 1:
        raise DimensionError(f"expected {sys.lwr.dof - 1} fixed joint values, got {len(fixed_joints)}")


def simulate_coupled(
    sys: CoupledSystem,
    profile: TrapezoidalProfile,
    fixed_joints: Sequence[float],
    dt: float,
    joint: int = 0,
    max_workers: int | None = None,
) -> list[CoupledSample]:
    """Evaluate :func:`coupled_torques` at t = 0, dt, ... along the profile.

    Each sample's ``tau_lm`` is the torque without the HOBM, so one run gives
    both sides of the comparison.
    """
    _check_fixed(sys, fixed_joints)
    times = profile.sample_times(dt)

    def one(t):
        return coupled_torques(sys, *path_states(profile, fixed_joints, t, joint), t=float(t))

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            return list(pool.map(one, times))
    return [one(t) for t in times]


def check_path_feasible(
    sys: CoupledSystem,
    profile: TrapezoidalProfile,
    fixed_joints: Sequence[float],
    dt: float,
    joint: int = 0,
) -> FeasibilityReport:
    """Sample both singularity measures and HOBM reachability along the path."""
    _check_fixed(sys, fixed_joints)
    hobm = sys.placed_hobm
    tol = sys.singularity_tolerance
    chain = sys.lwr.chain
    violations = []
    times = profile.sample_times(dt)
    for t in times:
        theta, _, _ = path_states(profile, fixed_joints, t, joint)
        J = geometric_jacobian(chain, theta)
        if chain.dof == 6:
            m = singularity_measure(J)
            if m < tol:
                violations.append(Violation(float(t), "lwr", "singular", m))
        x = frame_matrices(chain, theta)[-1][:3, 3]
        try:
            phi = hobm_follow(hobm, x, sys.elbow, 0.0)
        except UnreachableError:
            violations.append(Violation(float(t), "hobm", "unreachable", 0.0))
            continue
        m = singularity_measure(geometric_jacobian(hobm.chain, phi)[:3])
        if m < tol:
            violations.append(Violation(float(t), "hobm", "singular", m))
    return FeasibilityReport(not violations, violations, len(times))
