"""Built-in robot models: the six-axis LWR and the 2R + telescopic HOBM."""

from __future__ import annotations

import numpy as np

from hobm_lwr.dynamics import LinkInertia, RobotModel
from hobm_lwr.kinematics import DHRow, JointType, KinematicChain, RigidTransform

# (a, d, alpha) per joint, all revolute
LWR_DH = (
    (0.0, 0.1273, np.pi / 2),
    (-0.612, 0.0, 0.0),
    (-0.572, 0.0, 0.0),
    (0.0, 0.163941, np.pi / 2),
    (0.0, 0.1157, -np.pi / 2),
    (0.0, 0.0922, 0.0),
)

# mass, COM (x, y, z), Ix, Iy, Iz
LWR_INERTIA = (
    (1.35, (0.0, 0.0116, 0.0786), 4.62e-3, 5.40e-3, 4.88e-3),
    (3.82, (0.0, 0.251, 0.0844), 1.20e-1, 8.08e-1, 6.96e-1),
    (2.04, (0.0, 0.258, 0.0566), 8.03e-3, 2.96e-1, 2.90e-1),
    (0.32, (0.0, 0.009, 0.0463), 5.35e-4, 4.79e-4, 4.07e-4),
    (0.32, (0.0, 0.010, 0.0464), 5.37e-4, 4.82e-4, 4.06e-4),
    (0.07, (0.0, 0.0, 0.0126), 5.72e-5, 5.95e-5, 6.57e-5),
)

# mass, length, COM distance from the proximal joint, axial moment about the COM
HOBM_TABLE = (
    (30.97, 1.4, 0.57, 9.28),
    (23.56, 1.5, 0.74, 5.21),
    (2.13, 0.6, 0.3, 0.06),
)
HOBM_STROKE = HOBM_TABLE[2][1]

# joints 2..6 held fixed during the reference sweep of joint 1 (degrees)
SCENARIO_FIXED_DEG = (-45.0, 90.0, -225.0, 90.0, 0.0)
SCENARIO_THETA1_DEG = (-40.0, 40.0)
SCENARIO_RAMP_TIME = 0.2
SCENARIO_TOTAL_TIME = 2.0


def lwr_chain(base_pose: RigidTransform | None = None) -> KinematicChain:
    rows = tuple(DHRow(0.0, a, d, alpha) for a, d, alpha in LWR_DH)
    return KinematicChain(rows, base_pose or RigidTransform.identity())


def lwr_model(base_pose: RigidTransform | None = None) -> RobotModel:
    links = tuple(LinkInertia.diagonal(m, com, ix, iy, iz) for m, com, ix, iy, iz in LWR_INERTIA)
    return RobotModel(lwr_chain(base_pose), links)


def hobm_chain(base_pose: RigidTransform | None = None) -> KinematicChain:
    (_, l1, _, _), (_, l2, _, _), _ = HOBM_TABLE
    rows = (
        DHRow(0.0, l1, 0.0, 0.0, JointType.REVOLUTE),
        DHRow(0.0, l2, 0.0, 0.0, JointType.REVOLUTE),
        DHRow(0.0, 0.0, 0.0, 0.0, JointType.PRISMATIC),
    )
    return KinematicChain(rows, base_pose or RigidTransform.identity())


def hobm_links() -> tuple[LinkInertia, ...]:
    (m1, l1, r1, i1), (m2, l2, r2, i2), (m3, l3, r3, i3) = HOBM_TABLE
    # frames sit at the distal end of each link; the single tabulated moment
    # is used for all three axes
    return (
        LinkInertia(m1, (r1 - l1, 0.0, 0.0), i1 * np.eye(3)),
        LinkInertia(m2, (r2 - l2, 0.0, 0.0), i2 * np.eye(3)),
        LinkInertia(m3, (0.0, 0.0, r3 - l3), i3 * np.eye(3)),
    )


def hobm_model(base_pose: RigidTransform | None = None) -> RobotModel:
    return RobotModel(hobm_chain(base_pose), hobm_links())


def hobm_arm_model(base_pose: RigidTransform | None = None) -> RobotModel:
    """The two rotating links only (cable-lift variant)."""
    chain = hobm_chain(base_pose)
    return RobotModel(KinematicChain(chain.rows[:2], chain.base_pose), hobm_links()[:2])


PRESETS = {
    "lwr": lwr_model,
    "hobm": hobm_model,
    "hobm-arm": hobm_arm_model,
}


def preset(name: str, base_pose: RigidTransform | None = None) -> RobotModel:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None
    return factory(base_pose)
