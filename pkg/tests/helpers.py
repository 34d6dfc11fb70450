"""Random state samplers shared by the tests."""

import numpy as np
from scipy.optimize import brentq

from hobm_lwr.coupling import path_states
from hobm_lwr.kinematics import RigidTransform
from oracles import LagrangianOracle

L1, L2 = 1.4, 1.5


def random_state(rng, n, qd_scale=2.0, qdd_scale=5.0):
    q = rng.uniform(-np.pi, np.pi, n)
    return q, rng.uniform(-qd_scale, qd_scale, n), rng.uniform(-qdd_scale, qdd_scale, n)


def random_hobm_state(rng, qd_scale=1.0, qdd_scale=3.0):
    """Random HOBM state away from the stretched/folded singularities."""
    phi = np.array([
        rng.uniform(-np.pi, np.pi),
        rng.choice([-1, 1]) * rng.uniform(0.2, np.pi - 0.2),
        rng.uniform(-0.6, 0.6),
    ])
    return phi, rng.uniform(-qd_scale, qd_scale, 3), rng.uniform(-qdd_scale, qdd_scale, 3)


def extension_base(system, profile, fixed_joints, t0=1.0):
    """HOBM base on the path tangent so its reach boundary is crossed at about t0."""
    oracle = LagrangianOracle.from_model(system.lwr)

    def x_of(s):
        return oracle.frames(path_states(profile, fixed_joints, s)[0])[-1][:3, 3]

    p = x_of(t0)
    u = x_of(t0 + 1e-4) - x_of(t0 - 1e-4)
    u[2] = 0.0
    u /= np.linalg.norm(u)
    origin = p - (L1 + L2) * u
    origin[2] = p[2] - 0.3
    radius = lambda s: np.hypot(*(x_of(s) - origin)[:2]) - (L1 + L2)
    return RigidTransform.from_translation(origin), brentq(radius, 0.5, 1.9, xtol=1e-12)
