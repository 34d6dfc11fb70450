import numpy as np
import pytest

from hobm_lwr.errors import DimensionError
from hobm_lwr.dynamics import (
    LinkInertia,
    RobotModel,
    Wrench,
    bias_forces,
    coriolis_vector,
    gravity_vector,
    inverse_dynamics,
    kinetic_energy,
    mass_matrix,
)
from hobm_lwr.kinematics import DHRow, JointState, JointType, KinematicChain, end_effector, geometric_jacobian
from hobm_lwr.presets import hobm_model, lwr_model
from helpers import random_hobm_state, random_state
from oracles import LagrangianOracle

PRESETS = {"lwr": lwr_model(), "hobm": hobm_model()}


def sample(rng, name):
    if name == "hobm":
        return random_hobm_state(rng)
    return random_state(rng, 6)


@pytest.mark.parametrize("name", PRESETS)
def test_matches_lagrangian_oracle(name, rng):
    model = PRESETS[name]
    oracle = LagrangianOracle.from_model(model)
    for _ in range(20):
        q, qd, qdd = sample(rng, name)
        tau = inverse_dynamics(model, JointState(q, qd, qdd))
        assert np.max(np.abs(tau - oracle.torques(q, qd, qdd))) < 1e-6


@pytest.mark.parametrize("name", PRESETS)
def test_mass_matrix_matches_oracle(name, rng):
    model = PRESETS[name]
    oracle = LagrangianOracle.from_model(model)
    for _ in range(10):
        q, _, _ = sample(rng, name)
        np.testing.assert_allclose(mass_matrix(model, q), oracle.mass_matrix(q), atol=1e-10)


@pytest.mark.parametrize("name", PRESETS)
def test_decomposition_closure(name, rng):
    model = PRESETS[name]
    for _ in range(100):
        q, qd, qdd = sample(rng, name)
        tau = inverse_dynamics(model, JointState(q, qd, qdd))
        M = mass_matrix(model, q)
        assert np.max(np.abs(tau - (M @ qdd + bias_forces(model, q, qd)))) < 1e-9
        assert np.max(np.abs(M - M.T)) < 1e-9
        np.linalg.cholesky(M)


@pytest.mark.parametrize("name", PRESETS)
def test_bias_parts(name, rng):
    model = PRESETS[name]
    q, qd, _ = sample(rng, name)
    np.testing.assert_allclose(bias_forces(model, q, np.zeros_like(qd)), gravity_vector(model, q), atol=1e-12)
    np.testing.assert_allclose(
        bias_forces(model, q, qd), coriolis_vector(model, q, qd) + gravity_vector(model, q), atol=1e-9
    )
    np.testing.assert_allclose(bias_forces(model.without_gravity(), q, np.zeros_like(qd)), 0.0, atol=1e-12)


def test_zero_state_zero_gravity_gives_zero(rng):
    model = lwr_model().without_gravity()
    q = rng.uniform(-np.pi, np.pi, 6)
    np.testing.assert_allclose(inverse_dynamics(model, JointState.at_rest(q)), 0.0, atol=1e-14)


def test_lever_arm():
    # point mass 2 kg at 0.5 m on a revolute-z joint, gravity in the joint plane
    chain = KinematicChain((DHRow(a=0.5),))
    model = RobotModel(chain, (LinkInertia(2.0),), gravity=(0.0, -9.81, 0.0))
    tau = inverse_dynamics(model, JointState.at_rest([0.0]))
    assert tau[0] == pytest.approx(9.81, rel=1e-14)


def test_single_prismatic_mass_matrix():
    chain = KinematicChain((DHRow(joint_type=JointType.PRISMATIC),))
    model = RobotModel(chain, (LinkInertia(3.7, inertia=np.eye(3)),))
    np.testing.assert_allclose(mass_matrix(model, [0.2]), [[3.7]], atol=1e-14)
    assert gravity_vector(model, [0.2])[0] == pytest.approx(3.7 * 9.81)


def test_tip_mass_matches_point_mass_oracle(rng):
    model = hobm_model()
    oracle = LagrangianOracle.from_model(model, point_masses=[(2, (0, 0, 0), 50.0)])
    heavy = model.with_tip_mass(50.0)
    for _ in range(5):
        q, qd, qdd = random_hobm_state(rng)
        tau = inverse_dynamics(heavy, JointState(q, qd, qdd))
        assert np.max(np.abs(tau - oracle.torques(q, qd, qdd))) < 1e-6


def test_power_balance(rng):
    # d(KE)/dt equals qd . tau for gravity-off, wrench-free motion
    model = lwr_model().without_gravity()
    q0, w, a = (rng.uniform(-1, 1, 6) for _ in range(3))

    def traj(t):
        return q0 + w * np.sin(t) + 0.3 * a * t**2, w * np.cos(t) + 0.6 * a * t, -w * np.sin(t) + 0.6 * a

    h = 1e-4
    worst = 0.0
    for t in np.linspace(0.1, 2.0, 20):
        q, qd, qdd = traj(t)
        power = qd @ inverse_dynamics(model, JointState(q, qd, qdd))
        dke = (kinetic_energy(model, *traj(t + h)[:2]) - kinetic_energy(model, *traj(t - h)[:2])) / (2 * h)
        worst = max(worst, abs(dke - power) / max(abs(power), 1e-9))
    assert worst < 1e-3


def test_wrench_maps_through_jacobian_transpose(rng):
    model = lwr_model()
    q, qd, qdd = random_state(rng, 6)
    state = JointState(q, qd, qdd)
    base = inverse_dynamics(model, state)
    p = end_effector(model.chain, q).translation
    w = Wrench(rng.normal(size=3), rng.normal(size=3), p)
    J = geometric_jacobian(model.chain, q)
    np.testing.assert_allclose(inverse_dynamics(model, state, w) - base, J.T @ w.vector, atol=1e-10)


def test_wrench_linearity(rng):
    model = lwr_model()
    state = JointState(*random_state(rng, 6))
    w1 = Wrench(rng.normal(size=3), rng.normal(size=3), rng.normal(size=3))
    w2 = Wrench(rng.normal(size=3), rng.normal(size=3), rng.normal(size=3))
    base = inverse_dynamics(model, state)
    d1 = inverse_dynamics(model, state, w1) - base
    d2 = inverse_dynamics(model, state, w2) - base
    d12 = inverse_dynamics(model, state, w1 + w2) - base
    assert np.max(np.abs(d12 - (d1 + d2))) < 1e-10


def test_dimension_and_finiteness_errors():
    model = lwr_model()
    with pytest.raises(DimensionError):
        inverse_dynamics(model, JointState.at_rest(np.zeros(5)))
    with pytest.raises(ValueError):
        inverse_dynamics(model, JointState.at_rest([0, 0, np.nan, 0, 0, 0]))


class TestLinkInertia:
    def test_rejects_negative_mass(self):
        with pytest.raises(ValueError):
            LinkInertia(-1.0)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            LinkInertia(1.0, inertia=[[1, 0.5, 0], [0, 1, 0], [0, 0, 1]])

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            LinkInertia(1.0, inertia=np.diag([1.0, 1.0, -1.0]))

    def test_point_mass_lumping(self):
        body = LinkInertia(1.0).plus_point_mass(1.0, [2.0, 0, 0])
        np.testing.assert_allclose(body.com, [1.0, 0, 0])
        # two unit masses 1 m either side of the COM
        np.testing.assert_allclose(np.diag(body.inertia), [0.0, 2.0, 2.0], atol=1e-14)

    def test_presets_physically_consistent(self):
        for model in PRESETS.values():
            assert all(l.satisfies_triangle_inequality() for l in model.links)
