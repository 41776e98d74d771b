"""Mass matrix, bias forces, and forward dynamics against analytic and
finite-difference energy oracles."""

import numpy as np
import pytest

from armforge.dynamics import bias_forces, compile_model, forward_dynamics, mass_matrix
from armforge.dynamics.algorithms import gravity_torques
from armforge.dynamics.kinematics import compute_kinematics
from armforge.dynamics.types import SimState

from conftest import (
    double_pendulum_doc,
    free_body_doc,
    pendulum_doc,
    random_chain_doc,
)

G = 9.81


# -- mass matrix -------------------------------------------------------------


def test_pendulum_mass_matrix_analytic():
    m, l = 1.7, 0.8
    model = compile_model(pendulum_doc(m, l))
    M = mass_matrix(model, np.array([0.3]))
    np.testing.assert_allclose(M, [[m * l * l]], atol=1e-8)


def test_double_pendulum_mass_matrix_closed_form():
    m1, l1, m2, l2 = 1.3, 0.9, 0.7, 0.6
    model = compile_model(double_pendulum_doc(m1, l1, m2, l2))
    rng = np.random.default_rng(5)
    for _ in range(20):
        q = rng.uniform(-np.pi, np.pi, size=2)
        c2 = np.cos(q[1])
        M_ref = np.array(
            [
                [m1 * l1**2 + m2 * (l1**2 + 2 * l1 * l2 * c2 + l2**2), m2 * (l1 * l2 * c2 + l2**2)],
                [m2 * (l1 * l2 * c2 + l2**2), m2 * l2**2],
            ]
        )
        np.testing.assert_allclose(mass_matrix(model, q), M_ref, atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_mass_matrix_symmetric_positive_definite(seed):
    model = compile_model(random_chain_doc(7, seed=seed))
    rng = np.random.default_rng(seed)
    for _ in range(20):
        M = mass_matrix(model, rng.uniform(-2, 2, model.nq))
        assert np.max(np.abs(M - M.T)) < 1e-10
        assert np.linalg.eigvalsh(M)[0] > 0


# -- bias forces -------------------------------------------------------------


def test_pendulum_gravity_torque_analytic():
    m, l = 1.1, 0.75
    model = compile_model(pendulum_doc(m, l))
    for theta in (-0.8, 0.0, 0.4, 1.2):
        bias = bias_forces(model, np.array([theta]), np.zeros(1))
        np.testing.assert_allclose(bias, [m * G * l * np.cos(theta)], atol=1e-8)


def test_zero_gravity_zero_velocity_bias_is_zero():
    model = compile_model(random_chain_doc(6, seed=2))
    q = np.random.default_rng(0).uniform(-1, 1, model.nq)
    bias = bias_forces(model, q, np.zeros(model.nv), gravity=np.zeros(3))
    np.testing.assert_allclose(bias, np.zeros(model.nv), atol=1e-14)


def test_bias_at_zero_velocity_equals_gravity_torques():
    model = compile_model(random_chain_doc(7, seed=4))
    rng = np.random.default_rng(1)
    for _ in range(10):
        q = rng.uniform(-2, 2, model.nq)
        np.testing.assert_array_equal(
            bias_forces(model, q, np.zeros(model.nv)), gravity_torques(model, q)
        )


def _lagrangian_bias_fd(model, q, qdot, h=1e-6):
    """Independent oracle: d/dt(dT/dqdot) - dT/dq + dV/dq via finite
    differences on the kinetic/potential energy functions."""

    def potential(qv):
        ks = compute_kinematics(model, qv)
        V = 0.0
        for i in range(model.nbody):
            if not model.has_inertia[i]:
                continue
            com_w = ks.pos[i] + ks.R[i] @ model.body_com[i]
            V -= model.body_mass[i] * float(model.gravity @ com_w)
        return V

    def kinetic(qv, qd):
        return 0.5 * qd @ mass_matrix(model, qv) @ qd

    n = model.nq
    bias = np.zeros(n)
    for i in range(n):
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        dM_dqi = (mass_matrix(model, qp) - mass_matrix(model, qm)) / (2 * h)
        bias += dM_dqi @ qdot * qdot[i]  # Mdot qdot accumulated per coordinate
    for i in range(n):
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        bias[i] -= (kinetic(qp, qdot) - kinetic(qm, qdot)) / (2 * h)
        bias[i] += (potential(qp) - potential(qm)) / (2 * h)
    return bias


@pytest.mark.parametrize("seed", range(4))
def test_bias_matches_energy_derivative_oracle(seed):
    model = compile_model(random_chain_doc(5, seed=seed))
    rng = np.random.default_rng(seed + 10)
    q = rng.uniform(-1.5, 1.5, model.nq)
    qdot = rng.uniform(-1.0, 1.0, model.nv)
    ours = bias_forces(model, q, qdot)
    oracle = _lagrangian_bias_fd(model, q, qdot)
    assert np.max(np.abs(ours - oracle)) < 1e-5


# -- forward dynamics --------------------------------------------------------


def test_equilibrium_pendulum():
    model = compile_model(pendulum_doc(1.0, 1.0))
    state = SimState(np.array([0.25]), np.zeros(1))
    tau = gravity_torques(model, state.q)
    qddot = forward_dynamics(model, state, tau)
    np.testing.assert_allclose(qddot, np.zeros(1), atol=1e-12)


def test_unit_inertia_unit_torque():
    # 1-kg point mass at radius 1: M = 1, so tau=2 in zero gravity gives qddot=2
    model = compile_model(pendulum_doc(1.0, 1.0))
    model.gravity = np.zeros(3)
    state = SimState(np.zeros(1), np.zeros(1))
    np.testing.assert_allclose(forward_dynamics(model, state, np.array([2.0])), [2.0], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_equation_of_motion_residual(seed):
    model = compile_model(random_chain_doc(7, seed=seed))
    rng = np.random.default_rng(seed + 50)
    q = rng.uniform(-2, 2, model.nq)
    qdot = rng.uniform(-1.5, 1.5, model.nv)
    tau = rng.uniform(-20, 20, model.nv)
    state = SimState(q, qdot)
    qddot = forward_dynamics(model, state, tau)
    residual = mass_matrix(model, q) @ qddot + bias_forces(model, q, qdot) - tau
    assert np.linalg.norm(residual) < 1e-8


def test_free_body_falls_at_g():
    model = compile_model(free_body_doc(mass=2.0))
    # remove collision so gravity is the only influence
    model.collision_pairs = []
    state = model.default_state()
    qddot = forward_dynamics(model, state, np.zeros(6))
    np.testing.assert_allclose(qddot[:3], [0, 0, -G], atol=1e-12)
    np.testing.assert_allclose(qddot[3:], np.zeros(3), atol=1e-12)
