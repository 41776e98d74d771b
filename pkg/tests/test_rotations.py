"""Quaternion helpers checked against scipy's Rotation as an independent oracle."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from armforge import rotations as rot


def scipy_quat(q_wxyz):
    return Rotation.from_quat([q_wxyz[1], q_wxyz[2], q_wxyz[3], q_wxyz[0]])


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def test_mul_matches_scipy(rng):
    for _ in range(50):
        a = rot.random_quat(rng)
        b = rot.random_quat(rng)
        ours = rot.quat_mul(a, b)
        ref = (scipy_quat(a) * scipy_quat(b)).as_quat()  # xyzw
        ref = np.array([ref[3], ref[0], ref[1], ref[2]])
        if np.sign(ref[0]) != np.sign(ours[0]):
            ref = -ref
        np.testing.assert_allclose(ours, ref, atol=1e-12)


def test_rotate_matches_matrix(rng):
    for _ in range(50):
        q = rot.random_quat(rng)
        v = rng.normal(size=3)
        np.testing.assert_allclose(rot.quat_rotate(q, v), rot.quat_to_matrix(q) @ v, atol=1e-12)
        np.testing.assert_allclose(rot.quat_to_matrix(q), scipy_quat(q).as_matrix(), atol=1e-12)


def test_axis_angle_round_trip(rng):
    for _ in range(50):
        rv = rng.normal(size=3)
        rv *= rng.uniform(0, np.pi - 1e-3) / np.linalg.norm(rv)
        q = rot.quat_from_axis_angle(rv)
        np.testing.assert_allclose(rot.quat_to_axis_angle(q), rv, atol=1e-10)
        ref = Rotation.from_rotvec(rv).as_quat()
        ref = np.array([ref[3], ref[0], ref[1], ref[2]])
        if np.sign(ref[0]) != np.sign(q[0]):
            ref = -ref
        np.testing.assert_allclose(q, ref, atol=1e-12)


def test_zero_rotvec_is_identity():
    np.testing.assert_allclose(rot.quat_from_axis_angle(np.zeros(3)), rot.QUAT_IDENTITY)
    np.testing.assert_allclose(rot.quat_to_axis_angle(rot.QUAT_IDENTITY), np.zeros(3))


def test_integrate_unit_norm_and_direction(rng):
    q = rot.QUAT_IDENTITY.copy()
    omega = np.array([0.0, 0.0, np.pi])  # half turn per second about z
    for _ in range(1000):
        q = rot.quat_integrate(q, omega, 1e-3)
        assert abs(np.linalg.norm(q) - 1.0) < 1e-9
    # after 1 s the orientation is a half turn about z
    np.testing.assert_allclose(np.abs(q), np.array([0.0, 0.0, 0.0, 1.0]), atol=1e-9)


def test_quat_error_recovers_delta(rng):
    for _ in range(20):
        q = rot.random_quat(rng)
        delta = rng.normal(size=3) * 0.3
        q_goal = rot.quat_mul(rot.quat_from_axis_angle(delta), q)
        np.testing.assert_allclose(rot.quat_error(q_goal, q), delta, atol=1e-10)


def test_skew_matches_cross(rng):
    a = rng.normal(size=3)
    b = rng.normal(size=3)
    np.testing.assert_allclose(rot.skew(a) @ b, np.cross(a, b), atol=1e-14)
