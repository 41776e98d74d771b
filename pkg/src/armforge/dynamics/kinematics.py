"""Forward kinematics and world-frame body Jacobians."""

from __future__ import annotations

import numpy as np

from .model import JNT_FREE, JNT_NONE, JNT_PRISMATIC, JNT_REVOLUTE, CompiledModel
from .types import ModelError, Pose
from ..rotations import cross, quat_mul, quat_normalize, quat_to_matrix, skew


class KinState:
    """Per-body world poses and Jacobians for one configuration.

    Jo maps qdot to the linear velocity of each body's frame origin; Jw maps
    qdot to its angular velocity. Both are world-frame.
    """

    __slots__ = ("q", "pos", "quat", "R", "Jo", "Jw")

    def __init__(self, nbody: int, nv: int):
        self.pos = np.zeros((nbody, 3))
        self.quat = np.zeros((nbody, 4))
        self.R = np.zeros((nbody, 3, 3))
        self.Jo = np.zeros((nbody, 3, nv))
        self.Jw = np.zeros((nbody, 3, nv))


def _axis_rotation(axis, angle):
    """Rodrigues rotation about a unit axis."""
    c = np.cos(angle)
    s = np.sin(angle)
    x, y, z = axis
    C = 1.0 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


def compute_kinematics(model: CompiledModel, q: np.ndarray) -> KinState:
    q = np.asarray(q, dtype=float)
    if q.shape != (model.nq,):
        raise ModelError(f"q has shape {q.shape}, model expects ({model.nq},)")
    ks = KinState(model.nbody, model.nv)
    ks.q = q
    ks.quat[0, 0] = 1.0
    ks.R[0] = np.eye(3)
    pos, quat, R, Jo, Jw = ks.pos, ks.quat, ks.R, ks.Jo, ks.Jw
    parent = model.parent
    jnt_code = model.jnt_code
    jnt_axis = model.jnt_axis
    jnt_qadr = model.jnt_qadr
    jnt_vadr = model.jnt_vadr
    for i in range(1, model.nbody):
        p = parent[i]
        Rp = R[p]
        a_pos = pos[p] + Rp @ model.offset_pos[i]
        code = jnt_code[i]
        if code == JNT_NONE:
            pos[i] = a_pos
            quat[i] = quat_mul(quat[p], model.offset_quat[i])
            R[i] = Rp @ model.offset_R[i]
            r = a_pos - pos[p]
            Jo[i] = Jo[p] - skew(r) @ Jw[p]
            Jw[i] = Jw[p]
            continue
        vadr = jnt_vadr[i]
        qadr = jnt_qadr[i]
        if code == JNT_FREE:
            pos[i] = a_pos + q[qadr : qadr + 3]
            quat[i] = quat_normalize(q[qadr + 3 : qadr + 7])
            R[i] = quat_to_matrix(quat[i])
            Jo[i, 0, vadr] = Jo[i, 1, vadr + 1] = Jo[i, 2, vadr + 2] = 1.0
            Jw[i, 0, vadr + 3] = Jw[i, 1, vadr + 4] = Jw[i, 2, vadr + 5] = 1.0
            continue
        a_quat = quat_mul(quat[p], model.offset_quat[i])
        Ra = Rp @ model.offset_R[i]
        axis = jnt_axis[i]
        if code == JNT_REVOLUTE:
            angle = q[qadr]
            half = 0.5 * angle
            s = np.sin(half)
            jq = np.array([np.cos(half), s * axis[0], s * axis[1], s * axis[2]])
            pos[i] = a_pos
            quat[i] = quat_mul(a_quat, jq)
            R[i] = Ra @ _axis_rotation(axis, angle)
            r = a_pos - pos[p]
            Jo[i] = Jo[p] - skew(r) @ Jw[p]
            Jw[i] = Jw[p].copy()
            Jw[i, :, vadr] += R[i] @ axis
        else:  # prismatic
            axis_w = Ra @ axis
            pos[i] = a_pos + axis_w * q[qadr]
            quat[i] = a_quat
            R[i] = Ra
            r = pos[i] - pos[p]
            Jo[i] = Jo[p] - skew(r) @ Jw[p]
            Jw[i] = Jw[p]
            Jo[i, :, vadr] += axis_w
    return ks


def body_velocities(model: CompiledModel, ks: KinState, qdot: np.ndarray):
    """World linear velocity of each body origin and angular velocity.

    Propagated along the tree rather than via the Jacobians, which is cheaper
    for full-model queries.
    """
    nb = model.nbody
    v = np.zeros((nb, 3))
    w = np.zeros((nb, 3))
    pos = ks.pos
    for i in range(1, nb):
        p = model.parent[i]
        code = model.jnt_code[i]
        vadr = model.jnt_vadr[i]
        if code == JNT_FREE:
            v[i] = qdot[vadr : vadr + 3]
            w[i] = qdot[vadr + 3 : vadr + 6]
            continue
        r = pos[i] - pos[p]
        wp = w[p]
        v[i] = v[p] + cross(wp, r)
        w[i] = wp
        if code == JNT_REVOLUTE:
            w[i] = w[i] + (ks.R[i] @ model.jnt_axis[i]) * qdot[vadr]
        elif code == JNT_PRISMATIC:
            v[i] = v[i] + (ks.R[i] @ model.jnt_axis[i]) * qdot[vadr]
    return v, w


def point_jacobian(ks: KinState, body: int, point_world: np.ndarray) -> np.ndarray:
    """3 x nv Jacobian of a world point rigidly attached to a body."""
    r = np.asarray(point_world, dtype=float) - ks.pos[body]
    return ks.Jo[body] - skew(r) @ ks.Jw[body]


def site_pose(model: CompiledModel, ks: KinState, site: str) -> Pose:
    if site not in model.sites:
        raise ModelError(f"unknown site {site!r}")
    body, local = model.sites[site]
    return Pose(
        ks.pos[body] + ks.R[body] @ local.position,
        quat_normalize(quat_mul(ks.quat[body], local.orientation)),
    )


def site_jacobian(model: CompiledModel, ks: KinState, site: str) -> np.ndarray:
    """6 x nv site Jacobian, world frame, linear rows stacked over angular."""
    if site not in model.sites:
        raise ModelError(f"unknown site {site!r}")
    body, local = model.sites[site]
    point = ks.pos[body] + ks.R[body] @ local.position
    J = np.zeros((6, model.nv))
    J[0:3] = point_jacobian(ks, body, point)
    J[3:6] = ks.Jw[body]
    return J


# -- spec-level wrappers ----------------------------------------------------


def forward_kinematics(model: CompiledModel, q: np.ndarray) -> dict:
    """World pose of every body at configuration q."""
    ks = compute_kinematics(model, q)
    return {
        name: Pose(ks.pos[i], quat_normalize(ks.quat[i]))
        for i, name in enumerate(model.body_names)
    }


def jacobian(model: CompiledModel, q: np.ndarray, site: str) -> np.ndarray:
    return site_jacobian(model, compute_kinematics(model, q), site)
