"""Mass matrix and bias forces for the articulated model.

The mass matrix accumulates each body's contribution through its COM and
angular Jacobians; bias forces propagate velocity-product accelerations down
the tree (zero joint acceleration) and project the resulting inertial and
gravity forces back through the same Jacobians. Both reuse a shared KinState.
"""

from __future__ import annotations

import numpy as np

from .kinematics import KinState, compute_kinematics
from .model import JNT_FREE, JNT_PRISMATIC, JNT_REVOLUTE, CompiledModel
from ..rotations import cross, skew


def mass_matrix_from_kin(model: CompiledModel, ks: KinState) -> np.ndarray:
    M = np.zeros((model.nv, model.nv))
    for i in range(1, model.nbody):
        if not model.has_inertia[i]:
            continue
        m = model.body_mass[i]
        R = ks.R[i]
        c = R @ model.body_com[i]
        Jc = ks.Jo[i] - skew(c) @ ks.Jw[i]
        Iw = R @ model.body_inertia[i] @ R.T
        M += m * (Jc.T @ Jc) + ks.Jw[i].T @ (Iw @ ks.Jw[i])
    return 0.5 * (M + M.T)


def mass_matrix(model: CompiledModel, q: np.ndarray) -> np.ndarray:
    return mass_matrix_from_kin(model, compute_kinematics(model, q))


def bias_forces_from_kin(
    model: CompiledModel, ks: KinState, qdot: np.ndarray, gravity: np.ndarray | None = None
) -> np.ndarray:
    """Coriolis + centrifugal + gravity + joint damping generalized forces."""
    g = model.gravity if gravity is None else np.asarray(gravity, dtype=float)
    nb = model.nbody
    w = np.zeros((nb, 3))
    v = np.zeros((nb, 3))
    wdot = np.zeros((nb, 3))
    a = np.zeros((nb, 3))
    tau = np.zeros(model.nv)
    pos = ks.pos
    for i in range(1, nb):
        p = model.parent[i]
        code = model.jnt_code[i]
        vadr = model.jnt_vadr[i]
        if code == JNT_FREE:
            v[i] = qdot[vadr : vadr + 3]
            w[i] = qdot[vadr + 3 : vadr + 6]
            # zero joint acceleration and world-fixed axes: no propagated terms
        else:
            r = pos[i] - pos[p]
            wp = w[p]
            wdp = wdot[p]
            v[i] = v[p] + cross(wp, r)
            w[i] = wp
            wdot[i] = wdp
            a[i] = a[p] + cross(wdp, r) + cross(wp, cross(wp, r))
            if code == JNT_REVOLUTE:
                axis_w = ks.R[i] @ model.jnt_axis[i]
                rate = qdot[vadr]
                w[i] = w[i] + axis_w * rate
                wdot[i] = wdot[i] + cross(wp, axis_w) * rate
            elif code == JNT_PRISMATIC:
                axis_w = ks.R[i] @ model.jnt_axis[i]
                rate = qdot[vadr]
                v[i] = v[i] + axis_w * rate
                a[i] = a[i] + 2.0 * cross(wp, axis_w) * rate
        if not model.has_inertia[i]:
            continue
        m = model.body_mass[i]
        R = ks.R[i]
        c = R @ model.body_com[i]
        wi = w[i]
        wdi = wdot[i]
        a_com = a[i] + cross(wdi, c) + cross(wi, cross(wi, c))
        Iw = R @ model.body_inertia[i] @ R.T
        f = m * (a_com - g)
        n = Iw @ wdi + cross(wi, Iw @ wi)
        Jc = ks.Jo[i] - skew(c) @ ks.Jw[i]
        tau += Jc.T @ f + ks.Jw[i].T @ n
    tau += model.dof_damping * qdot
    return tau


def bias_forces(
    model: CompiledModel, q: np.ndarray, qdot: np.ndarray, gravity: np.ndarray | None = None
) -> np.ndarray:
    qdot = np.asarray(qdot, dtype=float)
    return bias_forces_from_kin(model, compute_kinematics(model, q), qdot, gravity)


def gravity_torques(model: CompiledModel, q: np.ndarray) -> np.ndarray:
    """Generalized gravity load; identical code path to bias at zero velocity."""
    return bias_forces(model, q, np.zeros(model.nv))
