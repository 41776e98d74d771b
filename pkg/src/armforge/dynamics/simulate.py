"""Forward dynamics, semi-implicit integration, weld latches, and stepping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import bias_forces_from_kin, mass_matrix_from_kin
from .contacts import ContactForce, ContactParams, contact_forces, detect_contacts
from .kinematics import KinState, body_velocities, compute_kinematics, point_jacobian
from .model import JNT_FREE, CompiledModel
from .types import ContactPoint, ModelError, SimState
from ..rotations import quat_conj, quat_error, quat_integrate, quat_mul, quat_rotate

# weld latch spring-damper gains; stiff enough for <2 mm carry error on the
# bundled objects, stable under semi-implicit Euler at dt = 2 ms
WELD_K_LIN = 8000.0
WELD_D_LIN = 100.0
WELD_K_ROT = 30.0
WELD_D_ROT = 0.05

# one-sided joint-limit penalty, same family as the contact parameters
LIMIT_STIFFNESS = 1.0e3
LIMIT_DAMPING = 10.0


class IntegrationError(RuntimeError):
    """State became non-finite during integration."""


@dataclass
class ExternalForce:
    """World-frame force (and optional torque) applied to a body at a point."""

    body: int
    point: np.ndarray
    force: np.ndarray
    torque: np.ndarray | None = None


@dataclass
class WeldConstraint:
    """Spring-damper latch holding body_b at a fixed pose relative to body_a."""

    body_a: int
    body_b: int
    rel_pos: np.ndarray
    rel_quat: np.ndarray
    active: bool = True


def weld_attach(
    model: CompiledModel,
    state: SimState,
    body_a: str,
    body_b: str,
    latch_radius: float = 0.01,
    anchor_world: np.ndarray | None = None,
) -> WeldConstraint:
    """Latch body_b to body_a at their current relative pose.

    The attach point check uses anchor_world (defaults to body_a's origin)
    against body_b's origin; beyond latch_radius the constraint comes back
    inactive so callers can surface the warning.
    """
    ks = compute_kinematics(model, state.q)
    ia = model.body_index[body_a]
    ib = model.body_index[body_b]
    if not any(j.body == ib and j.kind == "free" for j in model.joint_order):
        raise ModelError(f"weld target {body_b!r} must be a free-jointed body")
    anchor = ks.pos[ia] if anchor_world is None else np.asarray(anchor_world, dtype=float)
    distance = float(np.linalg.norm(ks.pos[ib] - anchor))
    qa_inv = quat_conj(ks.quat[ia])
    rel_pos = quat_rotate(qa_inv, ks.pos[ib] - ks.pos[ia])
    rel_quat = quat_mul(qa_inv, ks.quat[ib])
    return WeldConstraint(ia, ib, rel_pos, rel_quat, active=distance <= latch_radius)


def weld_detach(weld: WeldConstraint) -> None:
    weld.active = False


def weld_wrench(
    model: CompiledModel, ks: KinState, v: np.ndarray, w: np.ndarray, weld: WeldConstraint
):
    """Force/torque on body_b driving it toward its latched pose, plus the
    reaction on body_a. Returns (force_on_b, torque_on_b, point_b)."""
    ia, ib = weld.body_a, weld.body_b
    target_pos = ks.pos[ia] + quat_rotate(ks.quat[ia], weld.rel_pos)
    target_quat = quat_mul(ks.quat[ia], weld.rel_quat)
    pos_err = target_pos - ks.pos[ib]
    rot_err = quat_error(target_quat, ks.quat[ib])
    v_target = v[ia] + np.cross(w[ia], target_pos - ks.pos[ia])
    f = WELD_K_LIN * pos_err - WELD_D_LIN * (v[ib] - v_target)
    t = WELD_K_ROT * rot_err - WELD_D_ROT * (w[ib] - w[ia])
    return f, t


def joint_limit_torques(model: CompiledModel, state: SimState) -> np.ndarray:
    """One-sided penalty torques at joint limits plus any joint springs."""
    tau = np.zeros(model.nv)
    for info in model.joint_order:
        if info.nv != 1:
            continue
        qi = state.q[info.qadr]
        vi = state.qdot[info.vadr]
        if info.limits is not None:
            lo, hi = info.limits
            if qi < lo:
                tau[info.vadr] += LIMIT_STIFFNESS * (lo - qi) - LIMIT_DAMPING * vi
            elif qi > hi:
                tau[info.vadr] += LIMIT_STIFFNESS * (hi - qi) - LIMIT_DAMPING * vi
        if info.stiffness:
            tau[info.vadr] += info.stiffness * (info.spring_ref - qi)
    return tau


def generalized_external(model: CompiledModel, ks: KinState, forces: list[ExternalForce]):
    tau = np.zeros(model.nv)
    for ext in forces:
        tau += point_jacobian(ks, ext.body, ext.point).T @ ext.force
        if ext.torque is not None:
            tau += ks.Jw[ext.body].T @ ext.torque
    return tau


def forward_dynamics(
    model: CompiledModel,
    state: SimState,
    tau: np.ndarray,
    external: list[ExternalForce] | None = None,
    kin: KinState | None = None,
    M: np.ndarray | None = None,
    bias: np.ndarray | None = None,
) -> np.ndarray:
    """Solve M qddot = tau + J_ext^T f - bias for qddot."""
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (model.nv,):
        raise ModelError(f"tau has shape {tau.shape}, expected ({model.nv},)")
    if not np.all(np.isfinite(tau)):
        raise ModelError("tau contains non-finite entries")
    ks = kin if kin is not None else compute_kinematics(model, state.q)
    if M is None:
        M = mass_matrix_from_kin(model, ks)
    if bias is None:
        bias = bias_forces_from_kin(model, ks, state.qdot)
    rhs = tau - bias
    if external:
        rhs = rhs + generalized_external(model, ks, external)
    return np.linalg.solve(M, rhs)


def integrate(model: CompiledModel, state: SimState, qddot: np.ndarray, dt: float) -> SimState:
    """Semi-implicit Euler: update velocities first, then positions.

    Free-joint quaternions advance by the exponential map of the new angular
    velocity and come back exactly unit-norm.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    qdot = state.qdot + dt * np.asarray(qddot, dtype=float)
    q = state.q.copy()
    for info in model.joint_order:
        if info.kind == "free":
            q[info.qadr : info.qadr + 3] += dt * qdot[info.vadr : info.vadr + 3]
            q[info.qadr + 3 : info.qadr + 7] = quat_integrate(
                state.q[info.qadr + 3 : info.qadr + 7], qdot[info.vadr + 3 : info.vadr + 6], dt
            )
        else:
            q[info.qadr] += dt * qdot[info.vadr]
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qdot))):
        bad = _first_bad_joint(model, q, qdot)
        raise IntegrationError(f"non-finite state at joint {bad!r} (t={state.time:.4f}s)")
    return SimState(q, qdot, state.time + dt, state.last_contacts)


def _first_bad_joint(model: CompiledModel, q: np.ndarray, qdot: np.ndarray) -> str:
    for info in model.joint_order:
        if not np.all(np.isfinite(q[info.qadr : info.qadr + info.nq])):
            return info.name
        if not np.all(np.isfinite(qdot[info.vadr : info.vadr + info.nv])):
            return info.name
    return "<unknown>"


@dataclass
class StepInfo:
    contacts: list[ContactPoint] = field(default_factory=list)
    contact_wrenches: list[ContactForce] = field(default_factory=list)
    weld_forces: list = field(default_factory=list)  # (weld, force_on_b, torque_on_b)
    qddot: np.ndarray | None = None


def annotate_contact_velocities(
    model: CompiledModel, ks: KinState, v: np.ndarray, w: np.ndarray, contacts
) -> None:
    for c in contacts:
        ba = model.geoms[model.geom_index[c.geom_a]].body
        bb = model.geoms[model.geom_index[c.geom_b]].body
        va = v[ba] + np.cross(w[ba], c.position - ks.pos[ba])
        vb = v[bb] + np.cross(w[bb], c.position - ks.pos[bb])
        c.rel_velocity = vb - va


def substep(
    model: CompiledModel,
    state: SimState,
    tau_applied: np.ndarray,
    dt: float,
    params: ContactParams,
    welds: list[WeldConstraint] | None,
    ks: KinState,
    v: np.ndarray,
    w: np.ndarray,
    M: np.ndarray,
    bias: np.ndarray,
) -> tuple[SimState, StepInfo]:
    """One physics substep with the kinematics and dynamics terms precomputed
    (the environment shares them with the controllers)."""
    contacts = detect_contacts(model, ks)
    annotate_contact_velocities(model, ks, v, w, contacts)
    wrenches = contact_forces(contacts, params)
    external: list[ExternalForce] = []
    for cf in wrenches:
        if cf.normal_magnitude <= 0.0 and not np.any(cf.force):
            continue
        ba = model.geoms[model.geom_index[cf.contact.geom_a]].body
        bb = model.geoms[model.geom_index[cf.contact.geom_b]].body
        external.append(ExternalForce(bb, cf.contact.position, cf.force))
        external.append(ExternalForce(ba, cf.contact.position, -cf.force))
    weld_forces = []
    if welds:
        for weld in welds:
            if not weld.active:
                continue
            f, t = weld_wrench(model, ks, v, w, weld)
            pb = ks.pos[weld.body_b]
            external.append(ExternalForce(weld.body_b, pb, f, t))
            external.append(ExternalForce(weld.body_a, pb, -f, -t))
            weld_forces.append((weld, f, t))
    tau = np.asarray(tau_applied, dtype=float) + joint_limit_torques(model, state)
    qddot = forward_dynamics(model, state, tau, external, kin=ks, M=M, bias=bias)
    new_state = integrate(model, state, qddot, dt)
    new_state.last_contacts = contacts
    info = StepInfo(contacts, wrenches, weld_forces, qddot)
    return new_state, info


def step_dynamics(
    model: CompiledModel,
    state: SimState,
    tau_applied: np.ndarray,
    dt: float,
    params: ContactParams | None = None,
    welds: list[WeldConstraint] | None = None,
) -> tuple[SimState, StepInfo]:
    """One physics substep: contacts, welds, limits, dynamics, integration."""
    params = params if params is not None else ContactParams()
    ks = compute_kinematics(model, state.q)
    v, w = body_velocities(model, ks, state.qdot)
    M = mass_matrix_from_kin(model, ks)
    bias = bias_forces_from_kin(model, ks, state.qdot)
    return substep(model, state, tau_applied, dt, params, welds, ks, v, w, M, bias)
