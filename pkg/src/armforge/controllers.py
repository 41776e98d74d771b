"""Torque-level controller suite.

Six controller kinds spanning operational space and joint space, each with
delta-action semantics and optional variable impedance. Rotation deltas are
axis-angle 3-vectors (direction = axis, magnitude = angle in radians); for
the operational-space controllers the axis is taken in the world frame, for
the inverse-kinematics controller in the end-effector frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics.types import Pose
from .rotations import quat_error, quat_from_axis_angle, quat_mul, quat_normalize

KINDS = ("OSC_POSE", "OSC_POSITION", "IK_POSE", "JOINT_POSITION", "JOINT_VELOCITY", "JOINT_TORQUE")
IMPEDANCE_MODES = ("fixed", "variable_kp", "variable")
VARIABLE_IMPEDANCE_KINDS = ("OSC_POSE", "OSC_POSITION", "JOINT_POSITION")

TASK_DIM = 6  # operational-space error: 3 position + 3 orientation axes


class ControllerError(ValueError):
    pass


@dataclass
class ControllerConfig:
    kind: str
    impedance_mode: str = "fixed"
    kp_default: float = None
    kp_bounds: tuple = (0.0, 300.0)
    kd_bounds: tuple = (0.0, 100.0)
    position_scale: float = 0.05     # m per unit input
    rotation_scale: float = 0.5      # rad per unit input
    joint_scale: float = 0.5         # rad per unit input (JOINT_POSITION deltas)
    velocity_scale: float = 1.0      # rad/s per unit input (JOINT_VELOCITY)
    torque_action_limit: float = 50.0  # N*m bound advertised for JOINT_TORQUE specs
    nullspace_kp: float = 10.0
    ik_damping: float = 0.05
    ik_gain: float = 5.0             # 1/s, task error -> desired twist
    task_inertia_damping: float = 1e-6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ControllerError(f"unknown controller kind {self.kind!r}")
        if self.impedance_mode not in IMPEDANCE_MODES:
            raise ControllerError(f"unknown impedance mode {self.impedance_mode!r}")
        if self.impedance_mode != "fixed" and self.kind not in VARIABLE_IMPEDANCE_KINDS:
            raise ControllerError(
                f"{self.kind} supports only fixed impedance, got {self.impedance_mode!r}"
            )
        if self.kp_default is None:
            self.kp_default = {
                "JOINT_POSITION": 50.0,
                "JOINT_VELOCITY": 8.0,  # velocity-error gain
                "IK_POSE": 8.0,         # IK tracks its velocity target with the same law
            }.get(self.kind, 150.0)
        if not (0 <= self.kp_bounds[0] <= self.kp_bounds[1]):
            raise ControllerError("kp bounds must satisfy 0 <= lo <= hi")
        if not (0 <= self.kd_bounds[0] <= self.kd_bounds[1]):
            raise ControllerError("kd bounds must satisfy 0 <= lo <= hi")


@dataclass
class ActionSpec:
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    layout: list  # ordered (segment name, start, size)

    def segment(self, name: str):
        for seg, start, size in self.layout:
            if seg == name:
                return start, size
        raise KeyError(name)


@dataclass
class ControllerGoal:
    kind: str
    target_pos: np.ndarray | None = None
    target_quat: np.ndarray | None = None
    target_qpos: np.ndarray | None = None
    target_qvel: np.ndarray | None = None
    target_tau: np.ndarray | None = None
    kp: np.ndarray = None
    kd: np.ndarray = None


@dataclass
class ControllerState:
    """Per-episode controller memory, captured at reset."""

    initial_orientation: np.ndarray = None  # eef quaternion at episode start
    initial_posture: np.ndarray = None      # arm joint positions at episode start
    goal: ControllerGoal | None = None


def critically_damped_kd(kp) -> np.ndarray:
    """Damping for unit-mass-normalized critically damped error dynamics."""
    return 2.0 * np.sqrt(np.asarray(kp, dtype=float))


def action_spec(config: ControllerConfig, n: int) -> ActionSpec:
    """Action dimensionality and bounds for a controller on an n-dof arm
    (gripper channel not included)."""
    layout = []
    lower = []
    upper = []

    def add(name, size, lo, hi):
        layout.append((name, len(lower), size))
        lower.extend([lo] * size)
        upper.extend([hi] * size)

    kind, mode = config.kind, config.impedance_mode
    if kind == "OSC_POSE":
        add("delta_position", 3, -1.0, 1.0)
        add("delta_rotation", 3, -1.0, 1.0)
    elif kind == "OSC_POSITION":
        add("delta_position", 3, -1.0, 1.0)
    elif kind == "IK_POSE":
        add("delta_position", 3, -1.0, 1.0)
        add("delta_quaternion", 4, -1.0, 1.0)
    elif kind == "JOINT_POSITION":
        add("joint_deltas", n, -1.0, 1.0)
    elif kind == "JOINT_VELOCITY":
        add("joint_velocities", n, -1.0, 1.0)
    elif kind == "JOINT_TORQUE":
        add("joint_torques", n, -config.torque_action_limit, config.torque_action_limit)

    if kind in ("OSC_POSE", "OSC_POSITION"):
        gain_size = TASK_DIM  # stiffness for position and orientation axes
    else:
        gain_size = n
    if mode in ("variable_kp", "variable"):
        add("kp", gain_size, config.kp_bounds[0], config.kp_bounds[1])
    if mode == "variable":
        add("kd", gain_size, config.kd_bounds[0], config.kd_bounds[1])

    return ActionSpec(len(lower), np.array(lower), np.array(upper), layout)


def _unpack_gains(config: ControllerConfig, spec: ActionSpec, action: np.ndarray, n: int):
    gain_size = TASK_DIM if config.kind in ("OSC_POSE", "OSC_POSITION") else n
    if config.impedance_mode == "fixed":
        kp = np.full(gain_size, config.kp_default)
        return kp, critically_damped_kd(kp)
    start, size = spec.segment("kp")
    kp = np.clip(action[start : start + size], config.kp_bounds[0], config.kp_bounds[1])
    if config.impedance_mode == "variable_kp":
        return kp, critically_damped_kd(kp)
    start, size = spec.segment("kd")
    kd = np.clip(action[start : start + size], config.kd_bounds[0], config.kd_bounds[1])
    return kp, kd


def set_goal(
    config: ControllerConfig,
    state: ControllerState,
    action,
    eef_pose: Pose,
    joint_pos: np.ndarray,
) -> ControllerGoal:
    """Interpret an action as a reference goal relative to the current state."""
    n = joint_pos.size
    spec = action_spec(config, n)
    action = np.asarray(action, dtype=float)
    if action.shape != (spec.dim,):
        raise ControllerError(
            f"{config.kind} action has dim {action.shape}, expected ({spec.dim},)"
        )
    if not np.all(np.isfinite(action)):
        raise ControllerError("action contains non-finite values")

    kp, kd = _unpack_gains(config, spec, action, n)
    goal = ControllerGoal(kind=config.kind, kp=kp, kd=kd)
    kind = config.kind

    if kind in ("OSC_POSE", "OSC_POSITION", "IK_POSE"):
        dpos = config.position_scale * np.clip(action[0:3], -1.0, 1.0)
        goal.target_pos = eef_pose.position + dpos
    if kind == "OSC_POSE":
        rotvec = config.rotation_scale * np.clip(action[3:6], -1.0, 1.0)
        # world-frame axis: delta rotation pre-multiplies the current orientation
        goal.target_quat = quat_normalize(
            quat_mul(quat_from_axis_angle(rotvec), eef_pose.orientation)
        )
    elif kind == "OSC_POSITION":
        # orientation held at the episode-initial eef orientation
        goal.target_quat = state.initial_orientation.copy()
    elif kind == "IK_POSE":
        dq = action[3:7]
        norm = np.linalg.norm(dq)
        if norm < 1e-12:
            delta = np.array([1.0, 0.0, 0.0, 0.0])
        else:
            x, y, z, w = dq / norm  # spec order is (q_x, q_y, q_z, q_w)
            delta = np.array([w, x, y, z])
        # end-effector-frame axis: delta rotation post-multiplies
        goal.target_quat = quat_normalize(quat_mul(eef_pose.orientation, delta))
    elif kind == "JOINT_POSITION":
        goal.target_qpos = joint_pos + config.joint_scale * np.clip(action[0:n], -1.0, 1.0)
    elif kind == "JOINT_VELOCITY":
        goal.target_qvel = config.velocity_scale * np.clip(action[0:n], -1.0, 1.0)
    elif kind == "JOINT_TORQUE":
        goal.target_tau = action[0:n].copy()
    state.goal = goal
    return goal


@dataclass
class DynQuantities:
    """Dynamics terms evaluated at the current state, shared per substep."""

    M: np.ndarray          # nv x nv mass matrix
    J: np.ndarray          # 6 x nv end-effector site Jacobian (world frame)
    bias: np.ndarray       # nv bias forces
    qdot: np.ndarray       # nv generalized velocities


def pose_error(goal: ControllerGoal, eef_pose: Pose) -> np.ndarray:
    e = np.zeros(TASK_DIM)
    e[0:3] = goal.target_pos - eef_pose.position
    e[3:6] = quat_error(goal.target_quat, eef_pose.orientation)
    return e


def compute_torques(
    config: ControllerConfig,
    goal: ControllerGoal,
    eef_pose: Pose,
    joint_pos: np.ndarray,
    dyn: DynQuantities,
    arm_dofs,
    state: ControllerState,
    torque_limits: np.ndarray | None = None,
) -> np.ndarray:
    """Translate the active goal into joint torques for the arm dofs.

    Returns a full-nv vector that is zero outside the arm. Every kind adds
    bias compensation for its own dofs; outputs are clamped to the per-joint
    torque limits.
    """
    if goal is None:
        raise ControllerError("no goal set; call set_goal after reset")
    nv = dyn.M.shape[0]
    arm = np.asarray(arm_dofs, dtype=int)
    joint_pos = np.asarray(joint_pos, dtype=float)
    tau = np.zeros(nv)
    kind = config.kind

    if kind in ("OSC_POSE", "OSC_POSITION"):
        J = dyn.J
        e = pose_error(goal, eef_pose)
        v = J @ dyn.qdot
        MinvJT = np.linalg.solve(dyn.M, J.T)             # nv x 6
        lam_inv = J @ MinvJT + config.task_inertia_damping * np.eye(TASK_DIM)
        Lam = np.linalg.inv(lam_inv)
        F = Lam @ (goal.kp * e - goal.kd * v)
        tau += J.T @ F
        # dynamically consistent nullspace keeps a posture without disturbing the task
        Jbar = MinvJT @ Lam                               # nv x 6
        posture = np.zeros(nv)
        kd_null = critically_damped_kd(config.nullspace_kp)
        posture[arm] = (
            config.nullspace_kp * (state.initial_posture - joint_pos) - kd_null * dyn.qdot[arm]
        )
        tau += posture - J.T @ (Jbar.T @ posture)
        tau[arm] += dyn.bias[arm]
    elif kind == "IK_POSE":
        # damped-least-squares joint velocity target, then the velocity law
        J_arm = dyn.J[:, arm]
        e = pose_error(goal, eef_pose)
        A = J_arm @ J_arm.T + (config.ik_damping**2) * np.eye(TASK_DIM)
        qdot_des = J_arm.T @ np.linalg.solve(A, config.ik_gain * e)
        tau[arm] = goal.kp * (qdot_des - dyn.qdot[arm]) + dyn.bias[arm]
    elif kind == "JOINT_POSITION":
        u = np.zeros(nv)
        u[arm] = goal.kp * (goal.target_qpos - joint_pos) - goal.kd * dyn.qdot[arm]
        tau[arm] = (dyn.M @ u)[arm] + dyn.bias[arm]
    elif kind == "JOINT_VELOCITY":
        tau[arm] = goal.kp * (goal.target_qvel - dyn.qdot[arm]) + dyn.bias[arm]
    elif kind == "JOINT_TORQUE":
        tau[arm] = goal.target_tau + dyn.bias[arm]
    else:
        raise ControllerError(f"unhandled controller kind {kind!r}")

    if torque_limits is not None:
        np.clip(tau, -torque_limits, torque_limits, out=tau)
    return tau


class Controller:
    """Runtime binding of a ControllerConfig to one robot's dofs."""

    def __init__(self, config: ControllerConfig, n: int, arm_dofs, torque_limits=None):
        self.config = config
        self.n = n
        self.arm_dofs = np.asarray(arm_dofs, dtype=int)
        self.torque_limits = torque_limits
        self.spec = action_spec(config, n)
        self.state = ControllerState()

    def reset(self, eef_pose: Pose, joint_pos: np.ndarray) -> None:
        self.state = ControllerState(
            initial_orientation=eef_pose.orientation.copy(),
            initial_posture=np.asarray(joint_pos, dtype=float).copy(),
            goal=None,
        )

    def set_goal(self, action, eef_pose: Pose, joint_pos: np.ndarray) -> ControllerGoal:
        return set_goal(self.config, self.state, action, eef_pose, np.asarray(joint_pos))

    def compute(self, eef_pose: Pose, joint_pos: np.ndarray, dyn: DynQuantities) -> np.ndarray:
        return compute_torques(
            self.config, self.state.goal, eef_pose, joint_pos, dyn,
            self.arm_dofs, self.state, self.torque_limits,
        )


def gripper_targets(gripper, a: float):
    """Map the scalar gripper channel to finger joint position targets.

    a = 1 drives the fingers to the closed limit, a = -1 to the open limit,
    values in between interpolate linearly.
    """
    if gripper is None or gripper.actuated_dof == 0:
        raise ControllerError("robot has no actuated gripper channel")
    a = float(np.clip(a, -1.0, 1.0))
    span = gripper.open_position - gripper.closed_position
    target = gripper.closed_position + 0.5 * (1.0 - a) * span
    return {joint: target for joint in gripper.finger_joints}
