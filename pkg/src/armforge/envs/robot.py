"""Runtime binding of one robot instance inside an environment."""

from __future__ import annotations

import numpy as np

from ..controllers import Controller, ControllerError, DynQuantities, gripper_targets
from ..dynamics.kinematics import KinState, site_jacobian, site_pose
from ..dynamics.model import CompiledModel
from ..dynamics.types import Pose, SimState

GRIPPER_SERVO_KP = 600.0
GRIPPER_SERVO_KD = 25.0


class RobotRuntime:
    """Joint bookkeeping, controller, and gripper servo for one robot."""

    def __init__(self, model: CompiledModel, robot_model, controller_config):
        self.model = model
        self.robot_id = robot_model.robot_id
        self.prefix = f"robot{self.robot_id}_"
        self.dof = robot_model.dof
        self.ready_posture = np.asarray(robot_model.ready_posture, dtype=float)
        self.arm_joint_names = [self.prefix + j for j in robot_model.arm_joints]
        infos = [model.joints[j] for j in self.arm_joint_names]
        self.arm_qadrs = np.array([i.qadr for i in infos], dtype=int)
        self.arm_vadrs = np.array([i.vadr for i in infos], dtype=int)
        self.eef_site = self.prefix + robot_model.eef_site
        self.gripper = robot_model.gripper
        self.has_gripper_channel = self.gripper is not None and self.gripper.actuated_dof > 0
        if self.gripper is not None:
            ginfos = [model.joints[j] for j in self.gripper.finger_joints]
            self.finger_qadrs = np.array([i.qadr for i in ginfos], dtype=int)
            self.finger_vadrs = np.array([i.vadr for i in ginfos], dtype=int)
            self.mount_body = model.body_index[f"gripper{self.robot_id}_mount"]
            self.wrist_site = self.gripper.wrist_ft_site
        else:
            self.finger_qadrs = np.array([], dtype=int)
            self.finger_vadrs = np.array([], dtype=int)
            self.mount_body = None
            self.wrist_site = None
        self.controller = Controller(
            controller_config, self.dof, self.arm_vadrs, torque_limits=model.dof_torque_limit
        )
        self.action_dim = self.controller.spec.dim + (1 if self.has_gripper_channel else 0)
        self.last_gripper_action = -1.0
        self.weld = None  # active grasp latch, managed by the environment

    # -- state access ---------------------------------------------------------

    def arm_q(self, state: SimState) -> np.ndarray:
        return state.q[self.arm_qadrs]

    def arm_qdot(self, state: SimState) -> np.ndarray:
        return state.qdot[self.arm_vadrs]

    def eef_pose(self, ks: KinState) -> Pose:
        return site_pose(self.model, ks, self.eef_site)

    def eef_jacobian(self, ks: KinState) -> np.ndarray:
        return site_jacobian(self.model, ks, self.eef_site)

    def gripper_qpos(self, state: SimState) -> np.ndarray:
        return state.q[self.finger_qadrs]

    def pad_midpoint(self, ks: KinState) -> np.ndarray | None:
        if self.gripper is None or not self.gripper.finger_pad_sites:
            return None
        pts = [site_pose(self.model, ks, s).position for s in self.gripper.finger_pad_sites]
        return 0.5 * (pts[0] + pts[1])

    # -- episode flow -----------------------------------------------------------

    def reset(self, state: SimState, ks: KinState, posture: np.ndarray | None = None) -> None:
        if posture is not None:
            state.q[self.arm_qadrs] = posture
        self.last_gripper_action = -1.0
        self.weld = None
        if self.gripper is not None:
            state.q[self.finger_qadrs] = self.gripper.open_position

    def post_reset(self, state: SimState, ks: KinState) -> None:
        """Capture episode-initial pose/posture after all randomization."""
        self.controller.reset(self.eef_pose(ks), self.arm_q(state))

    def split_action(self, action: np.ndarray):
        ctrl = action[: self.controller.spec.dim]
        grip = float(action[self.controller.spec.dim]) if self.has_gripper_channel else None
        return ctrl, grip

    def set_goal(self, ctrl_action, grip_action, state: SimState, ks: KinState) -> None:
        self.controller.set_goal(ctrl_action, self.eef_pose(ks), self.arm_q(state))
        if grip_action is not None:
            self.last_gripper_action = float(np.clip(grip_action, -1.0, 1.0))

    def torques(self, state: SimState, ks: KinState, M, bias) -> np.ndarray:
        dyn = DynQuantities(M=M, J=self.eef_jacobian(ks), bias=bias, qdot=state.qdot)
        tau = self.controller.compute(self.eef_pose(ks), self.arm_q(state), dyn)
        if self.has_gripper_channel:
            targets = gripper_targets(self.gripper, self.last_gripper_action)
            for joint, target in targets.items():
                info = self.model.joints[joint]
                force = GRIPPER_SERVO_KP * (target - state.q[info.qadr]) \
                    - GRIPPER_SERVO_KD * state.qdot[info.vadr]
                limit = self.model.dof_torque_limit[info.vadr]
                tau[info.vadr] += float(np.clip(force, -limit, limit))
        return tau

    # -- grasp latch helpers -------------------------------------------------------

    @property
    def closing(self) -> bool:
        return self.has_gripper_channel and self.last_gripper_action > 0.0

    @property
    def opening(self) -> bool:
        return self.has_gripper_channel and self.last_gripper_action < 0.0

    def mount_body_name(self) -> str:
        if self.mount_body is None:
            raise ControllerError("robot has no gripper mount")
        return self.model.body_names[self.mount_body]
