"""Door Opening: turn the sprung handle, then swing the hinged panel open."""

from __future__ import annotations

import numpy as np

from ..dynamics.types import Pose
from ..rotations import quat_from_axis_angle
from ..scene.compose import attach_gripper
from ..scene.library import load_arena, load_gripper, load_robot
from .base import SceneBundle, TaskDefinition, reach_term
from .lift import ROBOT_BASE

HANDLE_RELEASE_ANGLE = 0.2       # rad the handle must turn before the bolt clears
DOOR_OPEN_ANGLE = 0.3            # rad of hinge swing that counts as open
BOLT_CLEARED_HINGE = 0.15        # past this swing the bolt no longer blocks
LATCH_STIFFNESS = 30.0           # N*m/rad pushing a blocked door shut
DOOR_BASE_X = (0.02, 0.1)        # randomized fixture placement ranges
DOOR_BASE_Y = (0.05, 0.15)
DOOR_BASE_YAW = (-0.12, 0.12)


class DoorTask(TaskDefinition):
    name = "Door"
    robot_count = 1

    def build_scene(self, config) -> SceneBundle:
        arena = load_arena("door")
        robot = load_robot(config.robots[0], robot_id=0, base_pose=ROBOT_BASE)
        robot = attach_gripper(robot, load_gripper(config.gripper_for(0, robot.default_gripper)))
        return SceneBundle(arena=arena, robots=[robot], objects=[])

    def initialize_episode(self, env, state, rng) -> None:
        x = rng.uniform(*DOOR_BASE_X)
        y = rng.uniform(*DOOR_BASE_Y)
        yaw = rng.uniform(*DOOR_BASE_YAW)
        env.model.set_body_offset("door_base", Pose((x, y, 0.0), quat_from_axis_angle((0, 0, yaw))))
        env.model.set_joint_q(state, "door_hinge", 0.0)
        env.model.set_joint_q(state, "door_handle_joint", 0.0)

    def hinge_angle(self, env, state) -> float:
        return float(env.model.joint_q(state, "door_hinge")[0])

    def handle_angle(self, env, state) -> float:
        return float(env.model.joint_q(state, "door_handle_joint")[0])

    def passive_torques(self, env, state) -> np.ndarray | None:
        """Latch bolt: while the handle is not turned and the door sits near
        closed, a stiff spring pushes the hinge back to zero."""
        hinge = self.hinge_angle(env, state)
        handle = self.handle_angle(env, state)
        if handle >= HANDLE_RELEASE_ANGLE or hinge >= BOLT_CLEARED_HINGE:
            return None
        info = env.model.joints["door_hinge"]
        tau = np.zeros(env.model.nv)
        tau[info.vadr] = -LATCH_STIFFNESS * hinge - 1.0 * state.qdot[info.vadr]
        return tau

    def check_success(self, env, state, ks) -> bool:
        return self.hinge_angle(env, state) > DOOR_OPEN_ANGLE

    def reward(self, env, state, ks) -> float:
        if self.check_success(env, state, ks):
            return 1.0
        robot = env.robots[0]
        handle_tip = self._site_pos(env, ks, "handle_tip")
        terms = [0.0]
        mid = robot.pad_midpoint(ks)
        if mid is not None:
            terms.append(0.35 * reach_term(float(np.linalg.norm(mid - handle_tip)), scale=5.0))
        handle_progress = np.clip(self.handle_angle(env, state) / HANDLE_RELEASE_ANGLE, 0.0, 1.0)
        hinge_progress = np.clip(self.hinge_angle(env, state) / DOOR_OPEN_ANGLE, 0.0, 1.0)
        terms.append(0.35 + 0.25 * float(handle_progress))
        if handle_progress >= 1.0 or hinge_progress > 0:
            terms.append(0.6 + 0.4 * float(hinge_progress))
        return float(min(max(terms), 1.0))

    def _site_pos(self, env, ks, name) -> np.ndarray:
        from ..dynamics.kinematics import site_pose

        return site_pose(env.model, ks, name).position

    def object_observation(self, env, state, ks) -> np.ndarray:
        handle_tip = self._site_pos(env, ks, "handle_tip")
        push_point = self._site_pos(env, ks, "panel_push")
        eef = env.robots[0].eef_pose(ks).position
        return np.concatenate(
            [
                handle_tip,
                push_point,
                [self.handle_angle(env, state), self.hinge_angle(env, state)],
                handle_tip - eef,
            ]
        )
