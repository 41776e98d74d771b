"""Block Lifting: raise the cube above the table by a fixed height."""

from __future__ import annotations

import numpy as np

from ..dynamics.types import Geom, Pose
from ..scene.compose import attach_gripper, compose_generated_object
from ..scene.library import load_arena, load_gripper, load_robot
from ..scene.placement import PlacementInitializer, PlacementRegion
from .base import SceneBundle, TaskDefinition, reach_term

TABLE_TOP = 0.8
CUBE_HALF = 0.02
CUBE_DENSITY = 6250.0            # 0.4 kg for the 4 cm cube
LIFT_HEIGHT = 0.04               # cube bottom must clear the table by this much
ROBOT_BASE = Pose((-0.56, 0.0, TABLE_TOP))


def make_cube(name: str, half: float, color: str, density: float = CUBE_DENSITY):
    return compose_generated_object(
        [(Geom(f"{name}_geom", "box", (half,) * 3, friction=1.0, color=color), Pose())],
        name,
        density=density,
    )


class LiftTask(TaskDefinition):
    name = "Lift"
    robot_count = 1

    def build_scene(self, config) -> SceneBundle:
        arena = load_arena("table")
        robot = load_robot(config.robots[0], robot_id=0, base_pose=ROBOT_BASE)
        gripper = load_gripper(config.gripper_for(0, robot.default_gripper))
        robot = attach_gripper(robot, gripper)
        cube = make_cube("cube", CUBE_HALF, "cube_red")
        region = config.placement_overrides.get(
            "cube",
            PlacementRegion((-0.16, -0.02), (-0.1, 0.1), TABLE_TOP, yaw_range=(-np.pi, np.pi)),
        )
        placement = PlacementInitializer({"cube": region})
        support = arena.support_region()
        if support is not None:
            placement.validate_on_surface(support[0], support[1])
        return SceneBundle(
            arena=arena,
            robots=[robot],
            objects=[cube],
            placement=placement,
            assets={"cube_red": (0.85, 0.12, 0.12, 1.0)},
        )

    # -- state helpers -------------------------------------------------------

    def cube_center(self, env, ks) -> np.ndarray:
        return ks.pos[env.model.body_index["cube"]]

    def cube_bottom(self, env, ks) -> float:
        # rest-aligned approximation: center height minus the half size
        return float(self.cube_center(env, ks)[2] - CUBE_HALF)

    # -- contract --------------------------------------------------------------

    def check_success(self, env, state, ks) -> bool:
        return self.cube_bottom(env, ks) >= TABLE_TOP + LIFT_HEIGHT

    def reward(self, env, state, ks) -> float:
        if self.check_success(env, state, ks):
            return 1.0
        robot = env.robots[0]
        cube = self.cube_center(env, ks)
        terms = [0.0]
        mid = robot.pad_midpoint(ks)
        if mid is not None:
            terms.append(0.4 * reach_term(float(np.linalg.norm(mid - cube))))
        latched = robot.weld is not None and robot.weld.active
        if latched:
            progress = np.clip((self.cube_bottom(env, ks) - TABLE_TOP) / LIFT_HEIGHT, 0.0, 1.0)
            terms.append(0.5 + 0.5 * float(progress))
        return float(min(max(terms), 1.0))

    def object_observation(self, env, state, ks) -> np.ndarray:
        robot = env.robots[0]
        cube = self.cube_center(env, ks)
        quat = ks.quat[env.model.body_index["cube"]]
        eef = robot.eef_pose(ks).position
        return np.concatenate([cube, quat, cube - eef])
