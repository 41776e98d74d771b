"""Block Stacking: place the small cube on top of the large one and release."""

from __future__ import annotations

import numpy as np

from ..scene.placement import PlacementInitializer, PlacementRegion
from .base import SceneBundle, TaskDefinition, reach_term
from .lift import CUBE_HALF, ROBOT_BASE, TABLE_TOP, make_cube

CUBE_A_HALF = CUBE_HALF          # grasped cube
CUBE_B_HALF = 0.025              # target cube
STACK_GAP_TOL = 0.008            # vertical slack when judging "resting on"


class StackTask(TaskDefinition):
    name = "Stack"
    robot_count = 1

    def build_scene(self, config) -> SceneBundle:
        from ..scene.compose import attach_gripper
        from ..scene.library import load_arena, load_gripper, load_robot

        arena = load_arena("table")
        robot = load_robot(config.robots[0], robot_id=0, base_pose=ROBOT_BASE)
        robot = attach_gripper(robot, load_gripper(config.gripper_for(0, robot.default_gripper)))
        cube_a = make_cube("cubeA", CUBE_A_HALF, "cube_red")
        cube_b = make_cube("cubeB", CUBE_B_HALF, "cube_green")
        regions = {
            "cubeA": config.placement_overrides.get(
                "cubeA",
                PlacementRegion((-0.16, -0.04), (-0.12, 0.0), TABLE_TOP,
                                yaw_range=(-np.pi / 8, np.pi / 8), clearance=0.02),
            ),
            "cubeB": config.placement_overrides.get(
                "cubeB",
                PlacementRegion((-0.16, -0.04), (0.0, 0.12), TABLE_TOP,
                                yaw_range=(-np.pi / 8, np.pi / 8), clearance=0.02),
            ),
        }
        placement = PlacementInitializer(regions)
        support = arena.support_region()
        if support is not None:
            placement.validate_on_surface(support[0], support[1])
        return SceneBundle(
            arena=arena,
            robots=[robot],
            objects=[cube_a, cube_b],
            placement=placement,
            assets={
                "cube_red": (0.85, 0.12, 0.12, 1.0),
                "cube_green": (0.12, 0.7, 0.2, 1.0),
            },
        )

    # -- state helpers ------------------------------------------------------------

    def centers(self, env, ks):
        return ks.pos[env.model.body_index["cubeA"]], ks.pos[env.model.body_index["cubeB"]]

    def _a_latched(self, env) -> bool:
        for robot in env.robots:
            if robot.weld is not None and robot.weld.active:
                if env.model.body_names[robot.weld.body_b] == "cubeA":
                    return True
        return False

    def _a_on_b(self, env, state, ks) -> bool:
        a, b = self.centers(env, ks)
        within_footprint = (
            abs(a[0] - b[0]) < CUBE_B_HALF and abs(a[1] - b[1]) < CUBE_B_HALF
        )
        gap = (a[2] - CUBE_A_HALF) - (b[2] + CUBE_B_HALF)
        resting = abs(gap) < STACK_GAP_TOL
        touching = any(
            {c.geom_a, c.geom_b} == {"cubeA_g0", "cubeB_g0"} for c in state.last_contacts
        )
        return within_footprint and (resting or touching)

    # -- contract -------------------------------------------------------------------

    def check_success(self, env, state, ks) -> bool:
        return self._a_on_b(env, state, ks) and not self._a_latched(env)

    def reward(self, env, state, ks) -> float:
        if self.check_success(env, state, ks):
            return 1.0
        robot = env.robots[0]
        a, b = self.centers(env, ks)
        terms = [0.0]
        mid = robot.pad_midpoint(ks)
        if mid is not None:
            terms.append(0.3 * reach_term(float(np.linalg.norm(mid - a))))
        if self._a_latched(env):
            lifted = np.clip((a[2] - CUBE_A_HALF - TABLE_TOP) / 0.05, 0.0, 1.0)
            terms.append(0.4 + 0.15 * float(lifted))
            # carry toward a point above the target cube
            hover = b + np.array([0.0, 0.0, CUBE_B_HALF + CUBE_A_HALF + 0.02])
            carry = reach_term(float(np.linalg.norm(a - hover)), scale=5.0)
            terms.append(0.55 + 0.35 * float(carry))
        elif self._a_on_b(env, state, ks):
            terms.append(0.95)  # stacked but still held counts below release
        return float(min(max(terms), 1.0))

    def object_observation(self, env, state, ks) -> np.ndarray:
        a, b = self.centers(env, ks)
        qa = ks.quat[env.model.body_index["cubeA"]]
        qb = ks.quat[env.model.body_index["cubeB"]]
        eef = env.robots[0].eef_pose(ks).position
        return np.concatenate([a, qa, b, qb, a - eef, b - a])
