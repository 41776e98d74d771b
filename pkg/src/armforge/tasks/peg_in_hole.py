"""Two Arm Peg-In-Hole: one arm holds the peg, the other the holed board."""

from __future__ import annotations

import numpy as np

from ..dynamics.types import Geom, ModelError, Pose
from ..rotations import quat_from_axis_angle
from ..scene.compose import attach_gripper, compose_generated_object
from ..scene.library import load_arena, load_gripper, load_robot
from .base import SceneBundle, TaskDefinition, reach_term

PEG_RADIUS = 0.015
PEG_HALF_LENGTH = 0.12
HOLE_HALF = 0.035                # square hole half-width
BOARD_HALF_THICK = 0.01
# success tolerances
MAX_PERP_DISTANCE = 0.06
AXIAL_RANGE = (-0.12, 0.14)
MIN_COS_ANGLE = 0.95
ARM_RANDOMIZATION = 0.12         # rad of uniform noise on the ready posture


def make_peg():
    # held rigidly by the arm; rendered but excluded from collision
    peg = compose_generated_object(
        [(Geom("peg_geom", "capsule", (PEG_RADIUS, PEG_HALF_LENGTH),
               contact_group=-1, color="peg_grey"), Pose())],
        "peg",
        density=800.0,
    )
    peg.body.sites["peg_tip"] = Pose((0.0, 0.0, PEG_HALF_LENGTH))
    return peg


def make_board():
    w = HOLE_HALF + 2 * 0.0125   # frame strips around the square hole
    strips = [
        (Geom("board_n", "box", (w, 0.0125, BOARD_HALF_THICK), contact_group=-1, color="board_tan"),
         Pose((0.0, HOLE_HALF + 0.0125, 0.0))),
        (Geom("board_s", "box", (w, 0.0125, BOARD_HALF_THICK), contact_group=-1, color="board_tan"),
         Pose((0.0, -(HOLE_HALF + 0.0125), 0.0))),
        (Geom("board_e", "box", (0.0125, HOLE_HALF, BOARD_HALF_THICK), contact_group=-1, color="board_tan"),
         Pose((HOLE_HALF + 0.0125, 0.0, 0.0))),
        (Geom("board_w", "box", (0.0125, HOLE_HALF, BOARD_HALF_THICK), contact_group=-1, color="board_tan"),
         Pose((-(HOLE_HALF + 0.0125), 0.0, 0.0))),
    ]
    board = compose_generated_object(strips, "board", density=500.0)
    board.body.sites["hole_center"] = Pose()
    return board


class PegInHoleTask(TaskDefinition):
    name = "TwoArmPegInHole"
    robot_count = 2

    def build_scene(self, config) -> SceneBundle:
        arena = load_arena("dual_pedestal")
        r0 = load_robot(config.robots[0], robot_id=0, base_pose=Pose((-0.6, 0.0, 0.8)))
        r1 = load_robot(
            config.robots[1], robot_id=1,
            base_pose=Pose((0.6, 0.0, 0.8), quat_from_axis_angle((0.0, 0.0, np.pi))),
        )
        g0 = config.gripper_for(0, "none")
        g1 = config.gripper_for(1, "none")
        r0 = attach_gripper(r0, load_gripper(g0))
        r1 = attach_gripper(r1, load_gripper(g1))
        peg = make_peg()
        board = make_board()
        # the peg extends along the holder's reach axis; the board faces it
        peg.body.offset = Pose((0.0, 0.0, 0.06))
        board.body.offset = Pose((0.0, 0.0, 0.1))
        return SceneBundle(
            arena=arena,
            robots=[r0, r1],
            objects=[peg, board],
            mounts={"peg": (0, "eef"), "board": (1, "eef")},
            assets={
                "peg_grey": (0.55, 0.55, 0.6, 1.0),
                "board_tan": (0.76, 0.64, 0.4, 1.0),
            },
        )

    def initialize_episode(self, env, state, rng) -> None:
        # the paper's variant randomizes the initial arm configurations
        for robot in env.robots:
            noise = rng.uniform(-ARM_RANDOMIZATION, ARM_RANDOMIZATION, robot.dof)
            state.q[robot.arm_qadrs] = robot.ready_posture + noise

    # -- geometry ------------------------------------------------------------------

    def metrics(self, env, ks) -> dict:
        """Axial coordinate t, perpendicular distance d, and axis alignment."""
        from ..dynamics.kinematics import site_pose

        tip = site_pose(env.model, ks, "peg_tip")
        hole = site_pose(env.model, ks, "hole_center")
        peg_axis = tip.rotation_matrix()[:, 2]
        hole_axis = -hole.rotation_matrix()[:, 2]  # faces the approaching peg
        rel = tip.position - hole.position
        t = float(np.dot(rel, hole_axis))
        d = float(np.linalg.norm(rel - t * hole_axis))
        cos_angle = float(np.dot(peg_axis, hole_axis))
        return {"t": t, "d": d, "cos_angle": cos_angle}

    def check_success(self, env, state, ks) -> bool:
        m = self.metrics(env, ks)
        return (
            m["d"] < MAX_PERP_DISTANCE
            and AXIAL_RANGE[0] <= m["t"] <= AXIAL_RANGE[1]
            and m["cos_angle"] > MIN_COS_ANGLE
        )

    def reward(self, env, state, ks) -> float:
        if self.check_success(env, state, ks):
            return 1.0
        m = self.metrics(env, ks)
        r_d = reach_term(m["d"], scale=5.0)
        band = 0.0
        if m["t"] < AXIAL_RANGE[0]:
            band = AXIAL_RANGE[0] - m["t"]
        elif m["t"] > AXIAL_RANGE[1]:
            band = m["t"] - AXIAL_RANGE[1]
        r_t = reach_term(band, scale=2.0)
        r_cos = max(0.0, m["cos_angle"])
        return float(min(0.35 * r_d + 0.35 * r_t + 0.3 * r_cos, 1.0))

    def object_observation(self, env, state, ks) -> np.ndarray:
        from ..dynamics.kinematics import site_pose

        m = self.metrics(env, ks)
        tip = site_pose(env.model, ks, "peg_tip")
        hole = site_pose(env.model, ks, "hole_center")
        return np.concatenate(
            [
                tip.position,
                hole.position,
                tip.position - hole.position,
                [m["t"], m["d"], m["cos_angle"]],
            ]
        )
