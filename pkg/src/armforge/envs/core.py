"""The environment runtime: make/reset/step plus sensors and scene manifests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dynamics.algorithms import bias_forces_from_kin, mass_matrix_from_kin
from ..dynamics.contacts import ContactParams
from ..dynamics.kinematics import body_velocities, compute_kinematics, site_pose
from ..dynamics.model import compile_model
from ..dynamics.simulate import substep, weld_attach
from ..dynamics.types import ModelError, Pose
from ..scene.compose import make_task
from .config import PHYSICS_DT, EnvConfig
from .robot import RobotRuntime


class EnvironmentError_(RuntimeError):
    """Environment misuse: stepping before reset, after done, bad actions."""


@dataclass
class StepResult:
    observation: dict
    reward: float
    done: bool
    info: dict = field(default_factory=dict)


# grasp latch engages when a closing gripper's pad midpoint is this close to
# an object's center: the base latch radius plus a fraction of its extent
LATCH_RADIUS = 0.01
LATCH_EXTENT_FRACTION = 0.25


class Environment:
    """One simulated task instance; owned by a single thread at a time."""

    def __init__(self, task, config: EnvConfig):
        self.task = task
        self.config = config
        if len(config.robots) != task.robot_count:
            raise ModelError(
                f"task {task.name!r} needs {task.robot_count} robot(s), got {len(config.robots)}"
            )
        bundle = task.build_scene(config)
        self.scene = bundle
        self.doc = make_task(
            bundle.arena, bundle.robots, bundle.objects,
            name=f"{task.name.lower()}_scene", mounts=bundle.mounts,
        )
        self.model = compile_model(self.doc)
        self.robots = [
            RobotRuntime(self.model, rm, config.controller_for(i))
            for i, rm in enumerate(bundle.robots)
        ]
        self.action_dim = sum(r.action_dim for r in self.robots)
        self.contact_params = ContactParams()
        self.horizon = config.horizon
        self._seed_rng = np.random.default_rng(config.seed)
        self._state = None
        self._step_count = 0
        self._done = False
        self._episode_seed = None
        self._last_info = None
        self._last_qddot = None
        self.sensors = {}
        for robot in self.robots:
            if robot.wrist_site is not None:
                self.sensors[robot.wrist_site] = robot

    # -- episode flow -----------------------------------------------------------

    def reset(self, seed: int | None = None) -> dict:
        if seed is None:
            seed = int(self._seed_rng.integers(0, 2**31 - 1))
        self._episode_seed = int(seed)
        rng = np.random.default_rng(self._episode_seed)
        state = self.model.default_state()
        ks = compute_kinematics(self.model, state.q)
        for robot in self.robots:
            robot.reset(state, ks, posture=robot.ready_posture.copy())
        # task-level randomization: object placement, fixture poses, postures
        self.task.initialize_episode(self, state, rng)
        ks = compute_kinematics(self.model, state.q)
        for robot in self.robots:
            robot.post_reset(state, ks)
        self._state = state
        self._step_count = 0
        self._done = False
        self._last_info = None
        self._last_qddot = np.zeros(self.model.nv)
        return self._observe(ks)

    def step(self, action) -> StepResult:
        if self._state is None:
            raise EnvironmentError_("step before reset")
        if self._done:
            raise EnvironmentError_("episode is done; call reset")
        action = np.asarray(action, dtype=float).reshape(-1)
        if action.shape != (self.action_dim,):
            raise EnvironmentError_(
                f"action has dim {action.shape[0]}, expected {self.action_dim}"
            )
        if not np.all(np.isfinite(action)):
            raise EnvironmentError_("action contains non-finite values")

        state = self._state
        ks = compute_kinematics(self.model, state.q)
        offset = 0
        for robot in self.robots:
            part = action[offset : offset + robot.action_dim]
            offset += robot.action_dim
            ctrl_action, grip_action = robot.split_action(part)
            robot.set_goal(ctrl_action, grip_action, state, ks)

        self._update_latches(state, ks)

        info = None
        for _ in range(self.config.substeps):
            ks = compute_kinematics(self.model, state.q)
            v, w = body_velocities(self.model, ks, state.qdot)
            M = mass_matrix_from_kin(self.model, ks)
            bias = bias_forces_from_kin(self.model, ks, state.qdot)
            tau = np.zeros(self.model.nv)
            for robot in self.robots:
                tau += robot.torques(state, ks, M, bias)
            extra = self.task.passive_torques(self, state)
            if extra is not None:
                tau = tau + extra
            welds = [r.weld for r in self.robots if r.weld is not None]
            state, info = substep(
                self.model, state, tau, PHYSICS_DT, self.contact_params, welds,
                ks, v, w, M, bias,
            )
        self._state = state
        self._last_info = info
        self._last_qddot = info.qddot
        self._step_count += 1
        self._done = self._step_count >= self.horizon

        ks = compute_kinematics(self.model, state.q)
        success = bool(self.task.check_success(self, state, ks))
        if self.config.reward_shaping:
            reward = float(self.task.reward(self, state, ks))
        else:
            reward = 1.0 if success else 0.0
        return StepResult(
            observation=self._observe(ks),
            reward=reward,
            done=self._done,
            info={
                "success": success,
                "grasp_latched": any(r.weld is not None and r.weld.active for r in self.robots),
                "sim_time": state.time,
                "step": self._step_count,
            },
        )

    def _update_latches(self, state, ks) -> None:
        free_objects = [
            (j.name, self.model.body_names[j.body])
            for j in self.model.joint_order
            if j.kind == "free"
        ]
        latched_bodies = {
            self.model.body_names[r.weld.body_b]
            for r in self.robots
            if r.weld is not None and r.weld.active
        }
        for robot in self.robots:
            if robot.weld is not None and robot.opening:
                robot.weld.active = False
                robot.weld = None
            if robot.weld is not None and not robot.weld.active:
                robot.weld = None
            if robot.weld is not None or not robot.closing:
                continue
            mid = robot.pad_midpoint(ks)
            if mid is None:
                continue
            for _, body_name in free_objects:
                if body_name in latched_bodies:
                    continue
                obj = self._object_by_body(body_name)
                radius = LATCH_RADIUS + LATCH_EXTENT_FRACTION * (
                    obj.bounding_radius if obj is not None else 0.0
                )
                weld = weld_attach(
                    self.model, state, robot.mount_body_name(), body_name,
                    latch_radius=radius, anchor_world=mid,
                )
                if weld.active:
                    robot.weld = weld
                    latched_bodies.add(body_name)
                    break

    def _object_by_body(self, body_name: str):
        for obj in self.scene.objects:
            if obj.name == body_name:
                return obj
        return None

    # -- observations --------------------------------------------------------------

    def _observe(self, ks) -> dict:
        state = self._state
        obs = {}
        for i, robot in enumerate(self.robots):
            eef = robot.eef_pose(ks)
            obs[f"robot{i}_joint_pos"] = robot.arm_q(state).copy()
            obs[f"robot{i}_joint_vel"] = robot.arm_qdot(state).copy()
            obs[f"robot{i}_eef_pos"] = eef.position.copy()
            obs[f"robot{i}_eef_quat"] = eef.orientation.copy()
            if robot.gripper is not None and robot.has_gripper_channel:
                obs[f"robot{i}_gripper_qpos"] = robot.gripper_qpos(state).copy()
        if self.config.use_object_obs:
            obs["object-state"] = np.asarray(
                self.task.object_observation(self, state, ks), dtype=float
            )
        return obs

    # -- sensors ---------------------------------------------------------------------

    def get_sensor_measurement(self, name: str) -> np.ndarray:
        """Wrist force-torque reading in the sensor site's local frame.

        Quasi-static external-load measurement: latched payload weight and
        inertial force plus contact forces on the gripper bodies, transported
        to the wrist site (gripper self-weight is compensated away).
        """
        if name not in self.sensors:
            raise KeyError(f"unknown sensor {name!r}")
        if self._state is None:
            raise EnvironmentError_("sensor read before reset")
        robot = self.sensors[name]
        state = self._state
        ks = compute_kinematics(self.model, state.q)
        site = site_pose(self.model, ks, name)
        distal = set()
        stack = [robot.mount_body]
        while stack:
            b = stack.pop()
            distal.add(b)
            for child in range(self.model.nbody):
                if self.model.parent[child] == b:
                    stack.append(child)
        force = np.zeros(3)
        torque = np.zeros(3)
        if robot.weld is not None and robot.weld.active:
            payload = robot.weld.body_b
            distal.add(payload)
            info = self.model.joint_order[0]
            for j in self.model.joint_order:
                if j.body == payload and j.kind == "free":
                    info = j
                    break
            m = self.model.body_mass[payload]
            accel = self._last_qddot[info.vadr : info.vadr + 3]
            com = ks.pos[payload] + ks.R[payload] @ self.model.body_com[payload]
            f = m * (accel - self.model.gravity)
            force += f
            torque += np.cross(com - site.position, f)
        if self._last_info is not None:
            for cf in self._last_info.contact_wrenches:
                ba = self.model.geoms[self.model.geom_index[cf.contact.geom_a]].body
                bb = self.model.geoms[self.model.geom_index[cf.contact.geom_b]].body
                for body, sign in ((bb, 1.0), (ba, -1.0)):
                    if body in distal:
                        force -= sign * cf.force
                        torque -= np.cross(cf.contact.position - site.position, sign * cf.force)
        R = site.rotation_matrix()
        return np.concatenate([R.T @ force, R.T @ torque])

    def check_success(self) -> bool:
        if self._state is None:
            raise EnvironmentError_("success check before reset")
        ks = compute_kinematics(self.model, self._state.q)
        return bool(self.task.check_success(self, self._state, ks))

    # -- scene manifest for clients ------------------------------------------------

    def render_manifest(self) -> dict:
        state = self._state if self._state is not None else self.model.default_state()
        ks = compute_kinematics(self.model, state.q)
        geoms = []
        poses = []
        for gi in self.model.geoms:
            g = gi.geom
            rgba = self.doc.assets.get(g.color, (0.6, 0.6, 0.6, 1.0))
            geoms.append(
                {
                    "name": g.name,
                    "body": self.model.body_names[gi.body],
                    "shape": g.shape,
                    "size": list(g.size),
                    "rgba": list(rgba),
                    "group": g.contact_group,
                }
            )
            world_pos = ks.pos[gi.body] + ks.R[gi.body] @ g.offset.position
            from ..rotations import quat_mul, quat_normalize

            world_quat = quat_normalize(quat_mul(ks.quat[gi.body], g.offset.orientation))
            poses.append(
                {"name": g.name, "position": world_pos.tolist(), "orientation": world_quat.tolist()}
            )
        cameras = [
            {
                "name": c.name,
                "position": c.pose.position.tolist(),
                "orientation": c.pose.orientation.tolist(),
                "fov": c.fov,
                "width": c.width,
                "height": c.height,
            }
            for c in self.doc.cameras
        ]
        return {"geoms": geoms, "cameras": cameras, "poses": poses}

    def geom_poses(self) -> list:
        return self.render_manifest()["poses"]

    # -- misc -------------------------------------------------------------------------

    @property
    def state(self):
        return self._state

    @property
    def sim_time(self) -> float:
        return self._state.time if self._state is not None else 0.0

    @property
    def step_count(self) -> int:
        return self._step_count

    @property
    def done(self) -> bool:
        return self._done

    @property
    def episode_seed(self):
        return self._episode_seed


def make(task_name: str, config: EnvConfig | None = None, **kwargs) -> Environment:
    """Create an environment by task name (see the task registry)."""
    from ..tasks import get_task

    task_cls = get_task(task_name)
    if config is None:
        defaults = dict(kwargs)
        if "robots" not in defaults:
            defaults["robots"] = task_cls.default_robots()
        config = EnvConfig(**defaults)
    elif kwargs:
        raise ValueError("pass either a config object or keyword overrides, not both")
    return Environment(task_cls(), config)
