"""Compilation of a scene document into flat arrays for simulation.

Generalized-coordinate layout is depth-first over the body tree; free joints
store position then quaternion (w, x, y, z) in q and world-frame linear then
angular velocity in qdot.
"""

from __future__ import annotations

import numpy as np

from .types import Body, Geom, ModelError, Pose, SimState
from ..rotations import QUAT_IDENTITY, quat_to_matrix

# joint kind codes used in the hot loops
JNT_NONE = 0
JNT_REVOLUTE = 1
JNT_PRISMATIC = 2
JNT_FREE = 3

_KIND_CODE = {"fixed": JNT_NONE, "revolute": JNT_REVOLUTE, "prismatic": JNT_PRISMATIC, "free": JNT_FREE}

GRAVITY = np.array([0.0, 0.0, -9.81])


class JointInfo:
    __slots__ = ("name", "kind", "body", "qadr", "vadr", "nq", "nv", "limits", "damping",
                 "stiffness", "spring_ref", "torque_limit")

    def __init__(self, name, kind, body, qadr, vadr, nq, nv, limits, damping, stiffness,
                 spring_ref, torque_limit):
        self.name = name
        self.kind = kind
        self.body = body
        self.qadr = qadr
        self.vadr = vadr
        self.nq = nq
        self.nv = nv
        self.limits = limits
        self.damping = damping
        self.stiffness = stiffness
        self.spring_ref = spring_ref
        self.torque_limit = torque_limit


class GeomInfo:
    __slots__ = ("geom", "body", "index", "offset_pos", "offset_R", "bound")

    def __init__(self, geom: Geom, body: int, index: int):
        self.geom = geom
        self.body = body
        self.index = index
        self.offset_pos = geom.offset.position
        self.offset_R = quat_to_matrix(geom.offset.orientation)
        if geom.shape == "sphere":
            self.bound = geom.size[0]
        elif geom.shape == "box":
            self.bound = float(np.linalg.norm(geom.size))
        elif geom.shape == "capsule":
            self.bound = geom.size[0] + geom.size[1]
        else:  # plane: unbounded
            self.bound = np.inf


class CompiledModel:
    """Flat-array form of a ModelDocument, ready to simulate."""

    def __init__(self, doc):
        doc.validate()
        self.doc = doc
        self.name = doc.name
        self.gravity = GRAVITY.copy()

        bodies = list(doc.root.walk())
        self.nbody = len(bodies)
        self.body_names = [b.name for b in bodies]
        self.body_index = {b.name: i for i, b in enumerate(bodies)}
        parent_lookup = {}
        for b in bodies:
            for c in b.children:
                parent_lookup[c.name] = b.name
        self.parent = np.array(
            [-1] + [self.body_index[parent_lookup[b.name]] for b in bodies[1:]], dtype=int
        )

        self.offset_pos = np.zeros((self.nbody, 3))
        self.offset_quat = np.tile(QUAT_IDENTITY, (self.nbody, 1))
        self.offset_R = np.tile(np.eye(3), (self.nbody, 1, 1))
        self.jnt_code = np.zeros(self.nbody, dtype=int)
        self.jnt_axis = np.zeros((self.nbody, 3))
        self.jnt_qadr = np.full(self.nbody, -1, dtype=int)
        self.jnt_vadr = np.full(self.nbody, -1, dtype=int)
        self.body_mass = np.zeros(self.nbody)
        self.body_com = np.zeros((self.nbody, 3))
        self.body_inertia = np.zeros((self.nbody, 3, 3))
        self.has_inertia = np.zeros(self.nbody, dtype=bool)

        self.joints: dict[str, JointInfo] = {}
        self.joint_order: list[JointInfo] = []
        self.dof_damping_list = []
        self.dof_names = []

        nq = nv = 0
        for i, b in enumerate(bodies):
            self.offset_pos[i] = b.offset.position
            self.offset_quat[i] = b.offset.orientation
            self.offset_R[i] = quat_to_matrix(b.offset.orientation)
            if b.inertia is not None:
                self.body_mass[i] = b.inertia.mass
                self.body_com[i] = b.inertia.center_of_mass
                self.body_inertia[i] = b.inertia.inertia
                self.has_inertia[i] = True
            j = b.joint
            if j is None or j.kind == "fixed":
                continue
            code = _KIND_CODE[j.kind]
            if code == JNT_FREE:
                if self.parent[i] != 0:
                    raise ModelError(f"free joint {j.name!r} must attach directly to the world")
                if not np.array_equal(b.offset.orientation, QUAT_IDENTITY):
                    raise ModelError(f"free joint {j.name!r} requires an identity-rotation offset")
            self.jnt_code[i] = code
            if j.axis is not None:
                self.jnt_axis[i] = j.axis
            self.jnt_qadr[i] = nq
            self.jnt_vadr[i] = nv
            info = JointInfo(
                j.name, j.kind, i, nq, nv, j.nq, j.nv, j.limits, j.damping, j.stiffness,
                j.spring_ref, j.torque_limit,
            )
            self.joints[j.name] = info
            self.joint_order.append(info)
            self.dof_damping_list.extend([j.damping] * j.nv)
            if j.nv == 1:
                self.dof_names.append(j.name)
            else:
                self.dof_names.extend(f"{j.name}[{k}]" for k in range(j.nv))
            nq += j.nq
            nv += j.nv

        self.nq = nq
        self.nv = nv
        self.dof_damping = np.array(self.dof_damping_list)

        # sites: name -> (body index, local pose)
        self.sites = {}
        for b in bodies:
            for sname, spose in b.sites.items():
                self.sites[sname] = (self.body_index[b.name], spose)

        # geoms in model order
        self.geoms: list[GeomInfo] = []
        geom_by_name = {}
        for b in bodies:
            for g in b.geoms:
                gi = GeomInfo(g, self.body_index[b.name], len(self.geoms))
                self.geoms.append(gi)
                geom_by_name[g.name] = gi
        self.geom_index = {g.geom.name: g.index for g in self.geoms}

        # collision candidate pairs, precomputed once
        self.collision_pairs = [
            (geom_by_name[ga.name].index, geom_by_name[gb.name].index)
            for ga, gb in doc.collidable_geom_pairs()
        ]

        # actuation: per actuator, the dof addresses it drives
        self.actuators = []
        for act in doc.actuators:
            vadrs = []
            for jn in act.joints:
                info = self.joints.get(jn)
                if info is None:
                    raise ModelError(f"actuator joint {jn!r} is not a movable joint")
                if info.nv != 1:
                    raise ModelError(f"actuator joint {jn!r} must be a 1-dof joint")
                vadrs.append(info.vadr)
            self.actuators.append((tuple(vadrs), act.torque_limit))

        # per-dof torque clamp: actuator limit if actuated, else joint torque_limit, else +inf
        self.dof_torque_limit = np.full(self.nv, np.inf)
        for info in self.joint_order:
            if info.torque_limit is not None and info.nv == 1:
                self.dof_torque_limit[info.vadr] = info.torque_limit
        for vadrs, limit in self.actuators:
            for v in vadrs:
                self.dof_torque_limit[v] = limit

    # -- state helpers ------------------------------------------------------

    def default_state(self) -> SimState:
        q = np.zeros(self.nq)
        for info in self.joint_order:
            if info.kind == "free":
                q[info.qadr + 3] = 1.0  # identity quaternion, w first
        return SimState(q, np.zeros(self.nv))

    def joint_q(self, state: SimState, name: str) -> np.ndarray:
        info = self.joints[name]
        return state.q[info.qadr : info.qadr + info.nq]

    def set_joint_q(self, state: SimState, name: str, value) -> None:
        info = self.joints[name]
        state.q[info.qadr : info.qadr + info.nq] = np.asarray(value, dtype=float)

    def set_free_body_pose(self, state: SimState, body_name: str, pose: Pose) -> None:
        body = self.body_index[body_name]
        info = next((j for j in self.joint_order if j.body == body and j.kind == "free"), None)
        if info is None:
            raise ModelError(f"body {body_name!r} has no free joint")
        anchor = self.offset_pos[body]
        state.q[info.qadr : info.qadr + 3] = pose.position - anchor
        state.q[info.qadr + 3 : info.qadr + 7] = pose.orientation

    def set_body_offset(self, body_name: str, pose: Pose) -> None:
        """Relocate a fixture subtree (used to randomize static scenery at reset)."""
        i = self.body_index[body_name]
        self.offset_pos[i] = pose.position
        self.offset_quat[i] = pose.orientation
        self.offset_R[i] = quat_to_matrix(pose.orientation)

    def check_state(self, state: SimState) -> None:
        if state.q.shape != (self.nq,) or state.qdot.shape != (self.nv,):
            raise ModelError(
                f"state dims ({state.q.shape}, {state.qdot.shape}) do not match model "
                f"(nq={self.nq}, nv={self.nv})"
            )
        for info in self.joint_order:
            if info.kind == "free":
                n = np.linalg.norm(state.q[info.qadr + 3 : info.qadr + 7])
                if abs(n - 1.0) > 1e-6:
                    raise ModelError(f"free joint {info.name!r} quaternion norm {n} invalid")


def compile_model(doc) -> CompiledModel:
    return CompiledModel(doc)
