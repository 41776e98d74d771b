"""Composition of arenas, robots, grippers, and objects into one task model."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

import numpy as np

from ..dynamics.types import Body, Geom, Joint, ModelError, Pose, SpatialInertia
from ..rotations import quat_rotate, skew
from .document import Actuator, Camera, ModelDocument


@dataclass
class RobotModel:
    """A robot arm chain plus the bookkeeping needed to drive it."""

    doc: ModelDocument
    dof: int
    eef_site: str
    arm_joints: list
    ready_posture: np.ndarray
    default_gripper: str = "parallel_jaw"
    base_pose: Pose = field(default_factory=Pose.identity)
    robot_id: int = 0
    gripper: "GripperModel | None" = None

    def with_base(self, pose: Pose) -> "RobotModel":
        return replace(self, base_pose=pose)


@dataclass
class GripperModel:
    """Gripper fragment attached at a robot's end-effector site."""

    doc: ModelDocument
    actuated_dof: int
    finger_pad_sites: tuple
    wrist_ft_site: str
    finger_joints: tuple = ()
    open_position: float = 0.04
    closed_position: float = 0.0


@dataclass
class ObjectModel:
    """Free-jointed manipulable object (file-backed or generated)."""

    name: str
    body: Body
    bounding_radius: float
    rest_height: float


@dataclass
class Arena:
    """Static workspace fragment: floor, furniture, fixtures, cameras."""

    doc: ModelDocument

    def __post_init__(self):
        for b in self.doc.root.walk():
            if b.joint is not None and b.joint.kind == "free":
                raise ModelError(f"arena body {b.name!r} must not be free-jointed")
        joint_names = {j.name for j in self.doc.joints()}
        for act in self.doc.actuators:
            if any(j in joint_names for j in act.joints):
                raise ModelError("arena must not contain actuated joints")
        if not self.doc.cameras:
            raise ModelError("arena must define at least one camera")

    def support_region(self):
        """(x_range, y_range, z) of the declared support surface, if any."""
        meta = self.doc.meta
        if "support_x" not in meta:
            return None
        xr = tuple(float(v) for v in meta["support_x"].split())
        yr = tuple(float(v) for v in meta["support_y"].split())
        z = float(meta["support_z"])
        return xr, yr, z


# ---------------------------------------------------------------------------
# name prefixing


def _prefix(name: str, prefix: str, skip_prefixes=()) -> str:
    if any(name.startswith(p) for p in skip_prefixes):
        return name
    return prefix + name


def prefix_body_tree(body: Body, prefix: str, skip_prefixes=()) -> None:
    for b in body.walk():
        b.name = _prefix(b.name, prefix, skip_prefixes)
        if b.joint is not None:
            b.joint.name = _prefix(b.joint.name, prefix, skip_prefixes)
        for g in b.geoms:
            g.name = _prefix(g.name, prefix, skip_prefixes)
        b.sites = {_prefix(s, prefix, skip_prefixes): p for s, p in b.sites.items()}


# ---------------------------------------------------------------------------
# gripper attachment


def attach_gripper(robot: RobotModel, gripper: GripperModel) -> RobotModel:
    """Graft a gripper fragment onto the robot's end-effector site.

    Gripper names gain the ``gripper{robot_id}_`` prefix; the fragment is
    re-rooted at the eef site and the gripper actuators join the robot's.
    """
    if robot.gripper is not None:
        raise ModelError(f"robot {robot.robot_id} already has a gripper attached")
    robot = copy.deepcopy(robot)
    gripper = copy.deepcopy(gripper)
    prefix = f"gripper{robot.robot_id}_"
    eef_body, eef_pose = robot.doc.find_site(robot.eef_site)

    roots = gripper.doc.root.children
    if len(roots) != 1:
        raise ModelError("gripper fragment must have a single root body")
    mount = roots[0]
    prefix_body_tree(mount, prefix)
    # re-root: the gripper base sits at the eef site
    mount.offset = eef_pose.compose(mount.offset)
    eef_body.add_child(mount)

    for act in gripper.doc.actuators:
        robot.doc.actuators.append(
            Actuator(tuple(prefix + j for j in act.joints), act.torque_limit)
        )
    robot.doc.assets.update(gripper.doc.assets)
    robot.doc.validate()
    robot.gripper = replace(
        gripper,
        doc=gripper.doc,
        finger_pad_sites=tuple(prefix + s for s in gripper.finger_pad_sites),
        wrist_ft_site=prefix + gripper.wrist_ft_site,
        finger_joints=tuple(prefix + j for j in gripper.finger_joints),
    )
    return robot


# ---------------------------------------------------------------------------
# generated objects


def _primitive_mass_properties(geom: Geom, density: float):
    """(mass, com in object frame, inertia about com, world-aligned) for a solid primitive."""
    R = geom.offset.rotation_matrix()
    if geom.shape == "sphere":
        (r,) = geom.size
        volume = 4.0 / 3.0 * np.pi * r**3
        mass = density * volume
        I = 0.4 * mass * r * r * np.eye(3)
    elif geom.shape == "box":
        hx, hy, hz = geom.size
        volume = 8.0 * hx * hy * hz
        mass = density * volume
        I = mass / 3.0 * np.diag([hy * hy + hz * hz, hx * hx + hz * hz, hx * hx + hy * hy])
    elif geom.shape == "capsule":
        r, h = geom.size
        L = 2.0 * h
        m_cyl = density * np.pi * r * r * L
        m_hemi = density * 2.0 / 3.0 * np.pi * r**3
        mass = m_cyl + 2.0 * m_hemi
        # cylinder about its com
        ixx_cyl = m_cyl * (3 * r * r + L * L) / 12.0
        izz_cyl = 0.5 * m_cyl * r * r
        # hemisphere about its own com, then transported to the capsule com
        z_bar = 3.0 * r / 8.0
        ixx_hemi_com = m_hemi * r * r * (83.0 / 320.0)
        izz_hemi = 0.4 * m_hemi * r * r
        d = h + z_bar
        ixx = ixx_cyl + 2.0 * (ixx_hemi_com + m_hemi * d * d)
        izz = izz_cyl + 2.0 * izz_hemi
        I = np.diag([ixx, ixx, izz])
    else:
        raise ModelError(f"cannot compute inertia for geom shape {geom.shape!r}")
    com = geom.offset.position.copy()
    return mass, com, R @ I @ R.T


def _geom_extent(geom: Geom) -> float:
    if geom.shape == "sphere":
        return geom.size[0]
    if geom.shape == "box":
        return float(np.linalg.norm(geom.size))
    if geom.shape == "capsule":
        return geom.size[0] + geom.size[1]
    return 0.0


def _geom_min_z(geom: Geom) -> float:
    """Lowest point of a primitive at identity object orientation."""
    R = geom.offset.rotation_matrix()
    z0 = geom.offset.position[2]
    if geom.shape == "sphere":
        return z0 - geom.size[0]
    if geom.shape == "box":
        half = np.asarray(geom.size)
        return z0 - float(np.sum(np.abs(R[2, :]) * half))
    if geom.shape == "capsule":
        axis_z = abs(R[2, 2])
        return z0 - geom.size[1] * axis_z - geom.size[0]
    return z0


def compose_generated_object(
    primitives, name: str, density: float | list = 600.0
) -> ObjectModel:
    """Build a free-jointed object from primitive geoms and relative poses.

    The object's inertia is the parallel-axis sum of the solid-primitive
    inertias at the given density (kg/m^3, uniform or per primitive).
    """
    primitives = list(primitives)
    if not primitives:
        raise ModelError("generated object needs at least one primitive")
    densities = (
        list(density) if isinstance(density, (list, tuple)) else [float(density)] * len(primitives)
    )
    if len(densities) != len(primitives):
        raise ModelError("density list length must match primitive count")

    geoms = []
    parts = []
    for i, ((geom, pose), rho) in enumerate(zip(primitives, densities)):
        g = Geom(
            name=f"{name}_g{i}",
            shape=geom.shape,
            size=geom.size,
            offset=pose.compose(geom.offset),
            friction=geom.friction,
            contact_group=geom.contact_group,
            color=geom.color,
        )
        geoms.append(g)
        parts.append(_primitive_mass_properties(g, rho))

    total_mass = sum(m for m, _, _ in parts)
    com = sum(m * c for m, c, _ in parts) / total_mass
    inertia = np.zeros((3, 3))
    for m, c, I in parts:
        d = c - com
        inertia += I + m * (np.dot(d, d) * np.eye(3) - np.outer(d, d))

    body = Body(
        name,
        joint=Joint(f"{name}_free", "free"),
        inertia=SpatialInertia(total_mass, com, inertia),
        geoms=geoms,
    )
    bounding = max(np.linalg.norm(g.offset.position) + _geom_extent(g) for g in geoms)
    rest = -min(_geom_min_z(g) for g in geoms)
    return ObjectModel(name, body, float(bounding), float(rest))


def object_from_document(doc: ModelDocument) -> ObjectModel:
    """Wrap a file-backed object model (single free-jointed root body)."""
    roots = doc.root.children
    if len(roots) != 1:
        raise ModelError("object document must contain exactly one root body")
    body = copy.deepcopy(roots[0])
    if body.joint is None or body.joint.kind != "free":
        raise ModelError(f"object root body {body.name!r} must have a free joint")
    bounding = max(
        (np.linalg.norm(g.offset.position) + _geom_extent(g) for g in body.geoms),
        default=0.05,
    )
    rest = -min((_geom_min_z(g) for g in body.geoms), default=-0.02)
    meta = doc.meta
    if "bounding_radius" in meta:
        bounding = float(meta["bounding_radius"])
    if "rest_height" in meta:
        rest = float(meta["rest_height"])
    return ObjectModel(body.name, body, float(bounding), float(rest))


# ---------------------------------------------------------------------------
# task assembly


def make_task(
    arena: Arena,
    robots: list,
    objects: list,
    name: str = "task",
    mounts: dict | None = None,
    check_base_clearance: bool = True,
) -> ModelDocument:
    """Merge an arena, robots, and objects into a single scene document.

    Robot subtrees get the ``robot{id}_`` prefix (gripper names keep theirs);
    objects keep their own name prefixes. ``mounts`` may map an object name to
    (robot index, site name) to rigidly attach it to that robot instead of
    dropping it in as a free body.
    """
    if not robots:
        raise ModelError("a task needs at least one robot")
    ids = [r.robot_id for r in robots]
    if sorted(ids) != list(range(len(robots))):
        raise ModelError(f"robot ids must be dense from 0, got {ids}")
    mounts = dict(mounts or {})

    doc = ModelDocument(name)
    arena_doc = copy.deepcopy(arena.doc)
    doc.root.geoms = arena_doc.root.geoms
    doc.root.sites = arena_doc.root.sites
    for child in arena_doc.root.children:
        doc.root.add_child(child)
    doc.cameras.extend(arena_doc.cameras)
    doc.assets.update(arena_doc.assets)
    doc.meta.update(arena_doc.meta)

    site_lookup = {}
    for robot in robots:
        rdoc = copy.deepcopy(robot.doc)
        prefix = f"robot{robot.robot_id}_"
        roots = rdoc.root.children
        if len(roots) != 1:
            raise ModelError("robot fragment must have a single root body")
        base = roots[0]
        prefix_body_tree(base, prefix, skip_prefixes=("gripper",))
        base.offset = robot.base_pose.compose(base.offset)
        doc.root.add_child(base)
        for act in rdoc.actuators:
            doc.actuators.append(
                Actuator(
                    tuple(_prefix(j, prefix, ("gripper",)) for j in act.joints),
                    act.torque_limit,
                )
            )
        doc.assets.update(rdoc.assets)
        doc.cameras.extend(rdoc.cameras)

    for i, robot in enumerate(robots):
        prefix = f"robot{robot.robot_id}_"
        site_lookup[i] = prefix

    for obj in objects:
        body = copy.deepcopy(obj.body)
        if obj.name in mounts:
            robot_index, site = mounts[obj.name]
            site_name = _prefix(site, f"robot{robots[robot_index].robot_id}_", ("gripper",))
            try:
                host, site_pose = doc.find_site(site_name)
            except ModelError:
                host, site_pose = doc.find_site(site)
            body.joint = None  # rigid mount replaces the free joint
            body.offset = site_pose.compose(body.offset)
            host.add_child(body)
        else:
            doc.root.add_child(body)

    try:
        doc.validate()
    except ModelError as e:
        raise ModelError(f"task composition failed: {e}") from e

    if check_base_clearance:
        _check_rest_clearance(doc, robots)
    return doc


def _check_rest_clearance(doc: ModelDocument, robots):
    """Reject robot bases that interpenetrate arena statics at the ready posture."""
    from ..dynamics.contacts import detect_contacts
    from ..dynamics.model import compile_model

    model = compile_model(doc)
    state = model.default_state()
    for robot in robots:
        prefix = f"robot{robot.robot_id}_"
        for jname, qval in zip(robot.arm_joints, robot.ready_posture):
            model.set_joint_q(state, prefix + jname, qval)
    robot_geoms = {
        g.geom.name
        for g in model.geoms
        if model.body_names[g.body].startswith(("robot", "gripper"))
    }
    for c in detect_contacts(model, state.q):
        involved = {c.geom_a, c.geom_b}
        if involved & robot_geoms and c.depth > 5e-3:
            raise ModelError(
                f"robot placement collides with the scene: {c.geom_a} vs {c.geom_b} "
                f"(depth {c.depth:.3f} m)"
            )
