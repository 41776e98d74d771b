"""Declarative scene description and its text serialization.

The on-disk format is an XML element tree (extension ``.scn.xml``); the exact
grammar is documented in docs/scene_format.md. Floats are written with
``repr`` so that parse(serialize(doc)) reproduces every value bit-exactly.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from ..dynamics.types import Body, Geom, Joint, ModelError, Pose, SpatialInertia

# shape pairs the narrowphase supports; anything else is a load-time error
SUPPORTED_SHAPE_PAIRS = frozenset(
    frozenset(p)
    for p in [
        ("sphere", "plane"),
        ("sphere", "sphere"),
        ("sphere", "box"),
        ("box", "plane"),
        ("capsule", "plane"),
        ("box", "box"),
    ]
)


class SceneParseError(ModelError):
    """Scene text failed to parse or violated the schema."""


@dataclass
class Actuator:
    """Torque source driving one joint, or several coupled symmetrically
    (a parallel-jaw gripper is one actuator over both finger joints)."""

    joints: tuple
    torque_limit: float

    def __post_init__(self):
        if isinstance(self.joints, str):
            self.joints = (self.joints,)
        self.joints = tuple(self.joints)
        if not self.joints:
            raise ModelError("actuator must drive at least one joint")
        if not (self.torque_limit > 0.0):
            raise ModelError("actuator torque_limit must be > 0")
        self.torque_limit = float(self.torque_limit)


@dataclass
class Camera:
    """Named viewpoint: pose (camera looks along its local -z, +y up),
    vertical field of view in degrees, and default image resolution."""

    name: str
    pose: Pose
    fov: float = 45.0
    width: int = 640
    height: int = 480


class ModelDocument:
    """Complete declarative scene: body tree, actuators, cameras, assets."""

    def __init__(self, name: str, root: Body | None = None, actuators=None, cameras=None,
                 assets=None, meta=None):
        self.name = name
        self.root = root if root is not None else Body("world")
        self.actuators: list[Actuator] = list(actuators) if actuators else []
        self.cameras: list[Camera] = list(cameras) if cameras else []
        self.assets: dict[str, tuple] = dict(assets) if assets else {}
        self.meta: dict[str, str] = dict(meta) if meta else {}

    def bodies(self):
        return list(self.root.walk())

    def find_body(self, name: str) -> Body:
        for b in self.root.walk():
            if b.name == name:
                return b
        raise ModelError(f"no body named {name!r}")

    def find_site(self, name: str):
        """Return (body, site pose in body frame)."""
        for b in self.root.walk():
            if name in b.sites:
                return b, b.sites[name]
        raise ModelError(f"no site named {name!r}")

    def joints(self):
        return [b.joint for b in self.root.walk() if b.joint is not None]

    def all_names(self):
        names = []
        for b in self.root.walk():
            names.append(b.name)
            if b.joint is not None:
                names.append(b.joint.name)
            names.extend(g.name for g in b.geoms)
            names.extend(b.sites.keys())
        return names

    def validate(self) -> None:
        """Check every document invariant; raises ModelError naming the offender."""
        if self.root.joint is not None or self.root.inertia is not None:
            raise ModelError("worldbody must have no joint and no inertia")
        names = self.all_names()
        seen = set()
        for n in names:
            if n in seen:
                raise ModelError(f"duplicate name {n!r}")
            seen.add(n)
        joint_names = {j.name for j in self.joints()}
        for act in self.actuators:
            for jn in act.joints:
                if jn not in joint_names:
                    raise ModelError(f"actuator references unknown joint {jn!r}")
        # moving bodies must carry valid inertia
        for body, moving in self._walk_with_motion():
            if body is self.root:
                continue
            if moving and body.inertia is None:
                raise ModelError(f"moving body {body.name!r} has no inertia")
        self._validate_contact_pairs()

    def _walk_with_motion(self):
        """Yield (body, moving) where moving means some non-fixed joint sits
        between the body and the world."""
        out = []

        def rec(body: Body, moving: bool):
            if body.joint is not None and body.joint.kind != "fixed":
                moving = True
            out.append((body, moving))
            for c in body.children:
                rec(c, moving)

        rec(self.root, False)
        return out

    def collidable_geom_pairs(self):
        """Geom pairs the narrowphase will test.

        Excluded: same body, adjacent articulated bodies (parent-child below
        the worldbody), visual-only geoms (group -1), geoms sharing a positive
        contact group, and pairs where neither body can move.
        """
        entries = []  # (body, geom, moving)
        parent_of = {}

        def rec(body: Body, parent: Body | None, moving: bool):
            if body.joint is not None and body.joint.kind != "fixed":
                moving = True
            # world-rooted bodies are not "adjacent" to the world's geoms
            parent_of[body.name] = parent.name if parent is not None and parent is not self.root else None
            for g in body.geoms:
                if g.contact_group >= 0:
                    entries.append((body.name, g, moving))
            for c in body.children:
                rec(c, body, moving)

        rec(self.root, None, False)
        pairs = []
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                ba, ga, ma = entries[i]
                bb, gb, mb = entries[j]
                if ba == bb:
                    continue
                if parent_of.get(ba) == bb or parent_of.get(bb) == ba:
                    continue
                if ga.contact_group > 0 and ga.contact_group == gb.contact_group:
                    continue
                if not (ma or mb):
                    continue
                pairs.append((ga, gb))
        return pairs

    def _validate_contact_pairs(self):
        for ga, gb in self.collidable_geom_pairs():
            key = frozenset((ga.shape, gb.shape))
            if key not in SUPPORTED_SHAPE_PAIRS:
                raise ModelError(
                    f"unsupported contact pair {ga.shape}/{gb.shape} "
                    f"between geoms {ga.name!r} and {gb.name!r}"
                )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModelDocument)
            and self.name == other.name
            and self.root == other.root
            and self.actuators == other.actuators
            and self.cameras == other.cameras
            and self.assets == other.assets
            and self.meta == other.meta
        )


# ---------------------------------------------------------------------------
# serialization


def _fmt_vec(v) -> str:
    return " ".join(repr(float(x)) for x in np.asarray(v).reshape(-1))


def _fmt_inertia(I: np.ndarray) -> str:
    return _fmt_vec([I[0, 0], I[1, 1], I[2, 2], I[0, 1], I[0, 2], I[1, 2]])


def _pose_attrs(el: ET.Element, pose: Pose) -> None:
    el.set("pos", _fmt_vec(pose.position))
    el.set("quat", _fmt_vec(pose.orientation))


def _body_to_xml(body: Body, parent_el: ET.Element) -> None:
    el = ET.SubElement(parent_el, "body", name=body.name)
    _pose_attrs(el, body.offset)
    if body.inertia is not None:
        inertial = ET.SubElement(el, "inertial")
        inertial.set("mass", repr(body.inertia.mass))
        inertial.set("com", _fmt_vec(body.inertia.center_of_mass))
        inertial.set("fullinertia", _fmt_inertia(body.inertia.inertia))
    if body.joint is not None:
        j = body.joint
        jel = ET.SubElement(el, "joint", name=j.name, kind=j.kind)
        if j.axis is not None:
            jel.set("axis", _fmt_vec(j.axis))
        if j.limits is not None:
            jel.set("range", _fmt_vec(j.limits))
        if j.damping:
            jel.set("damping", repr(j.damping))
        if j.torque_limit is not None:
            jel.set("torque_limit", repr(j.torque_limit))
        if j.stiffness:
            jel.set("stiffness", repr(j.stiffness))
            jel.set("springref", repr(j.spring_ref))
    for g in body.geoms:
        gel = ET.SubElement(el, "geom", name=g.name, shape=g.shape)
        if g.size:
            gel.set("size", _fmt_vec(g.size))
        _pose_attrs(gel, g.offset)
        gel.set("friction", repr(g.friction))
        gel.set("group", str(g.contact_group))
        gel.set("color", g.color)
    for name, pose in body.sites.items():
        sel = ET.SubElement(el, "site", name=name)
        _pose_attrs(sel, pose)
    for child in body.children:
        _body_to_xml(child, el)


def serialize_model(doc: ModelDocument) -> str:
    root = ET.Element("model", name=doc.name)
    for k, v in doc.meta.items():
        ET.SubElement(root, "meta", key=k, value=v)
    for name, rgba in doc.assets.items():
        ET.SubElement(root, "asset", name=name, rgba=_fmt_vec(rgba))
    world = ET.SubElement(root, "worldbody")
    for g in doc.root.geoms:
        gel = ET.SubElement(world, "geom", name=g.name, shape=g.shape)
        if g.size:
            gel.set("size", _fmt_vec(g.size))
        _pose_attrs(gel, g.offset)
        gel.set("friction", repr(g.friction))
        gel.set("group", str(g.contact_group))
        gel.set("color", g.color)
    for name, pose in doc.root.sites.items():
        sel = ET.SubElement(world, "site", name=name)
        _pose_attrs(sel, pose)
    for child in doc.root.children:
        _body_to_xml(child, world)
    for act in doc.actuators:
        ET.SubElement(
            root, "actuator", joints=" ".join(act.joints), torque_limit=repr(act.torque_limit)
        )
    for cam in doc.cameras:
        cel = ET.SubElement(root, "camera", name=cam.name)
        _pose_attrs(cel, cam.pose)
        cel.set("fov", repr(cam.fov))
        cel.set("width", str(cam.width))
        cel.set("height", str(cam.height))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


# ---------------------------------------------------------------------------
# parsing


def _parse_vec(el: ET.Element, attr: str, n: int, default=None) -> np.ndarray:
    raw = el.get(attr)
    if raw is None:
        if default is not None:
            return np.asarray(default, dtype=float)
        raise SceneParseError(f"<{el.tag} name={el.get('name')!r}>: missing attribute {attr!r}")
    try:
        v = np.array([float(x) for x in raw.split()])
    except ValueError as e:
        raise SceneParseError(f"<{el.tag}> attribute {attr!r}: {e}") from e
    if v.size != n:
        raise SceneParseError(
            f"<{el.tag} name={el.get('name')!r}>: attribute {attr!r} needs {n} values, got {v.size}"
        )
    return v


def _parse_pose(el: ET.Element) -> Pose:
    pos = _parse_vec(el, "pos", 3, default=(0.0, 0.0, 0.0))
    quat = _parse_vec(el, "quat", 4, default=(1.0, 0.0, 0.0, 0.0))
    try:
        return Pose(pos, quat)
    except ModelError as e:
        raise SceneParseError(f"<{el.tag} name={el.get('name')!r}>: {e}") from e


def _parse_float(el: ET.Element, attr: str, default=None):
    raw = el.get(attr)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as e:
        raise SceneParseError(f"<{el.tag} name={el.get('name')!r}> attribute {attr!r}: {e}") from e


def _parse_geom(el: ET.Element, body_name: str, index: int) -> Geom:
    shape = el.get("shape")
    if shape is None:
        raise SceneParseError(f"geom in body {body_name!r}: missing shape")
    nsize = {"sphere": 1, "box": 3, "capsule": 2, "plane": 0}.get(shape)
    if nsize is None:
        raise SceneParseError(f"geom in body {body_name!r}: unknown shape {shape!r}")
    size = _parse_vec(el, "size", nsize, default=()) if nsize else ()
    try:
        return Geom(
            name=el.get("name", f"{body_name}_g{index}"),
            shape=shape,
            size=size,
            offset=_parse_pose(el),
            friction=_parse_float(el, "friction", 1.0),
            contact_group=int(el.get("group", "0")),
            color=el.get("color", "default"),
        )
    except ModelError as e:
        raise SceneParseError(f"geom {el.get('name')!r} in body {body_name!r}: {e}") from e


def _parse_body(el: ET.Element) -> Body:
    name = el.get("name")
    if not name:
        raise SceneParseError("body element missing name")
    body = Body(name, offset=_parse_pose(el))
    geom_index = 0
    for child in el:
        if child.tag == "inertial":
            mass = _parse_float(child, "mass")
            if mass is None:
                raise SceneParseError(f"body {name!r}: inertial missing mass")
            com = _parse_vec(child, "com", 3, default=(0.0, 0.0, 0.0))
            ivals = _parse_vec(child, "fullinertia", 6)
            I = np.array(
                [
                    [ivals[0], ivals[3], ivals[4]],
                    [ivals[3], ivals[1], ivals[5]],
                    [ivals[4], ivals[5], ivals[2]],
                ]
            )
            try:
                body.inertia = SpatialInertia(mass, com, I)
            except ModelError as e:
                raise SceneParseError(f"body {name!r}: {e}") from e
        elif child.tag == "joint":
            if body.joint is not None:
                raise SceneParseError(f"body {name!r}: more than one joint")
            jname = child.get("name")
            if not jname:
                raise SceneParseError(f"body {name!r}: joint missing name")
            kind = child.get("kind")
            try:
                axis = child.get("axis")
                rng = child.get("range")
                body.joint = Joint(
                    jname,
                    kind,
                    axis=None if axis is None else _parse_vec(child, "axis", 3),
                    limits=None if rng is None else tuple(_parse_vec(child, "range", 2)),
                    damping=_parse_float(child, "damping", 0.0),
                    torque_limit=_parse_float(child, "torque_limit", None),
                    stiffness=_parse_float(child, "stiffness", 0.0),
                    spring_ref=_parse_float(child, "springref", 0.0),
                )
            except ModelError as e:
                raise SceneParseError(f"joint {jname!r}: {e}") from e
        elif child.tag == "geom":
            body.geoms.append(_parse_geom(child, name, geom_index))
            geom_index += 1
        elif child.tag == "site":
            sname = child.get("name")
            if not sname:
                raise SceneParseError(f"body {name!r}: site missing name")
            body.sites[sname] = _parse_pose(child)
        elif child.tag == "body":
            body.add_child(_parse_body(child))
        else:
            raise SceneParseError(f"body {name!r}: unknown element <{child.tag}>")
    return body


def parse_model(text: str) -> ModelDocument:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        line, col = e.position
        raise SceneParseError(f"scene text parse error at line {line}, column {col}: {e.msg}") from e
    if root.tag != "model":
        raise SceneParseError(f"root element must be <model>, got <{root.tag}>")
    doc = ModelDocument(root.get("name", "unnamed"))
    world_el = None
    geom_index = 0
    for child in root:
        if child.tag == "meta":
            doc.meta[child.get("key")] = child.get("value", "")
        elif child.tag == "asset":
            doc.assets[child.get("name")] = tuple(_parse_vec(child, "rgba", 4))
        elif child.tag == "worldbody":
            if world_el is not None:
                raise SceneParseError("more than one <worldbody>")
            world_el = child
            for sub in child:
                if sub.tag == "body":
                    doc.root.add_child(_parse_body(sub))
                elif sub.tag == "geom":
                    doc.root.geoms.append(_parse_geom(sub, "world", geom_index))
                    geom_index += 1
                elif sub.tag == "site":
                    doc.root.sites[sub.get("name")] = _parse_pose(sub)
                else:
                    raise SceneParseError(f"worldbody: unknown element <{sub.tag}>")
        elif child.tag == "actuator":
            joints = tuple((child.get("joints") or "").split())
            if not joints:
                raise SceneParseError("actuator missing joints")
            limit = _parse_float(child, "torque_limit")
            if limit is None:
                raise SceneParseError(f"actuator for {joints}: missing torque_limit")
            try:
                doc.actuators.append(Actuator(joints, limit))
            except ModelError as e:
                raise SceneParseError(str(e)) from e
        elif child.tag == "camera":
            doc.cameras.append(
                Camera(
                    name=child.get("name", f"camera{len(doc.cameras)}"),
                    pose=_parse_pose(child),
                    fov=_parse_float(child, "fov", 45.0),
                    width=int(child.get("width", "640")),
                    height=int(child.get("height", "480")),
                )
            )
        else:
            raise SceneParseError(f"unknown top-level element <{child.tag}>")
    if world_el is None:
        raise SceneParseError("model has no <worldbody>")
    try:
        doc.validate()
    except SceneParseError:
        raise
    except ModelError as e:
        raise SceneParseError(str(e)) from e
    return doc
