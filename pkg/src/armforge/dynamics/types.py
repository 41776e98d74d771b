"""Domain types shared by the dynamics core and the scene layer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..rotations import (
    QUAT_IDENTITY,
    quat_conj,
    quat_mul,
    quat_normalize,
    quat_rotate,
    quat_to_matrix,
)


class ModelError(ValueError):
    """A model violates a structural or physical invariant."""


def _vec(v, n: int) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (n,):
        raise ModelError(f"expected {n}-vector, got shape {a.shape}")
    return a.copy()


class Pose:
    """Rigid transform: position (m) plus unit quaternion (w, x, y, z).

    The quaternion is normalized on construction; a norm further than 1e-9
    from 1 is rejected rather than silently rescaled.
    """

    __slots__ = ("position", "orientation")

    def __init__(self, position=(0.0, 0.0, 0.0), orientation=QUAT_IDENTITY):
        self.position = _vec(position, 3)
        q = _vec(orientation, 4)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-9:
            raise ModelError(f"quaternion norm {n} too far from 1")
        self.orientation = q / n

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    def compose(self, other: "Pose") -> "Pose":
        """self applied first, then other in self's frame: world_T_child = self * other."""
        return Pose(
            self.position + quat_rotate(self.orientation, other.position),
            quat_normalize(quat_mul(self.orientation, other.orientation)),
        )

    def inverse(self) -> "Pose":
        qi = quat_conj(self.orientation)
        return Pose(-quat_rotate(qi, self.position), qi)

    def transform_point(self, p) -> np.ndarray:
        return self.position + quat_rotate(self.orientation, p)

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.orientation)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Pose)
            and np.array_equal(self.position, other.position)
            and np.array_equal(self.orientation, other.orientation)
        )

    def __repr__(self) -> str:
        return f"Pose(position={self.position.tolist()}, orientation={self.orientation.tolist()})"


class SpatialInertia:
    """Mass properties of a body: mass, center of mass, inertia about the COM.

    The inertia matrix must be symmetric, positive definite, and satisfy the
    triangle inequality on its principal moments.
    """

    __slots__ = ("mass", "center_of_mass", "inertia")

    def __init__(self, mass: float, center_of_mass, inertia):
        if not (mass > 0.0):
            raise ModelError(f"mass must be positive, got {mass}")
        self.mass = float(mass)
        self.center_of_mass = _vec(center_of_mass, 3)
        I = np.asarray(inertia, dtype=float)
        if I.shape != (3, 3):
            raise ModelError(f"inertia must be 3x3, got {I.shape}")
        if np.max(np.abs(I - I.T)) > 1e-12:
            raise ModelError("inertia matrix not symmetric")
        eig = np.linalg.eigvalsh(I)
        if eig[0] <= 0.0:
            raise ModelError(f"inertia matrix not positive definite (eigenvalues {eig})")
        e1, e2, e3 = np.sort(eig)
        if e1 + e2 < e3 - 1e-9 * max(e3, 1.0):
            raise ModelError(f"principal moments violate triangle inequality: {eig}")
        self.inertia = I.copy()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SpatialInertia)
            and self.mass == other.mass
            and np.array_equal(self.center_of_mass, other.center_of_mass)
            and np.array_equal(self.inertia, other.inertia)
        )

    def __repr__(self) -> str:
        return f"SpatialInertia(mass={self.mass})"


JOINT_KINDS = ("revolute", "prismatic", "free", "fixed")

# position / velocity coordinates contributed by each joint kind
JOINT_NQ = {"revolute": 1, "prismatic": 1, "free": 7, "fixed": 0}
JOINT_NV = {"revolute": 1, "prismatic": 1, "free": 6, "fixed": 0}


class Joint:
    """Connection between a body and its parent.

    Revolute and prismatic joints need a unit axis (body frame) and may carry
    position limits, viscous damping, a torque limit for actuation, and an
    optional restoring spring (stiffness toward spring_ref) for passive
    mechanisms such as sprung door handles.
    """

    __slots__ = (
        "name",
        "kind",
        "axis",
        "limits",
        "damping",
        "torque_limit",
        "stiffness",
        "spring_ref",
    )

    def __init__(
        self,
        name: str,
        kind: str,
        axis=None,
        limits=None,
        damping: float = 0.0,
        torque_limit: float | None = None,
        stiffness: float = 0.0,
        spring_ref: float = 0.0,
    ):
        if kind not in JOINT_KINDS:
            raise ModelError(f"joint {name!r}: unknown kind {kind!r}")
        self.name = name
        self.kind = kind
        if kind in ("revolute", "prismatic"):
            if axis is None:
                raise ModelError(f"joint {name!r}: {kind} joint requires an axis")
            a = _vec(axis, 3)
            n = np.linalg.norm(a)
            if abs(n - 1.0) > 1e-9:
                raise ModelError(f"joint {name!r}: axis norm {n} too far from 1")
            self.axis = a / n
        else:
            if axis is not None:
                raise ModelError(f"joint {name!r}: {kind} joint takes no axis")
            self.axis = None
        if limits is not None:
            lo, hi = float(limits[0]), float(limits[1])
            if lo > hi:
                raise ModelError(f"joint {name!r}: limits lo > hi ({lo} > {hi})")
            self.limits = (lo, hi)
        else:
            self.limits = None
        if damping < 0.0:
            raise ModelError(f"joint {name!r}: damping must be >= 0")
        self.damping = float(damping)
        if torque_limit is not None and not (torque_limit > 0.0):
            raise ModelError(f"joint {name!r}: torque_limit must be > 0")
        self.torque_limit = None if torque_limit is None else float(torque_limit)
        self.stiffness = float(stiffness)
        self.spring_ref = float(spring_ref)

    @property
    def nq(self) -> int:
        return JOINT_NQ[self.kind]

    @property
    def nv(self) -> int:
        return JOINT_NV[self.kind]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Joint):
            return False
        axes_equal = (self.axis is None and other.axis is None) or (
            self.axis is not None and other.axis is not None and np.array_equal(self.axis, other.axis)
        )
        return (
            self.name == other.name
            and self.kind == other.kind
            and axes_equal
            and self.limits == other.limits
            and self.damping == other.damping
            and self.torque_limit == other.torque_limit
            and self.stiffness == other.stiffness
            and self.spring_ref == other.spring_ref
        )

    def __repr__(self) -> str:
        return f"Joint({self.name!r}, {self.kind})"


GEOM_SHAPES = ("sphere", "box", "capsule", "plane")

# contact_group semantics: geoms sharing the same positive group never collide
# with each other (one collision family per robot suppresses self-collision);
# group 0 collides with everything; group -1 is visual only.
VISUAL_GROUP = -1


class Geom:
    """Collision/visual primitive attached to a body.

    size per shape: sphere (radius,), box (hx, hy, hz half-extents),
    capsule (radius, half_length along local z), plane () with the surface
    being the local z=0 plane, normal +z.
    """

    __slots__ = ("name", "shape", "size", "offset", "friction", "contact_group", "color")

    def __init__(
        self,
        name: str,
        shape: str,
        size=(),
        offset: Pose | None = None,
        friction: float = 1.0,
        contact_group: int = 0,
        color: str = "default",
    ):
        if shape not in GEOM_SHAPES:
            raise ModelError(f"geom {name!r}: unknown shape {shape!r}")
        self.name = name
        self.shape = shape
        size = tuple(float(s) for s in np.atleast_1d(np.asarray(size, dtype=float))) if len(size) else ()
        expected = {"sphere": 1, "box": 3, "capsule": 2, "plane": 0}[shape]
        if len(size) != expected:
            raise ModelError(f"geom {name!r}: {shape} takes {expected} size parameters, got {len(size)}")
        if any(s <= 0.0 for s in size):
            raise ModelError(f"geom {name!r}: size parameters must be strictly positive")
        self.size = size
        self.offset = offset if offset is not None else Pose.identity()
        if friction < 0.0:
            raise ModelError(f"geom {name!r}: friction must be >= 0")
        self.friction = float(friction)
        self.contact_group = int(contact_group)
        self.color = color

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Geom)
            and self.name == other.name
            and self.shape == other.shape
            and self.size == other.size
            and self.offset == other.offset
            and self.friction == other.friction
            and self.contact_group == other.contact_group
            and self.color == other.color
        )

    def __repr__(self) -> str:
        return f"Geom({self.name!r}, {self.shape})"


@dataclass
class Body:
    """Tree node of a model: a rigid body with its joint to the parent.

    offset is the fixed pose of this body's frame in the parent frame at zero
    joint coordinates; the joint then moves the body about its own origin.
    """

    name: str
    offset: Pose = field(default_factory=Pose.identity)
    joint: Joint | None = None
    inertia: SpatialInertia | None = None
    geoms: list = field(default_factory=list)
    sites: dict = field(default_factory=dict)
    children: list = field(default_factory=list)

    def add_child(self, body: "Body") -> "Body":
        self.children.append(body)
        return body

    def walk(self):
        """Depth-first traversal including self."""
        yield self
        for child in self.children:
            yield from child.walk()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Body)
            and self.name == other.name
            and self.offset == other.offset
            and self.joint == other.joint
            and self.inertia == other.inertia
            and self.geoms == other.geoms
            and self.sites == other.sites
            and self.children == other.children
        )


@dataclass
class ContactPoint:
    """Single contact between two geoms; normal points from geom_a toward geom_b.

    rel_velocity is the world velocity of geom_b's material point minus
    geom_a's at the contact position; it is zero until annotated by the
    stepping pipeline. weight shares the pair's penalty stiffness/damping
    across the points of a multi-point manifold (e.g. the four corners of a
    resting box), so the patch as a whole carries the configured parameters.
    """

    geom_a: str
    geom_b: str
    position: np.ndarray
    normal: np.ndarray
    depth: float
    friction: float = 1.0
    weight: float = 1.0
    rel_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.position = _vec(self.position, 3)
        self.normal = _vec(self.normal, 3)
        n = np.linalg.norm(self.normal)
        if abs(n - 1.0) > 1e-9:
            raise ModelError("contact normal must be unit length")
        if self.depth < 0.0:
            raise ModelError("contact depth must be >= 0")
        self.rel_velocity = _vec(self.rel_velocity, 3)


class SimState:
    """Full dynamic state of an instantiated scene."""

    __slots__ = ("q", "qdot", "time", "last_contacts")

    def __init__(self, q, qdot, time: float = 0.0, last_contacts=None):
        self.q = np.asarray(q, dtype=float).copy()
        self.qdot = np.asarray(qdot, dtype=float).copy()
        self.time = float(time)
        self.last_contacts = list(last_contacts) if last_contacts else []

    def copy(self) -> "SimState":
        return SimState(self.q, self.qdot, self.time, self.last_contacts)

    def __repr__(self) -> str:
        return f"SimState(t={self.time:.4f}, nq={self.q.size}, nv={self.qdot.size})"
