"""Shared model-building helpers for the test suite."""

import numpy as np
import pytest

from armforge.dynamics import Body, Geom, Joint, Pose, SpatialInertia, compile_model
from armforge.rotations import quat_from_axis_angle
from armforge.scene.document import ModelDocument


def point_mass(mass, com, eps=1e-14):
    """Near-point-mass inertia: negligible rotational inertia about the COM."""
    return SpatialInertia(mass, com, eps * np.eye(3))


def box_inertia(mass, half):
    hx, hy, hz = half
    I = (
        mass
        / 3.0
        * np.diag([hy * hy + hz * hz, hx * hx + hz * hz, hx * hx + hy * hy])
    )
    return SpatialInertia(mass, (0.0, 0.0, 0.0), I)


def sphere_inertia(mass, r):
    return SpatialInertia(mass, (0.0, 0.0, 0.0), 0.4 * mass * r * r * np.eye(3))


def doc_from_root(name, root):
    return ModelDocument(name, root)


def pendulum_doc(mass=1.0, length=1.0, damping=0.0):
    """Point mass on a 1-DoF hinge; axis -y so that positive angle raises the
    tip and the gravity torque at angle t is +m*g*l*cos(t)."""
    world = Body("world")
    link = Body(
        "link",
        joint=Joint("hinge", "revolute", axis=(0.0, -1.0, 0.0), damping=damping),
        inertia=point_mass(mass, (length, 0.0, 0.0)),
    )
    link.sites["tip"] = Pose((length, 0.0, 0.0))
    world.add_child(link)
    return doc_from_root("pendulum", world)


def double_pendulum_doc(m1=1.3, l1=0.9, m2=0.7, l2=0.6):
    world = Body("world")
    link1 = Body(
        "link1",
        joint=Joint("hinge1", "revolute", axis=(0.0, -1.0, 0.0)),
        inertia=point_mass(m1, (l1, 0.0, 0.0)),
    )
    link2 = Body(
        "link2",
        offset=Pose((l1, 0.0, 0.0)),
        joint=Joint("hinge2", "revolute", axis=(0.0, -1.0, 0.0)),
        inertia=point_mass(m2, (l2, 0.0, 0.0)),
    )
    link2.sites["tip"] = Pose((l2, 0.0, 0.0))
    link1.add_child(link2)
    world.add_child(link1)
    return doc_from_root("double_pendulum", world)


def planar_two_link_doc(l1=1.0, l2=1.0):
    """Two unit links along +x at rest, z-axis hinges, site at the far end."""
    world = Body("world")
    link1 = Body(
        "link1",
        joint=Joint("j1", "revolute", axis=(0.0, 0.0, 1.0)),
        inertia=point_mass(1.0, (l1 / 2, 0.0, 0.0)),
    )
    link2 = Body(
        "link2",
        offset=Pose((l1, 0.0, 0.0)),
        joint=Joint("j2", "revolute", axis=(0.0, 0.0, 1.0)),
        inertia=point_mass(1.0, (l2 / 2, 0.0, 0.0)),
    )
    link2.sites["end"] = Pose((l2, 0.0, 0.0))
    link1.add_child(link2)
    world.add_child(link1)
    return doc_from_root("planar2", world)


def random_inertia(rng, mass_lo=0.5, mass_hi=4.0):
    mass = rng.uniform(mass_lo, mass_hi)
    a = rng.uniform(0.01, 0.1)
    b = rng.uniform(0.01, 0.1)
    c = rng.uniform(abs(a - b) + 0.005, a + b - 0.005)
    principal = np.diag([a, b, c])
    R = _random_rotation(rng)
    return SpatialInertia(mass, rng.uniform(-0.05, 0.05, size=3), R @ principal @ R.T)


def _random_rotation(rng):
    from armforge.rotations import quat_to_matrix, random_quat

    return quat_to_matrix(random_quat(rng))


def random_chain_doc(n=7, seed=0, prismatic_every=0):
    """Random serial chain of revolute (optionally some prismatic) joints."""
    rng = np.random.default_rng(seed)
    world = Body("world")
    parent = world
    for i in range(n):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        kind = "prismatic" if prismatic_every and (i % prismatic_every == 1) else "revolute"
        offset_rot = quat_from_axis_angle(rng.normal(size=3) * 0.3)
        body = Body(
            f"b{i}",
            offset=Pose(rng.uniform(-0.2, 0.2, size=3), offset_rot),
            joint=Joint(f"j{i}", kind, axis=axis, damping=0.0),
            inertia=random_inertia(rng),
        )
        parent = parent.add_child(body)
    parent.sites["tool"] = Pose((0.05, 0.02, 0.1))
    return doc_from_root(f"chain{n}", world)


def free_body_doc(mass=1.0, half=(0.05, 0.05, 0.05), name="brick"):
    world = Body("world")
    body = Body(
        name,
        joint=Joint(f"{name}_free", "free"),
        inertia=box_inertia(mass, half),
        geoms=[Geom(f"{name}_geom", "box", half)],
    )
    world.add_child(body)
    return doc_from_root(name, world)


@pytest.fixture
def pendulum():
    return compile_model(pendulum_doc())


@pytest.fixture
def double_pendulum():
    return compile_model(double_pendulum_doc())


@pytest.fixture
def chain7():
    return compile_model(random_chain_doc(7, seed=3))
