"""Contact detection and penalty forces: analytic cases and cone bounds."""

import numpy as np
import pytest

from armforge.dynamics import (
    Body,
    ContactParams,
    ContactPoint,
    Geom,
    Joint,
    ModelError,
    Pose,
    compile_model,
    contact_forces,
    detect_contacts,
    step_dynamics,
)
from armforge.rotations import quat_from_axis_angle
from armforge.scene.document import ModelDocument

from conftest import box_inertia, doc_from_root, sphere_inertia


def _scene(bodies, floor=True):
    world = Body("world")
    if floor:
        world.geoms.append(Geom("floor", "plane", ()))
    for b in bodies:
        world.add_child(b)
    return compile_model(doc_from_root("scene", world))


def _free(name, geom, mass_fn):
    return Body(
        name,
        joint=Joint(f"{name}_free", "free"),
        inertia=mass_fn,
        geoms=[geom],
    )


def test_sphere_above_plane_depth():
    model = _scene([_free("ball", Geom("ball_geom", "sphere", (0.1,)), sphere_inertia(1.0, 0.1))])
    state = model.default_state()
    state.q[2] = 0.05  # center 0.05 above the plane, radius 0.1
    contacts = detect_contacts(model, state.q)
    assert len(contacts) == 1
    c = contacts[0]
    assert c.depth == pytest.approx(0.05, abs=1e-12)
    np.testing.assert_allclose(c.normal, [0, 0, 1])  # floor (a) -> ball (b)
    assert {c.geom_a, c.geom_b} == {"floor", "ball_geom"}


def test_distant_bodies_no_contact():
    a = _free("a", Geom("a_geom", "sphere", (0.1,)), sphere_inertia(1.0, 0.1))
    b = _free("b", Geom("b_geom", "sphere", (0.1,)), sphere_inertia(1.0, 0.1))
    model = _scene([a, b], floor=False)
    state = model.default_state()
    state.q[0:3] = [0, 0, 1.0]
    state.q[7:10] = [1.0, 0, 1.0]  # 1 m apart
    assert detect_contacts(model, state.q) == []


def test_box_resting_exactly_on_plane_zero_depth():
    model = _scene([_free("cube", Geom("cube_geom", "box", (0.02, 0.02, 0.02)), box_inertia(0.4, (0.02,) * 3))])
    state = model.default_state()
    state.q[2] = 0.02  # bottom face exactly on the plane
    contacts = detect_contacts(model, state.q)
    assert len(contacts) == 4  # the four bottom corners
    for c in contacts:
        assert c.depth == pytest.approx(0.0, abs=1e-12)


def test_sphere_sphere_midpoint_contact():
    a = _free("a", Geom("a_geom", "sphere", (0.1,)), sphere_inertia(1.0, 0.1))
    b = _free("b", Geom("b_geom", "sphere", (0.1,)), sphere_inertia(1.0, 0.1))
    model = _scene([a, b], floor=False)
    state = model.default_state()
    state.q[7:10] = [0.15, 0, 0]
    (c,) = detect_contacts(model, state.q)
    assert c.depth == pytest.approx(0.05)
    np.testing.assert_allclose(c.normal, [1, 0, 0])
    np.testing.assert_allclose(c.position, [0.075, 0, 0])


def test_sphere_box_face_contact():
    ball = _free("ball", Geom("ball_geom", "sphere", (0.05,)), sphere_inertia(0.5, 0.05))
    cube = _free("cube", Geom("cube_geom", "box", (0.1, 0.1, 0.1)), box_inertia(1.0, (0.1,) * 3))
    model = _scene([ball, cube], floor=False)
    state = model.default_state()
    state.q[0:3] = [0.0, 0.0, 0.14]  # ball center 0.04 into the top face's radius
    (c,) = detect_contacts(model, state.q)
    assert c.depth == pytest.approx(0.01)
    np.testing.assert_allclose(c.normal, [0, 0, -1])  # a=ball -> b=cube is downward
    assert c.geom_a == "ball_geom"


def test_capsule_plane_two_ends():
    cap = _free("rod", Geom("rod_geom", "capsule", (0.02, 0.1)), sphere_inertia(0.3, 0.05))
    model = _scene([cap])
    state = model.default_state()
    # lying flat: axis along x, center at z = 0.015 -> both end spheres 5 mm deep
    state.q[0:3] = [0, 0, 0.015]
    state.q[3:7] = quat_from_axis_angle((0, np.pi / 2, 0))
    contacts = detect_contacts(model, state.q)
    assert len(contacts) == 2
    for c in contacts:
        assert c.depth == pytest.approx(0.005, abs=1e-9)


def test_box_box_corner_sampling_stack():
    lower = _free("lower", Geom("lower_geom", "box", (0.03, 0.03, 0.03)), box_inertia(1.0, (0.03,) * 3))
    upper = _free("upper", Geom("upper_geom", "box", (0.02, 0.02, 0.02)), box_inertia(0.4, (0.02,) * 3))
    model = _scene([lower, upper], floor=False)
    state = model.default_state()
    state.q[0:3] = [0, 0, 0.03]
    state.q[7:10] = [0, 0, 0.079]  # 1 mm interpenetration with the lower box top
    contacts = detect_contacts(model, state.q)
    assert len(contacts) == 4
    for c in contacts:
        assert c.depth == pytest.approx(0.001, abs=1e-9)
        np.testing.assert_allclose(np.abs(c.normal), [0, 0, 1], atol=1e-12)


def test_unsupported_pair_rejected_at_validation():
    rod = Body(
        "rod",
        joint=Joint("rod_free", "free"),
        inertia=sphere_inertia(0.3, 0.05),
        geoms=[Geom("rod_geom", "capsule", (0.02, 0.1))],
    )
    cube = Body(
        "cube",
        joint=Joint("cube_free", "free"),
        inertia=box_inertia(0.4, (0.02,) * 3),
        geoms=[Geom("cube_geom", "box", (0.02, 0.02, 0.02))],
    )
    world = Body("world")
    world.add_child(rod)
    world.add_child(cube)
    doc = ModelDocument("bad", world)
    with pytest.raises(ModelError, match="capsule/box|box/capsule"):
        doc.validate()


def test_contact_groups_suppress_same_family():
    a = _free("a", Geom("a_geom", "sphere", (0.1,), contact_group=2), sphere_inertia(1.0, 0.1))
    b = _free("b", Geom("b_geom", "sphere", (0.1,), contact_group=2), sphere_inertia(1.0, 0.1))
    model = _scene([a, b], floor=False)
    state = model.default_state()
    state.q[7:10] = [0.05, 0, 0]  # overlapping but same family
    assert detect_contacts(model, state.q) == []


# -- penalty forces -----------------------------------------------------------


def _contact(depth=0.01, rel_velocity=(0, 0, 0), friction=1.0):
    return ContactPoint(
        geom_a="ga", geom_b="gb", position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]),
        depth=depth, friction=friction, rel_velocity=np.array(rel_velocity, dtype=float),
    )


def test_normal_force_formula():
    params = ContactParams(stiffness=1e4, damping=200.0)
    (w,) = contact_forces([_contact(depth=0.01)], params)
    np.testing.assert_allclose(w.force, [0, 0, 100.0])
    assert w.normal_magnitude == pytest.approx(100.0)


def test_fast_separation_yields_no_adhesion():
    params = ContactParams(stiffness=1e4, damping=200.0)
    # separating at 1 m/s: k*d - c*v = 100 - 200 < 0 -> clamped to zero
    (w,) = contact_forces([_contact(depth=0.01, rel_velocity=(0, 0, 1.0))], params)
    np.testing.assert_allclose(w.force, np.zeros(3))


def test_friction_cone_bound():
    params = ContactParams(stiffness=1e4, damping=200.0, friction=0.5)
    (w,) = contact_forces([_contact(depth=0.01, rel_velocity=(5.0, 0, 0), friction=1.0)], params)
    fn = w.force[2]
    ft = np.linalg.norm(w.force[:2])
    assert fn == pytest.approx(100.0)
    assert ft <= 0.5 * fn + 1e-12
    # friction opposes the tangential motion
    assert w.force[0] < 0


def test_resting_cube_settles_on_plane():
    model = _scene([_free("cube", Geom("cube_geom", "box", (0.02,) * 3), box_inertia(0.4, (0.02,) * 3))])
    state = model.default_state()
    state.q[2] = 0.03  # dropped from 1 cm above rest
    for _ in range(1500):
        state, info = step_dynamics(model, state, np.zeros(model.nv), dt=2e-3)
    # settled: resting within a millimeter of the analytic penetration depth
    weight_per_corner = 0.4 * 9.81 / 4
    rest_depth = weight_per_corner / 1e4
    assert abs(state.q[2] - (0.02 - rest_depth)) < 1e-3
    assert np.linalg.norm(state.qdot) < 1e-3
    for w in info.contact_wrenches:
        ft = np.linalg.norm(w.force[:2])
        assert ft <= w.contact.friction * w.normal_magnitude + 1e-9
