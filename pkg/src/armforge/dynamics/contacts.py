"""Penalty contact detection and force computation.

Narrowphase supports the pairs the scene validator admits: sphere-plane,
sphere-sphere, sphere-box, box-plane, capsule-plane, and box-box (the last
approximated by sampling each box's corners against the other's faces).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import KinState, compute_kinematics
from .model import CompiledModel
from .types import ContactPoint


@dataclass
class ContactParams:
    stiffness: float = 1.0e4      # N/m
    damping: float = 200.0        # N*s/m
    friction: float = 1.0         # global scale on pair friction


@dataclass
class ContactForce:
    """Force applied to geom_b's body at the contact point; geom_a's body
    receives the opposite force at the same point."""

    contact: ContactPoint
    force: np.ndarray             # world, on body of geom_b
    normal_magnitude: float


def _geom_world(ks: KinState, body: int, geom):
    R = ks.R[body] @ geom.offset.rotation_matrix()
    pos = ks.pos[body] + ks.R[body] @ geom.offset.position
    return pos, R


def _pair_friction(ga, gb) -> float:
    return float(np.sqrt(ga.friction * gb.friction))


def _sphere_sphere(pa, ra, pb, rb):
    d = pb - pa
    dist = np.linalg.norm(d)
    depth = ra + rb - dist
    if depth <= 0.0 or dist < 1e-12:
        return None
    n = d / dist
    pos = pa + n * (ra - 0.5 * depth)
    return pos, n, depth


def _sphere_plane(pc, r, p0, n_plane):
    # n_plane is the plane's +z in world; contact if the sphere dips below it
    phi = float(np.dot(n_plane, pc - p0))
    depth = r - phi
    if depth <= 0.0:
        return None
    pos = pc - n_plane * (phi - 0.5 * depth)  # midpoint of the overlap
    return pos, n_plane.copy(), depth


def _point_in_box_depth(p_local, half):
    """Penetration depth and outward face normal for a point inside a box."""
    gaps = half - np.abs(p_local)
    if np.any(gaps < 0.0):
        return None
    k = int(np.argmin(gaps))
    n = np.zeros(3)
    n[k] = np.sign(p_local[k]) if p_local[k] != 0.0 else 1.0
    return float(gaps[k]), n


def _sphere_box(pc, r, pb, Rb, half):
    local = Rb.T @ (pc - pb)
    clamped = np.clip(local, -half, half)
    delta = local - clamped
    dist = np.linalg.norm(delta)
    if dist > 1e-12:
        # sphere center outside the box
        depth = r - dist
        if depth <= 0.0:
            return None
        n_local = delta / dist
        n = Rb @ n_local            # from box surface toward sphere center
        surface = pb + Rb @ clamped
        pos = 0.5 * (surface + (pc - n * r))  # midpoint of the overlap
        return pos, n, depth
    inside = _point_in_box_depth(local, half)
    if inside is None:
        return None
    gap, n_local = inside
    n = Rb @ n_local
    return pc.copy(), n, gap + r


def _box_corners(half):
    hx, hy, hz = half
    return np.array(
        [
            [sx * hx, sy * hy, sz * hz]
            for sx in (-1.0, 1.0)
            for sy in (-1.0, 1.0)
            for sz in (-1.0, 1.0)
        ]
    )


def _box_plane(pb, Rb, half, p0, n_plane):
    out = []
    corners = pb + (_box_corners(half) @ Rb.T)
    for c in corners:
        phi = float(np.dot(n_plane, c - p0))
        if phi <= 0.0:
            depth = -phi
            out.append((c + 0.5 * depth * n_plane, n_plane.copy(), depth))
    return out


def _capsule_plane(pc, Rc, radius, half_len, p0, n_plane):
    out = []
    axis = Rc[:, 2]
    for end in (pc + axis * half_len, pc - axis * half_len):
        hit = _sphere_plane(end, radius, p0, n_plane)
        if hit is not None:
            out.append(hit)
    return out


def _box_box(pa, Ra, ha, pb, Rb, hb):
    """Corner sampling: A's corners against B and B's corners against A.

    Normals always point from the a-geom toward the b-geom (callers fix the
    orientation); here we return them pointing out of the host box.
    """
    out = []
    for corner in pa + (_box_corners(ha) @ Ra.T):
        local = Rb.T @ (corner - pb)
        hit = _point_in_box_depth(local, hb)
        if hit is not None:
            depth, n_local = hit
            # normal out of B at the corner of A: points from B toward A
            out.append((corner.copy(), -(Rb @ n_local), depth))
    for corner in pb + (_box_corners(hb) @ Rb.T):
        local = Ra.T @ (corner - pa)
        hit = _point_in_box_depth(local, ha)
        if hit is not None:
            depth, n_local = hit
            # normal out of A at the corner of B: already points from A toward B
            out.append((corner.copy(), Ra @ n_local, depth))
    return out


def detect_contacts(model: CompiledModel, ks_or_q) -> list[ContactPoint]:
    """Contacts for the current configuration; accepts a KinState or q."""
    ks = ks_or_q if isinstance(ks_or_q, KinState) else compute_kinematics(model, ks_or_q)
    contacts: list[ContactPoint] = []
    for gia, gib in model.collision_pairs:
        ga, gb = model.geoms[gia].geom, model.geoms[gib].geom
        ba, bb = model.geoms[gia].body, model.geoms[gib].body
        pa, Ra = _geom_world(ks, ba, ga)
        pb, Rb = _geom_world(ks, bb, gb)
        mu = _pair_friction(ga, gb)
        sa, sb = ga.shape, gb.shape
        hits = []
        flip = False
        if sa == "sphere" and sb == "sphere":
            hit = _sphere_sphere(pa, ga.size[0], pb, gb.size[0])
            hits = [hit] if hit else []
        elif sa == "sphere" and sb == "plane":
            hit = _sphere_plane(pa, ga.size[0], pb, Rb[:, 2])
            hits = [hit] if hit else []
            flip = True  # sphere-plane helper returns plane-out normal (b->a)
        elif sa == "plane" and sb == "sphere":
            hit = _sphere_plane(pb, gb.size[0], pa, Ra[:, 2])
            hits = [hit] if hit else []
        elif sa == "sphere" and sb == "box":
            hit = _sphere_box(pa, ga.size[0], pb, Rb, np.array(gb.size))
            hits = [hit] if hit else []
            flip = True  # helper normal points box -> sphere
        elif sa == "box" and sb == "sphere":
            hit = _sphere_box(pb, gb.size[0], pa, Ra, np.array(ga.size))
            hits = [hit] if hit else []
        elif sa == "box" and sb == "plane":
            hits = _box_plane(pa, Ra, np.array(ga.size), pb, Rb[:, 2])
            flip = True
        elif sa == "plane" and sb == "box":
            hits = _box_plane(pb, Rb, np.array(gb.size), pa, Ra[:, 2])
        elif sa == "capsule" and sb == "plane":
            hits = _capsule_plane(pa, Ra, ga.size[0], ga.size[1], pb, Rb[:, 2])
            flip = True
        elif sa == "plane" and sb == "capsule":
            hits = _capsule_plane(pb, Rb, gb.size[0], gb.size[1], pa, Ra[:, 2])
        elif sa == "box" and sb == "box":
            hits = _box_box(pa, Ra, np.array(ga.size), pb, Rb, np.array(gb.size))
        hits = [h for h in hits if h is not None]
        weight = 1.0 / len(hits) if hits else 1.0
        for pos, n, depth in hits:
            if flip:
                n = -n
            contacts.append(
                ContactPoint(
                    geom_a=ga.name, geom_b=gb.name, position=pos, normal=n,
                    depth=depth, friction=mu, weight=weight,
                )
            )
    return contacts


def contact_forces(contacts: list[ContactPoint], params: ContactParams) -> list[ContactForce]:
    """Penalty force per contact: spring-damper along the normal (never
    adhesive) plus viscous tangential friction capped by the Coulomb cone."""
    out = []
    for c in contacts:
        sep_rate = float(np.dot(c.rel_velocity, c.normal))
        fn = c.weight * (params.stiffness * c.depth - params.damping * sep_rate)
        if fn <= 0.0:
            out.append(ContactForce(c, np.zeros(3), 0.0))
            continue
        v_t = c.rel_velocity - sep_rate * c.normal
        speed_t = np.linalg.norm(v_t)
        mu = params.friction * c.friction
        f = fn * c.normal
        if speed_t > 1e-9 and mu > 0.0:
            ft = min(c.weight * params.damping * speed_t, mu * fn)
            f = f - (ft / speed_t) * v_t
        out.append(ContactForce(c, f, fn))
    return out
