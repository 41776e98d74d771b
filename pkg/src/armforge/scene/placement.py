"""Seeded, non-colliding initial placement of objects on a support surface."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics.types import ModelError, Pose
from ..rotations import quat_from_axis_angle


class PlacementError(RuntimeError):
    """Sampling could not find a valid placement for an object."""


@dataclass
class PlacementRegion:
    """Axis-aligned sampling box on a support surface, with a yaw range and a
    minimum clearance to every other placed object."""

    x_range: tuple
    y_range: tuple
    surface_z: float
    yaw_range: tuple = (0.0, 0.0)
    clearance: float = 0.01

    def __post_init__(self):
        if self.x_range[0] > self.x_range[1] or self.y_range[0] > self.y_range[1]:
            raise ModelError("placement region ranges must satisfy lo <= hi")


@dataclass
class PlacementInitializer:
    regions: dict  # object name -> PlacementRegion
    max_attempts: int = 200

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ModelError("max_attempts must be >= 1")

    def validate_on_surface(self, x_range, y_range) -> None:
        for name, region in self.regions.items():
            if (
                region.x_range[0] < x_range[0]
                or region.x_range[1] > x_range[1]
                or region.y_range[0] < y_range[0]
                or region.y_range[1] > y_range[1]
            ):
                raise ModelError(f"placement region for {name!r} leaves the support surface")


def sample_placements(init: PlacementInitializer, objects, rng_seed) -> dict:
    """Draw a pose for each object; deterministic in (initializer, objects, seed).

    Poses are rejection-sampled so that every pair keeps
    bounding_radius_i + bounding_radius_j + clearance of separation,
    with clearance the larger of the two objects' region clearances.
    """
    rng = np.random.default_rng(rng_seed)
    placed = {}
    radii = {}
    clearances = {}
    for obj in objects:
        region = init.regions.get(obj.name)
        if region is None:
            raise ModelError(f"no placement region for object {obj.name!r}")
        ok = False
        for _ in range(init.max_attempts):
            x = rng.uniform(*region.x_range)
            y = rng.uniform(*region.y_range)
            yaw = rng.uniform(*region.yaw_range)
            valid = True
            for other, pose in placed.items():
                min_sep = radii[other] + obj.bounding_radius + max(
                    clearances[other], region.clearance
                )
                if np.hypot(x - pose.position[0], y - pose.position[1]) < min_sep:
                    valid = False
                    break
            if valid:
                placed[obj.name] = Pose(
                    (x, y, region.surface_z + obj.rest_height),
                    quat_from_axis_angle((0.0, 0.0, yaw)),
                )
                radii[obj.name] = obj.bounding_radius
                clearances[obj.name] = region.clearance
                ok = True
                break
        if not ok:
            raise PlacementError(
                f"could not place object {obj.name!r} after {init.max_attempts} attempts"
            )
    return placed
