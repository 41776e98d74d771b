"""Modeling layer: compose arenas, robots, grippers, and objects into one scene."""

from .document import (
    Actuator,
    Camera,
    ModelDocument,
    SceneParseError,
    parse_model,
    serialize_model,
)
from .compose import (
    Arena,
    GripperModel,
    ObjectModel,
    RobotModel,
    attach_gripper,
    compose_generated_object,
    make_task,
)
from .placement import PlacementInitializer, PlacementRegion, PlacementError, sample_placements
from .library import (
    load_model,
    load_arena,
    load_gripper,
    load_robot,
    model_dir,
    available_robots,
    available_grippers,
)

__all__ = [
    "Actuator",
    "Arena",
    "Camera",
    "GripperModel",
    "ModelDocument",
    "ObjectModel",
    "PlacementError",
    "PlacementInitializer",
    "PlacementRegion",
    "RobotModel",
    "SceneParseError",
    "attach_gripper",
    "available_grippers",
    "available_robots",
    "compose_generated_object",
    "load_arena",
    "load_gripper",
    "load_model",
    "load_robot",
    "make_task",
    "model_dir",
    "parse_model",
    "sample_placements",
    "serialize_model",
]
