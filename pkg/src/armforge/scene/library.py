"""Bundled model library: robots, grippers, arenas, and file-backed objects.

The directory layout is models/{robots,grippers,arenas,objects}; the
environment variable ARMFORGE_MODEL_DIR overrides the bundled directory.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from ..dynamics.types import ModelError, Pose
from .compose import Arena, GripperModel, ObjectModel, RobotModel, object_from_document
from .document import ModelDocument, SceneParseError, parse_model

_PACKAGE_MODELS = Path(__file__).parent / "models"


def model_dir() -> Path:
    override = os.environ.get("ARMFORGE_MODEL_DIR")
    return Path(override) if override else _PACKAGE_MODELS


def load_model(path) -> ModelDocument:
    """Parse a scene file; all document invariants hold on return."""
    path = Path(path)
    if not path.exists():
        raise SceneParseError(f"model file not found: {path}")
    return parse_model(path.read_text(encoding="utf-8"))


def _resolve(category: str, name: str) -> Path:
    p = Path(name)
    if p.suffix:  # explicit path
        return p
    return model_dir() / category / f"{name}.scn.xml"


def _meta_floats(doc: ModelDocument, key: str) -> np.ndarray:
    raw = doc.meta.get(key)
    if raw is None:
        raise ModelError(f"model {doc.name!r} missing meta key {key!r}")
    return np.array([float(v) for v in raw.split()])


def _meta_names(doc: ModelDocument, key: str) -> list:
    raw = doc.meta.get(key)
    if raw is None:
        raise ModelError(f"model {doc.name!r} missing meta key {key!r}")
    return raw.split()


def available_robots() -> list:
    return sorted(p.name.replace(".scn.xml", "") for p in (model_dir() / "robots").glob("*.scn.xml"))


def available_grippers() -> list:
    return sorted(p.name.replace(".scn.xml", "") for p in (model_dir() / "grippers").glob("*.scn.xml"))


def load_robot(name: str, robot_id: int = 0, base_pose: Pose | None = None) -> RobotModel:
    doc = load_model(_resolve("robots", name))
    arm_joints = _meta_names(doc, "arm_joints")
    ready = _meta_floats(doc, "ready_posture")
    if ready.size != len(arm_joints):
        raise ModelError(f"robot {name!r}: ready_posture length != arm joint count")
    eef_site = doc.meta.get("eef_site", "eef")
    doc.find_site(eef_site)
    return RobotModel(
        doc=doc,
        dof=len(arm_joints),
        eef_site=eef_site,
        arm_joints=arm_joints,
        ready_posture=ready,
        default_gripper=doc.meta.get("default_gripper", "parallel_jaw"),
        base_pose=base_pose if base_pose is not None else Pose.identity(),
        robot_id=robot_id,
    )


def load_gripper(name: str) -> GripperModel:
    doc = load_model(_resolve("grippers", name))
    ft_site = doc.meta.get("wrist_ft_site", "wrist_ft")
    doc.find_site(ft_site)
    pads = tuple(doc.meta.get("finger_pad_sites", "").split())
    fingers = tuple(doc.meta.get("finger_joints", "").split())
    actuated = int(doc.meta.get("actuated_dof", "0"))
    for s in pads:
        doc.find_site(s)
    return GripperModel(
        doc=doc,
        actuated_dof=actuated,
        finger_pad_sites=pads,
        wrist_ft_site=ft_site,
        finger_joints=fingers,
        open_position=float(doc.meta.get("open_position", "0.04")),
        closed_position=float(doc.meta.get("closed_position", "0.0")),
    )


def load_arena(name: str) -> Arena:
    return Arena(load_model(_resolve("arenas", name)))


def load_object(name: str) -> ObjectModel:
    return object_from_document(load_model(_resolve("objects", name)))
