"""Benchmark task registry."""

from .base import SceneBundle, TaskDefinition
from .lift import LiftTask
from .stack import StackTask
from .door import DoorTask
from .peg_in_hole import PegInHoleTask

TASK_REGISTRY = {
    "Lift": LiftTask,
    "Stack": StackTask,
    "Door": DoorTask,
    "TwoArmPegInHole": PegInHoleTask,
}


def get_task(name: str):
    try:
        return TASK_REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown task {name!r}; registered tasks: {sorted(TASK_REGISTRY)}"
        ) from None


__all__ = [
    "DoorTask",
    "LiftTask",
    "PegInHoleTask",
    "SceneBundle",
    "StackTask",
    "TASK_REGISTRY",
    "TaskDefinition",
    "get_task",
]
