"""Task definition interface: scene recipe, rewards, success predicates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..scene.placement import sample_placements


@dataclass
class SceneBundle:
    arena: object
    robots: list
    objects: list
    mounts: dict = field(default_factory=dict)
    placement: object | None = None
    assets: dict = field(default_factory=dict)


class TaskDefinition:
    """Base class for benchmark tasks.

    Rewards are shaped into [0, 1] per step; success predicates are pure
    functions of the simulation state.
    """

    name = "Task"
    robot_count = 1

    @classmethod
    def default_robots(cls):
        return ("panda_class",) * cls.robot_count

    def build_scene(self, config) -> SceneBundle:
        raise NotImplementedError

    def initialize_episode(self, env, state, rng) -> None:
        """Default: drop every free object at a sampled placement."""
        bundle = env.scene
        if bundle.placement is None or not bundle.objects:
            return
        seed = int(rng.integers(0, 2**31 - 1))
        poses = sample_placements(bundle.placement, bundle.objects, seed)
        for obj in bundle.objects:
            if obj.name in poses and obj.name in env.model.body_index:
                if obj.name in bundle.mounts:
                    continue
                env.model.set_free_body_pose(state, obj.name, poses[obj.name])

    def passive_torques(self, env, state) -> np.ndarray | None:
        return None

    def reward(self, env, state, ks) -> float:
        raise NotImplementedError

    def check_success(self, env, state, ks) -> bool:
        raise NotImplementedError

    def object_observation(self, env, state, ks) -> np.ndarray:
        return np.zeros(0)


def reach_term(distance: float, scale: float = 10.0) -> float:
    """Smooth unit-bounded closeness measure used by the shaped rewards."""
    return 1.0 - np.tanh(scale * distance)
