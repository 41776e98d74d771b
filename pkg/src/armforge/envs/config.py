"""Environment configuration and the shared key-value config file format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..controllers import ControllerConfig

PHYSICS_RATE = 500.0  # Hz, fixed
PHYSICS_DT = 1.0 / PHYSICS_RATE


class UnsupportedFeatureError(ValueError):
    pass


@dataclass
class EnvConfig:
    robots: tuple = ("panda_class",)
    gripper_types: tuple | None = None          # per robot; None selects defaults
    controller_configs: tuple | None = None     # per robot; None selects OSC_POSE fixed
    control_freq: float = 20.0
    horizon: int = 500
    reward_shaping: bool = True
    use_object_obs: bool = True
    use_camera_obs: bool = False                 # accepted but must stay False
    seed: int = 0
    placement_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.robots, str):
            self.robots = (self.robots,)
        self.robots = tuple(self.robots)
        if not self.robots:
            raise ValueError("config needs at least one robot")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.control_freq <= 0 or PHYSICS_RATE % self.control_freq != 0:
            raise ValueError(
                f"control_freq must divide the {PHYSICS_RATE:.0f} Hz physics rate"
            )
        if self.use_camera_obs:
            raise UnsupportedFeatureError(
                "use_camera_obs is not supported by the core; rendering lives in the UI"
            )
        if self.gripper_types is not None:
            if isinstance(self.gripper_types, str):
                self.gripper_types = (self.gripper_types,)
            self.gripper_types = tuple(self.gripper_types)
            if len(self.gripper_types) != len(self.robots):
                raise ValueError("gripper_types must match robots length")
        if self.controller_configs is not None:
            if isinstance(self.controller_configs, ControllerConfig):
                self.controller_configs = (self.controller_configs,)
            self.controller_configs = tuple(self.controller_configs)
            if len(self.controller_configs) != len(self.robots):
                raise ValueError("controller_configs must match robots length")

    @property
    def substeps(self) -> int:
        return int(round(PHYSICS_RATE / self.control_freq))

    def controller_for(self, index: int) -> ControllerConfig:
        if self.controller_configs is None:
            return ControllerConfig("OSC_POSE")
        return self.controller_configs[index]

    def gripper_for(self, index: int, default: str) -> str:
        if self.gripper_types is None:
            return default
        return self.gripper_types[index]


# ---------------------------------------------------------------------------
# key-value config files (shared by controller and environment configs)


def parse_kv_config(text: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment. Values become floats,
    ints, booleans, or whitespace-separated lists thereof when they can."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = _coerce(value)
    return out


def _coerce(value: str):
    parts = value.split()
    if len(parts) > 1:
        return [_coerce(p) for p in parts]
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        as_int = int(value)
        return as_int
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def load_kv_config(path) -> dict:
    return parse_kv_config(Path(path).read_text(encoding="utf-8"))


def controller_config_from_kv(data: dict) -> ControllerConfig:
    """Build a ControllerConfig from key-value data (file or parsed dict)."""
    kwargs = {}
    fields = {
        "kind", "impedance_mode", "kp_default", "kp_bounds", "kd_bounds",
        "position_scale", "rotation_scale", "joint_scale", "velocity_scale",
        "torque_action_limit", "nullspace_kp", "ik_damping", "ik_gain",
    }
    for key, value in data.items():
        if key not in fields:
            raise ValueError(f"unknown controller config key {key!r}")
        if key.endswith("_bounds"):
            value = tuple(float(v) for v in value)
        kwargs[key] = value
    if "kind" not in kwargs:
        raise ValueError("controller config needs a 'kind'")
    return ControllerConfig(**kwargs)


def env_config_from_kv(data: dict, **overrides) -> EnvConfig:
    data = dict(data)
    task = data.pop("task", None)
    kwargs = {}
    simple = {
        "control_freq", "horizon", "reward_shaping", "use_object_obs",
        "use_camera_obs", "seed",
    }
    for key, value in data.items():
        if key == "robots":
            kwargs["robots"] = tuple(value) if isinstance(value, list) else (value,)
        elif key == "gripper_types":
            kwargs["gripper_types"] = tuple(value) if isinstance(value, list) else (value,)
        elif key == "controller":
            kwargs["controller_configs"] = None  # resolved by caller via kind name
            kwargs["_controller_kind"] = value
        elif key in simple:
            kwargs[key] = value
        else:
            raise ValueError(f"unknown environment config key {key!r}")
    kind = kwargs.pop("_controller_kind", None)
    kwargs.update(overrides)
    cfg = EnvConfig(**kwargs)
    if kind is not None and cfg.controller_configs is None:
        cfg.controller_configs = tuple(
            ControllerConfig(str(kind).upper()) for _ in cfg.robots
        )
    return (cfg, task) if task is not None else (cfg, None)
