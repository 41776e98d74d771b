"""Gym-style simulation runtime over the dynamics core."""

from .config import EnvConfig, UnsupportedFeatureError, parse_kv_config, load_kv_config
from .core import Environment, EnvironmentError_, StepResult, make

__all__ = [
    "EnvConfig",
    "Environment",
    "EnvironmentError_",
    "StepResult",
    "UnsupportedFeatureError",
    "load_kv_config",
    "make",
    "parse_kv_config",
]
