"""armforge: modular robot-manipulation simulation and benchmark tasks."""

__version__ = "0.1.0"


def make(task_name, config=None, **kwargs):
    """Create a benchmark environment by task name; see armforge.envs.make."""
    from .envs import make as _make

    return _make(task_name, config, **kwargs)
