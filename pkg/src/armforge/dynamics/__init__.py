"""Articulated rigid-body kinematics, dynamics, penalty contacts, and integration."""

from .types import (
    Body,
    ContactPoint,
    Geom,
    Joint,
    ModelError,
    Pose,
    SimState,
    SpatialInertia,
)
from .model import CompiledModel, compile_model
from .kinematics import forward_kinematics, jacobian, compute_kinematics
from .algorithms import mass_matrix, bias_forces
from .contacts import detect_contacts, contact_forces, ContactParams
from .simulate import (
    ExternalForce,
    IntegrationError,
    WeldConstraint,
    forward_dynamics,
    integrate,
    joint_limit_torques,
    step_dynamics,
    weld_attach,
    weld_detach,
)

__all__ = [
    "Body",
    "CompiledModel",
    "ContactParams",
    "ContactPoint",
    "ExternalForce",
    "Geom",
    "IntegrationError",
    "Joint",
    "ModelError",
    "Pose",
    "SimState",
    "SpatialInertia",
    "WeldConstraint",
    "bias_forces",
    "compile_model",
    "compute_kinematics",
    "contact_forces",
    "detect_contacts",
    "forward_dynamics",
    "forward_kinematics",
    "integrate",
    "jacobian",
    "joint_limit_torques",
    "mass_matrix",
    "step_dynamics",
    "weld_attach",
    "weld_detach",
]
