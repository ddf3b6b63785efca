"""Relay compensation of Coulomb friction: hybrid simulation and analysis."""

from .friction import FrictionModel, FrictionParams, PreslidingState, Regime
from .integrator import EventKind, Scenario, Termination, Trajectory, integrate
from .kernels import BACKEND
from .plant import PlantParams, SystemState

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "EventKind", "FrictionModel", "FrictionParams", "PlantParams",
    "PreslidingState", "Regime", "Scenario", "SystemState", "Termination",
    "Trajectory", "integrate",
]
