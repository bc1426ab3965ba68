"""Screened QGEM simulator: trajectories, phases, witness, plate mechanics, sensitivity."""

from qgem_screen.core import (
    CONSTANTS,
    ConfigError,
    ExperimentConfig,
    GeometryState,
    ImbalanceSpec,
    PhysicalConstants,
    PlateSpec,
    ProtocolSchedule,
    TestMassSpec,
    convert_dipole,
)
from qgem_screen.dynamics import CollisionError, TrajectoryRecord, propagate
from qgem_screen.phase import PhaseResult, accumulated_phase, evaluate

__all__ = [
    "CONSTANTS",
    "CollisionError",
    "ConfigError",
    "ExperimentConfig",
    "GeometryState",
    "ImbalanceSpec",
    "PhaseResult",
    "PhysicalConstants",
    "PlateSpec",
    "ProtocolSchedule",
    "TestMassSpec",
    "TrajectoryRecord",
    "accumulated_phase",
    "convert_dipole",
    "evaluate",
    "propagate",
]
