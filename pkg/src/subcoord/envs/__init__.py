from .coverage import CoverageEnv, CoverageOracle, CoverageState, density_field
from .schedule import OpenSchedule, open_schedule
from .tracking import (
    TrackingEnv,
    TrackingOracle,
    TrackingState,
    steering_actions,
    target_step,
    unicycle_step,
)

__all__ = [
    "CoverageEnv",
    "CoverageOracle",
    "CoverageState",
    "density_field",
    "OpenSchedule",
    "open_schedule",
    "TrackingEnv",
    "TrackingOracle",
    "TrackingState",
    "steering_actions",
    "target_step",
    "unicycle_step",
]
