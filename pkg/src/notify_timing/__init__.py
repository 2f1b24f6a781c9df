"""Notification timing for seniority-based shift filling."""
from .model import (
    NON_RESPONDER,
    DelayScenario,
    Instance,
    InvalidInstanceError,
    NotificationSchedule,
    PreferenceProfile,
    RunReport,
    SubsetSumInstance,
    round_half_up,
    validate_instance,
)
from .kernels import BACKEND_NAME

__version__ = "0.1.0"

__all__ = [
    "NON_RESPONDER",
    "DelayScenario",
    "Instance",
    "InvalidInstanceError",
    "NotificationSchedule",
    "PreferenceProfile",
    "RunReport",
    "SubsetSumInstance",
    "round_half_up",
    "validate_instance",
    "BACKEND_NAME",
    "__version__",
]
