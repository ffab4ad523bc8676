"""FastAPI layer over the core package."""

from .app import create_app
from .models import (
    SCHEMA_VERSION,
    ApproxErrorRequest,
    ConstraintSetPayload,
    EstimateMomentsRequest,
    FrontierRequest,
    GrowthRequest,
    MomentsPayload,
    OptimizeRequest,
    ProfilePayload,
    ResultRecord,
    SimulateRequest,
    VerifyRequest,
)

__all__ = [
    "SCHEMA_VERSION",
    "ApproxErrorRequest",
    "ConstraintSetPayload",
    "EstimateMomentsRequest",
    "FrontierRequest",
    "GrowthRequest",
    "MomentsPayload",
    "OptimizeRequest",
    "ProfilePayload",
    "ResultRecord",
    "SimulateRequest",
    "VerifyRequest",
    "create_app",
]
