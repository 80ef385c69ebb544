"""Project life-span mining and prediction for open-source software ecosystems."""

__version__ = "0.1.0"

from .core import (
    CommitTimeline,
    DeveloperProfile,
    FeatureVector,
    LifespanRecord,
    ModelParams,
    ProjectRecord,
    validate_dataset,
)
from .lifespan import compute_lifespan, non_working_ratio
from .model import default_params, evaluate, predict_lifespan

__all__ = [
    "CommitTimeline",
    "DeveloperProfile",
    "FeatureVector",
    "LifespanRecord",
    "ModelParams",
    "ProjectRecord",
    "compute_lifespan",
    "default_params",
    "evaluate",
    "non_working_ratio",
    "predict_lifespan",
    "validate_dataset",
]
