from .network import (
    Architecture,
    PolicyParams,
    architecture_for,
    grad_check,
    init,
    predict,
    predict_fn,
)
from .training import TrainConfig, TrainingDiverged, finetune, train_bc

__all__ = [
    "Architecture",
    "PolicyParams",
    "TrainConfig",
    "TrainingDiverged",
    "architecture_for",
    "finetune",
    "grad_check",
    "init",
    "predict",
    "predict_fn",
    "train_bc",
]
