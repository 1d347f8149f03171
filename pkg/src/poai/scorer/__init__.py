"""Trainable capability scorer: model, kernels, training loop."""

from poai.scorer.backend import active_backend
from poai.scorer.model import (
    ScorerModel,
    gradient_check,
    init_model,
    load_model,
    loss,
    predict,
    predict_batch,
    save_model,
)
from poai.scorer.train import TrainConfig, TrainReport, train

__all__ = [
    "ScorerModel",
    "TrainConfig",
    "TrainReport",
    "active_backend",
    "gradient_check",
    "init_model",
    "load_model",
    "loss",
    "predict",
    "predict_batch",
    "save_model",
    "train",
]
