"""Losses, optimizer, training loop, and the evaluation metric suite."""

from .losses import class_weights_from_counts, focal_loss, weighted_bce
from .metrics import MetricsReport, auc_score, average_precision, compute_metrics
from .optim import Adam, OptimizerConfig
from .train import TrainResult, evaluate, history_row_names, train_model

__all__ = [
    "focal_loss", "weighted_bce", "class_weights_from_counts",
    "MetricsReport", "compute_metrics", "average_precision", "auc_score",
    "Adam", "OptimizerConfig",
    "train_model", "evaluate", "TrainResult", "history_row_names",
]
