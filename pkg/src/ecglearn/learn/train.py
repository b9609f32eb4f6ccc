"""Training and evaluation loops.

The loop is epoch-based with early stopping on validation F1: training stops
after ``patience`` consecutive epochs without improvement, and the parameters
from the best-validation-F1 epoch are restored into the model. Given seeded
loaders and a seeded model, two runs are bit-identical (history and final
parameters).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..dataio.batches import BatchLoader
from ..dataio.labels import TaskKind
from ..errors import TrainingDivergedError
from ..models.architectures import Model
from ..tensor import Tensor, no_grad
from .metrics import MetricsReport, compute_metrics
from .optim import Adam, OptimizerConfig

__all__ = ["TrainResult", "train_model", "evaluate", "history_row_names"]

LossFn = Callable[[Tensor, np.ndarray], Tensor]

_VAL_METRICS = ("accuracy", "f1", "map", "gmean", "auc",
                "sensitivity", "specificity", "ppv")


def history_row_names() -> list[str]:
    return ["epoch", "train_loss"] + [f"val_{m}" for m in _VAL_METRICS]


@dataclass
class TrainResult:
    model: Model
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_val_f1: float = float("-inf")
    stopped_early: bool = False


def _scores_from_logits(logits: np.ndarray, kind: TaskKind) -> np.ndarray:
    z = logits.astype(np.float64)
    if kind is TaskKind.MULTICLASS:
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def evaluate(model: Model, loader: BatchLoader,
             threshold: float = 0.5) -> MetricsReport:
    """Eval-mode sweep over a loader; returns the macro metric suite."""
    model.eval_mode()
    chunks, targets = [], []
    with no_grad():
        for xb, yb in loader.batches():
            chunks.append(model.forward(xb).data.copy())
            targets.append(yb)
    logits = np.concatenate(chunks, axis=0)
    y = np.concatenate(targets, axis=0).astype(np.int8)
    scores = _scores_from_logits(logits, loader.task.kind)
    return compute_metrics(scores, y, loader.task.kind, threshold=threshold,
                           class_names=loader.task.classes)


def train_model(model: Model, train_loader: BatchLoader,
                val_loader: BatchLoader, loss_fn: LossFn,
                cfg: OptimizerConfig,
                log: Callable[[str], None] | None = None) -> TrainResult:
    """Optimize the model's trainable parameters; keep the best-val-F1 state."""
    opt = Adam(model.trainable_parameters(), lr=cfg.lr, betas=cfg.betas,
               eps=cfg.eps, weight_decay=cfg.weight_decay)
    result = TrainResult(model=model)
    best_state: dict | None = None
    wait = 0

    for epoch in range(1, cfg.epochs + 1):
        model.train_mode()
        losses = []
        for bi, (xb, yb) in enumerate(train_loader.batches(epoch)):
            logits = model.forward(xb)
            loss = loss_fn(logits, yb)
            value = float(loss.data)
            if not np.isfinite(value):
                raise TrainingDivergedError(epoch, bi, value)
            model.zero_grad()
            loss.backward()
            opt.step()
            losses.append(value)

        report = evaluate(model, val_loader)
        row = {"epoch": epoch, "train_loss": float(np.mean(losses))}
        for m in _VAL_METRICS:
            row[f"val_{m}"] = getattr(report, m)
        result.history.append(row)
        if log:
            log(f"epoch {epoch:3d}  loss {row['train_loss']:.4f}  "
                f"val_f1 {report.f1:.4f}")

        if report.f1 > result.best_val_f1:
            result.best_val_f1 = report.f1
            result.best_epoch = epoch
            best_state = model.state_dict()
            wait = 0
        else:
            wait += 1
            if wait >= cfg.patience:
                result.stopped_early = True
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    return result
