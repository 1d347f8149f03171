"""Mini-batch gradient-descent training for the capability scorer."""

import math
from dataclasses import dataclass, field

import numpy as np

from poai.dataset import Dataset
from poai.errors import TrainingDivergedError, ValidationError
from poai.features import FeatureRanges
from poai.metrics import spearman
from poai.scorer.model import (
    DEFAULT_L2_LAMBDA,
    ScorerModel,
    loss_gradients,
    predict_batch,
)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 32
    l2_lambda: float = DEFAULT_L2_LAMBDA
    seed: int = 0
    train_fraction: float = 0.8

    def __post_init__(self):
        if not (math.isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise ValidationError(f"learning_rate must be >= 0, got {self.learning_rate!r}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs!r}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size!r}")
        if self.l2_lambda < 0:
            raise ValidationError(f"l2_lambda must be >= 0, got {self.l2_lambda!r}")
        if not (0.0 < self.train_fraction <= 1.0):
            raise ValidationError(f"train_fraction must lie in (0, 1], got {self.train_fraction!r}")


@dataclass
class TrainReport:
    """Loss curve and held-out quality of one training run.

    ``train_losses[0]`` is the loss before any update; entry ``e`` is
    the loss after epoch ``e``. Losses are on the score scale (same
    objective as :func:`poai.scorer.model.loss`). When train_fraction
    is 1 the validation figures fall back to the training split.
    """

    train_losses: list[float] = field(default_factory=list)
    final_val_loss: float = 0.0
    val_spearman: float = 0.0

    def to_dict(self) -> dict:
        return {
            "train_losses": self.train_losses,
            "final_val_loss": self.final_val_loss,
            "val_spearman": self.val_spearman,
        }


def _dataset_loss(model, x, y, l2_lambda) -> float:
    preds = predict_batch(model, x)
    with np.errstate(over="ignore", invalid="ignore"):
        # overflow here is how divergence shows up; the caller checks
        mse = float(np.mean((preds - y) ** 2))
    return mse + l2_lambda * model.conv_weight_square_sum()


def train(
    model: ScorerModel,
    dataset: Dataset,
    cfg: TrainConfig,
    ranges: FeatureRanges | None = None,
) -> tuple[ScorerModel, TrainReport]:
    """Fit a copy of ``model`` to the dataset; the input is untouched.

    The first ``train_fraction`` of the dataset is the training split,
    the remainder is held out. Batches are drawn from a fresh seeded
    shuffle each epoch, so the result is a deterministic function of
    (model, dataset, cfg). Raises :class:`TrainingDivergedError` if the
    loss stops being finite.
    """
    n = len(dataset)
    if n < 2 * cfg.batch_size:
        raise ValidationError(
            f"dataset has {n} samples; need at least 2 * batch_size = {2 * cfg.batch_size}"
        )
    x_all, y_all = dataset.to_arrays(ranges)
    n_train = max(1, int(round(cfg.train_fraction * n)))
    x_train, y_train = x_all[:n_train], y_all[:n_train]
    x_val, y_val = x_all[n_train:], y_all[n_train:]
    if len(x_val) == 0:
        x_val, y_val = x_train, y_train

    fitted = model.copy()
    rng = np.random.default_rng(cfg.seed)
    report = TrainReport()
    report.train_losses.append(_dataset_loss(fitted, x_train, y_train, cfg.l2_lambda))

    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        # overflow inside a diverging run is expected; it is detected as
        # a non-finite epoch loss below rather than warned about per batch
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, n_train, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                _, grads = loss_gradients(
                    fitted, x_train[idx], y_train[idx], cfg.l2_lambda, scaled=True
                )
                for name, arr in fitted.params():
                    arr -= cfg.learning_rate * grads[name]
        epoch_loss = _dataset_loss(fitted, x_train, y_train, cfg.l2_lambda)
        if not math.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch)
        report.train_losses.append(epoch_loss)

    report.final_val_loss = _dataset_loss(fitted, x_val, y_val, cfg.l2_lambda)
    report.val_spearman = spearman(predict_batch(fitted, x_val), y_val)
    return fitted, report
