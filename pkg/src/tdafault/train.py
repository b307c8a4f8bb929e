"""Deterministic training loop for the encoder classifier.

Optimization is Adam with bias correction.  Batches accumulate per-sample
gradients scaled by 1/batch, epochs shuffle with a generator seeded from the
run seed, and early stopping tracks validation loss with a patience window;
the parameters that scored the best validation loss are restored at the end.
Given the same seed, data, and configs, two runs produce bit-identical
histories and parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .metrics import EvalReport, evaluate_predictions
from .model import TdaEncoder

__all__ = ["TrainConfig", "TrainResult", "Adam", "train", "evaluate"]

Example = tuple[np.ndarray, int]  # (tokens (T, F), class index)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be >= 1")


class Adam:
    """Adam with bias-corrected first/second moments over named tensors."""

    def __init__(self, params: dict[str, Tensor], cfg: TrainConfig):
        self.params = params
        self.cfg = cfg
        self.t = 0
        self._m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self._v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self) -> None:
        cfg = self.cfg
        self.t += 1
        bc1 = 1.0 - cfg.beta1 ** self.t
        bc2 = 1.0 - cfg.beta2 ** self.t
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            m = self._m[name]
            v = self._v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g * g
            p.data -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)


@dataclass
class TrainResult:
    history: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = float("inf")
    epochs_run: int = 0
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return {
            "history": self.history,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "epochs_run": self.epochs_run,
            "stopped_early": self.stopped_early,
        }


def _mean_loss_and_accuracy(model: TdaEncoder, data) -> tuple[float, float]:
    total = 0.0
    correct = 0
    for tokens, label in data:
        logits = model.forward(tokens)
        total += ad.cross_entropy_logits(logits, label).item()
        if int(np.argmax(logits.data[0])) == label:
            correct += 1
    return total / len(data), correct / len(data)


def train(model: TdaEncoder, train_data, val_data, cfg: TrainConfig) -> TrainResult:
    """Fit ``model`` in place; returns the per-epoch history and best epoch."""
    if len(train_data) == 0 or len(val_data) == 0:
        raise ValueError("train and validation sets must be non-empty")
    params = model.parameters()
    opt = Adam(params, cfg)
    shuffle_rng = np.random.default_rng([cfg.seed, 1])

    result = TrainResult()
    best_snapshot = {k: p.data.copy() for k, p in params.items()}
    bad_epochs = 0

    for epoch in range(cfg.max_epochs):
        order = shuffle_rng.permutation(len(train_data))
        running = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            ad.zero_grad(params.values())
            inv_b = 1.0 / len(batch)
            for j in batch:
                tokens, label = train_data[j]
                loss = model.loss(tokens, label, training=True)
                ad.scale(loss, inv_b).backward()
                running += loss.item()
            opt.step()

        val_loss, val_acc = _mean_loss_and_accuracy(model, val_data)
        result.history.append(
            {
                "epoch": epoch,
                "train_loss": running / len(train_data),
                "val_loss": val_loss,
                "val_accuracy": val_acc,
            }
        )
        result.epochs_run = epoch + 1

        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            best_snapshot = {k: p.data.copy() for k, p in params.items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                result.stopped_early = True
                break

    for name, p in params.items():
        p.data = best_snapshot[name]
    return result


def evaluate(model: TdaEncoder, data, labels) -> tuple[EvalReport, float]:
    """Score a dataset; returns the metric report and the mean loss."""
    if len(data) == 0:
        raise ValueError("cannot evaluate an empty dataset")
    y_true = []
    y_pred = []
    total = 0.0
    for tokens, label in data:
        logits = model.forward(tokens)
        total += ad.cross_entropy_logits(logits, label).item()
        y_true.append(label)
        y_pred.append(int(np.argmax(logits.data[0])))
    return evaluate_predictions(y_true, y_pred, labels), total / len(data)
