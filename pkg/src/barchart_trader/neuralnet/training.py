"""Mini-batch training with seeded shuffling and dropout."""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ValidationError
from .layers import cross_entropy_loss
from .model import PARAM_NAMES, CnnModel, ModelConfig, backward, forward, init_model, predict_proba

log = logging.getLogger(__name__)


@dataclass
class TrainReport:
    loss: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)
    validation_accuracy: Optional[float] = None

    @property
    def epochs(self) -> int:
        return len(self.loss)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("epoch,loss,accuracy\n")
        for i, (l, a) in enumerate(zip(self.loss, self.accuracy), start=1):
            buf.write(f"{i},{l!r},{a!r}\n")
        if self.validation_accuracy is not None:
            buf.write(f"# validation_accuracy,{self.validation_accuracy!r}\n")
        return buf.getvalue()


class SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        for name in PARAM_NAMES:
            params[name] -= self.lr * grads[name]


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-7):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr_t = self.lr * np.sqrt(1 - b2**self.t) / (1 - b1**self.t)
        for name in PARAM_NAMES:
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            params[name] -= lr_t * self.m[name] / (np.sqrt(self.v[name]) + self.eps)


def _arrays(data):
    if hasattr(data, "arrays"):
        return data.arrays()
    x, y = data
    return np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.int64)


def accuracy(model: CnnModel, x, y) -> float:
    probs = predict_proba(model, x)
    return float(np.mean(np.argmax(probs, axis=1) == np.asarray(y)))


def train(data, config: ModelConfig, holdout=None) -> tuple[CnnModel, TrainReport]:
    """Train a freshly initialized model on ``data``.

    ``data`` is a :class:`LabeledDataset` or an ``(images, labels)`` pair.
    One generator seeded from ``config.seed`` drives initialization,
    shuffling and dropout in that order, so reruns are bit-identical.
    """
    x, y = _arrays(data)
    if len(x) == 0:
        raise ValidationError("cannot train on an empty dataset")
    if x.ndim == 3:
        x = x[..., None]
    rng = np.random.default_rng(config.seed)
    model = init_model(config, rng)
    params = model.params()
    opt = Adam(config.learning_rate) if config.optimizer == "adam" else SGD(config.learning_rate)
    report = TrainReport()
    n = len(x)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            scale = 1.0 / len(batch)
            total = None
            for m in range(0, len(batch), config.micro_batch):
                idx = batch[m : m + config.micro_batch]
                fwd = forward(model, x[idx], training=True, rng=rng)
                grads = backward(model, fwd, y[idx], scale=scale)
                if total is None:
                    total = grads
                else:
                    for k in PARAM_NAMES:
                        total[k] += grads[k]
                loss_sum += float(np.sum(cross_entropy_loss(fwd.probs, y[idx])))
                correct += int(np.sum(np.argmax(fwd.probs, axis=1) == y[idx]))
            opt.step(params, total)
        report.loss.append(loss_sum / n)
        report.accuracy.append(correct / n)
        log.info("epoch %d/%d loss=%.5f acc=%.4f", epoch + 1, config.epochs, report.loss[-1], report.accuracy[-1])
    if holdout is not None:
        hx, hy = _arrays(holdout)
        report.validation_accuracy = accuracy(model, hx, hy)
    return model, report
