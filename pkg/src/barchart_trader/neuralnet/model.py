"""The fixed conv-conv-pool-dense network and its forward/backward passes.

Layer stack (defaults give the full-size network)::

    input S x S x 1
    conv 3x3 -> C1, ReLU
    conv 3x3 -> C2, ReLU
    maxpool 2x2
    dropout r1
    flatten (S/2 * S/2 * C2)
    dense -> H, ReLU
    dropout r2
    dense -> 3, softmax
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..errors import ShapeError, StateError
from ..labeler import TrendLabel
from .layers import (
    ConvLayer,
    DenseLayer,
    conv2d_backward,
    conv2d_forward,
    cross_entropy_loss,
    dense_forward,
    dropout,
    maxpool_2x2,
    maxpool_2x2_backward,
    relu,
    relu_backward,
    softmax,
)

N_CLASSES = 3
PARAM_NAMES = (
    "conv1.kernels", "conv1.biases",
    "conv2.kernels", "conv2.biases",
    "dense1.weights", "dense1.biases",
    "dense2.weights", "dense2.biases",
)


@dataclass(frozen=True)
class Architecture:
    input_size: int = 30
    conv1_channels: int = 32
    conv2_channels: int = 64
    hidden_units: int = 128
    n_classes: int = N_CLASSES

    def __post_init__(self):
        if self.input_size < 2 or self.input_size % 2:
            raise ShapeError("input size must be even and at least 2")
        if min(self.conv1_channels, self.conv2_channels, self.hidden_units, self.n_classes) < 1:
            raise ShapeError("layer widths must be positive")

    @property
    def flat_size(self) -> int:
        half = self.input_size // 2
        return half * half * self.conv2_channels

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        return {
            "conv1.kernels": (3, 3, 1, self.conv1_channels),
            "conv1.biases": (self.conv1_channels,),
            "conv2.kernels": (3, 3, self.conv1_channels, self.conv2_channels),
            "conv2.biases": (self.conv2_channels,),
            "dense1.weights": (self.hidden_units, self.flat_size),
            "dense1.biases": (self.hidden_units,),
            "dense2.weights": (self.n_classes, self.hidden_units),
            "dense2.biases": (self.n_classes,),
        }


@dataclass(frozen=True)
class ModelConfig:
    epochs: int = 100
    batch_size: int = 1028
    learning_rate: float = 0.01
    seed: int = 0
    dropout_rates: tuple[float, float] = (0.25, 0.50)
    optimizer: str = "sgd"
    # samples per forward/backward chunk inside a batch; bounds memory only
    micro_batch: int = 64
    architecture: Architecture = field(default_factory=Architecture)

    def __post_init__(self):
        object.__setattr__(self, "dropout_rates", tuple(float(r) for r in self.dropout_rates))
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1 or self.micro_batch < 1:
            raise ValueError("batch_size and micro_batch must be at least 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if len(self.dropout_rates) != 2 or not all(0 <= r < 1 for r in self.dropout_rates):
            raise ValueError("dropout_rates must be two values in [0, 1)")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if isinstance(self.architecture, dict):
            object.__setattr__(self, "architecture", Architecture(**self.architecture))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dropout_rates"] = list(self.dropout_rates)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        if "architecture" in d:
            d["architecture"] = Architecture(**d["architecture"])
        if "dropout_rates" in d:
            d["dropout_rates"] = tuple(d["dropout_rates"])
        return cls(**d)


@dataclass
class CnnModel:
    conv1: ConvLayer
    conv2: ConvLayer
    dense1: DenseLayer
    dense2: DenseLayer
    config: ModelConfig

    def __post_init__(self):
        shapes = self.config.architecture.param_shapes()
        for name, value in self.params().items():
            if value.shape != shapes[name]:
                raise ShapeError(f"{name} has shape {value.shape}, architecture needs {shapes[name]}")

    @property
    def architecture(self) -> Architecture:
        return self.config.architecture

    def params(self) -> dict[str, np.ndarray]:
        return {
            "conv1.kernels": self.conv1.kernels,
            "conv1.biases": self.conv1.biases,
            "conv2.kernels": self.conv2.kernels,
            "conv2.biases": self.conv2.biases,
            "dense1.weights": self.dense1.weights,
            "dense1.biases": self.dense1.biases,
            "dense2.weights": self.dense2.weights,
            "dense2.biases": self.dense2.biases,
        }

    def param_counts(self) -> dict[str, int]:
        return {
            "conv1": self.conv1.n_params,
            "conv2": self.conv2.n_params,
            "dense1": self.dense1.n_params,
            "dense2": self.dense2.n_params,
        }

    def flat_params(self) -> np.ndarray:
        return np.concatenate([self.params()[k].ravel() for k in PARAM_NAMES])

    def copy(self) -> "CnnModel":
        return from_params(self.config, {k: v.copy() for k, v in self.params().items()})

    @classmethod
    def zeros(cls, config: ModelConfig) -> "CnnModel":
        shapes = config.architecture.param_shapes()
        return from_params(config, {k: np.zeros(s) for k, s in shapes.items()})


def from_params(config: ModelConfig, params: dict[str, np.ndarray]) -> CnnModel:
    return CnnModel(
        conv1=ConvLayer(params["conv1.kernels"], params["conv1.biases"]),
        conv2=ConvLayer(params["conv2.kernels"], params["conv2.biases"]),
        dense1=DenseLayer(params["dense1.weights"], params["dense1.biases"]),
        dense2=DenseLayer(params["dense2.weights"], params["dense2.biases"]),
        config=config,
    )


def init_model(config: ModelConfig, rng: Optional[np.random.Generator] = None) -> CnnModel:
    """Glorot-uniform weights, zero biases, drawn from ``config.seed``."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    arch = config.architecture
    params = {}
    for name, shape in arch.param_shapes().items():
        if name.endswith("biases"):
            params[name] = np.zeros(shape)
            continue
        if len(shape) == 4:
            fan_in, fan_out = 9 * shape[2], 9 * shape[3]
        else:
            fan_out, fan_in = shape
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=shape)
    return from_params(config, params)


def _as_input(x) -> np.ndarray:
    """``(N, S, S)`` or ``(N, S, S, 1)`` to a float64 NHWC batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        x = x[..., None]
    if x.ndim != 4:
        raise ShapeError(f"expected a batch of images, got shape {x.shape}")
    return x


@dataclass
class ForwardPass:
    """Logits, probabilities and (in training mode) the backprop cache."""

    logits: np.ndarray
    probs: np.ndarray
    cache: Optional[dict] = None


def forward(model: CnnModel, x, training: bool = False, rng=None) -> ForwardPass:
    x = _as_input(x)
    arch = model.architecture
    if x.shape[1:] != (arch.input_size, arch.input_size, 1):
        raise ShapeError(f"input batch shape {x.shape} does not fit {arch.input_size}x{arch.input_size}x1")
    r1, r2 = model.config.dropout_rates

    z1, cols1 = conv2d_forward(x, model.conv1, return_cols=True)
    a1 = relu(z1)
    z2, cols2 = conv2d_forward(a1, model.conv2, return_cols=True)
    a2 = relu(z2)
    p, argmax = maxpool_2x2(a2)
    d1, mask1 = dropout(p, r1, training, rng)
    flat = d1.reshape(len(x), -1)
    z3 = dense_forward(flat, model.dense1)
    a3 = relu(z3)
    d2, mask2 = dropout(a3, r2, training, rng)
    logits = dense_forward(d2, model.dense2)
    probs = softmax(logits)

    cache = None
    if training:
        cache = dict(
            x_shape=x.shape, cols1=cols1, z1=z1, a1_shape=a1.shape, cols2=cols2, z2=z2,
            argmax=argmax, pool_shape=p.shape, mask1=mask1, flat=flat, z3=z3,
            mask2=mask2, d2=d2,
        )
    return ForwardPass(logits, probs, cache)


def backward(model: CnnModel, fwd: ForwardPass, targets, scale: Optional[float] = None) -> dict[str, np.ndarray]:
    """Gradients of ``scale * sum(loss)`` for every parameter.

    ``scale`` defaults to ``1 / batch`` (the mean loss). Requires a
    training-mode forward pass over the same batch.
    """
    if fwd is None or fwd.cache is None:
        raise StateError("backward needs a training-mode forward pass")
    c = fwd.cache
    targets = np.asarray(targets, dtype=np.int64)
    n = c["x_shape"][0]
    if targets.shape != (n,):
        raise StateError(f"{len(targets)} targets for a forward pass over {n} samples")
    if scale is None:
        scale = 1.0 / n

    dlogits = fwd.probs.copy()
    dlogits[np.arange(n), targets] -= 1.0
    dlogits *= scale

    g = {}
    g["dense2.weights"] = dlogits.T @ c["d2"]
    g["dense2.biases"] = dlogits.sum(axis=0)
    dd2 = dlogits @ model.dense2.weights
    da3 = dd2 * c["mask2"] if c["mask2"] is not None else dd2
    dz3 = relu_backward(da3, c["z3"])
    g["dense1.weights"] = dz3.T @ c["flat"]
    g["dense1.biases"] = dz3.sum(axis=0)
    dflat = dz3 @ model.dense1.weights
    dd1 = dflat.reshape(c["pool_shape"])
    dp = dd1 * c["mask1"] if c["mask1"] is not None else dd1
    da2 = maxpool_2x2_backward(dp, c["argmax"])
    dz2 = relu_backward(da2, c["z2"])
    da1, g["conv2.kernels"], g["conv2.biases"] = conv2d_backward(dz2, c["cols2"], c["a1_shape"], model.conv2)
    dz1 = relu_backward(da1, c["z1"])
    _, g["conv1.kernels"], g["conv1.biases"] = conv2d_backward(dz1, c["cols1"], c["x_shape"], model.conv1)
    return g


def batch_loss(model: CnnModel, x, targets, training=False, rng=None) -> float:
    """Mean cross-entropy over a batch (the quantity ``backward`` differentiates)."""
    fwd = forward(model, x, training=training, rng=rng)
    return float(np.mean(cross_entropy_loss(fwd.probs, targets)))


def predict_proba(model: CnnModel, x, chunk: int = 64) -> np.ndarray:
    x = _as_input(x)
    out = [forward(model, x[i : i + chunk]).probs for i in range(0, len(x), chunk)]
    return np.concatenate(out) if out else np.empty((0, model.architecture.n_classes))


def predict(model: CnnModel, image):
    """Label (argmax, ties to the lowest label value) and class probabilities."""
    pixels = getattr(image, "pixels", image)
    probs = predict_proba(model, np.asarray(pixels, dtype=np.float64)[None])[0]
    return TrendLabel(int(np.argmax(probs))), probs
