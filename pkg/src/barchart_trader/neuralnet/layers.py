"""Layer primitives: 3x3 same convolution, ReLU, 2x2 max pooling, dropout,
dense, softmax and cross-entropy. Tensors are NHWC float64; single images
``(H, W, C)`` are accepted where noted and promoted to a batch of one.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from . import kernels

LOSS_FLOOR = 1e-12


@dataclass
class ConvLayer:
    kernels: np.ndarray  # (3, 3, in_channels, out_channels)
    biases: np.ndarray  # (out_channels,)

    def __post_init__(self):
        self.kernels = np.asarray(self.kernels, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.kernels.ndim != 4 or self.kernels.shape[:2] != (3, 3):
            raise ShapeError(f"conv kernels must be 3x3xCinxCout, got {self.kernels.shape}")
        if self.biases.shape != (self.kernels.shape[3],):
            raise ShapeError("conv biases must have one entry per output channel")

    @property
    def in_channels(self):
        return self.kernels.shape[2]

    @property
    def out_channels(self):
        return self.kernels.shape[3]

    @property
    def n_params(self):
        return self.kernels.size + self.biases.size


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    biases: np.ndarray  # (out,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[0],):
            raise ShapeError("dense layer needs (out, in) weights and (out,) biases")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ShapeError("dense parameters must be finite")

    @property
    def n_params(self):
        return self.weights.size + self.biases.size


def _as_batch(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        return x[None], True
    if x.ndim != 4:
        raise ShapeError(f"expected HxWxC or NxHxWxC input, got shape {x.shape}")
    return x, False


def conv2d_forward(x, layer: ConvLayer, return_cols=False):
    """Cross-correlation with zero padding 1, plus per-channel bias."""
    batch, single = _as_batch(x)
    n, h, w, c = batch.shape
    if c != layer.in_channels:
        raise ShapeError(f"input has {c} channels, layer expects {layer.in_channels}")
    cols = kernels.im2col3x3(batch)
    out = cols @ layer.kernels.reshape(9 * c, layer.out_channels) + layer.biases
    out = out.reshape(n, h, w, layer.out_channels)
    if single:
        out = out[0]
    return (out, cols) if return_cols else out


def conv2d_backward(dout, cols, input_shape, layer: ConvLayer):
    """Gradients ``(d_input, d_kernels, d_biases)`` from the saved patch matrix."""
    n, h, w, c = input_shape
    flat = dout.reshape(n * h * w, layer.out_channels)
    d_kernels = (cols.T @ flat).reshape(layer.kernels.shape)
    d_biases = flat.sum(axis=0)
    dcols = flat @ layer.kernels.reshape(9 * c, layer.out_channels).T
    d_input = kernels.col2im3x3(dcols, n, h, w, c)
    return d_input, d_kernels, d_biases


def relu(x):
    return np.maximum(x, 0.0)


def relu_backward(dout, pre_activation):
    return np.where(pre_activation > 0, dout, 0.0)


def maxpool_2x2(x):
    """Max over disjoint 2x2 blocks; returns ``(pooled, argmax)``.

    ``argmax`` holds the winning position ``dy * 2 + dx`` inside each block,
    ties resolved to the smallest position.
    """
    batch, single = _as_batch(x)
    if batch.shape[1] % 2 or batch.shape[2] % 2:
        raise ShapeError(f"max pooling needs even spatial dims, got {batch.shape[1:3]}")
    out, arg = kernels.maxpool2x2(batch)
    if single:
        return out[0], arg[0]
    return out, arg


def maxpool_2x2_backward(dout, argmax):
    return kernels.maxpool2x2_backward(dout, argmax)


def dropout(x, rate, training, rng=None):
    """Inverted dropout. Returns ``(output, mask)``; ``mask`` is None when inactive."""
    if not 0 <= rate < 1:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    x = np.asarray(x, dtype=np.float64)
    if not training or rate == 0:
        return x, None
    if rng is None:
        raise ValueError("training-mode dropout needs a random generator")
    keep = rng.random(x.shape) >= rate
    mask = keep / (1.0 - rate)
    return x * mask, mask


def dense_forward(x, layer: DenseLayer):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != layer.weights.shape[1]:
        raise ShapeError(f"input length {x.shape[-1]} != layer input {layer.weights.shape[1]}")
    return x @ layer.weights.T + layer.biases


def softmax(logits):
    e = np.asarray(logits, dtype=np.float64)
    shifted = np.exp(e - e.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def cross_entropy_loss(probs, target):
    """``-log(p[target])`` with a 1e-12 floor; vectorized over leading axes."""
    probs = np.asarray(probs, dtype=np.float64)
    target = np.asarray(target, dtype=np.int64)
    picked = np.take_along_axis(probs, target[..., None], axis=-1)[..., 0]
    loss = -np.log(np.maximum(picked, LOSS_FLOOR))
    return float(loss) if loss.ndim == 0 else loss
