"""Minimal deterministic CNN engine for 30x30 bar-chart images."""
from . import kernels
from .layers import (
    ConvLayer,
    DenseLayer,
    conv2d_forward,
    cross_entropy_loss,
    dense_forward,
    dropout,
    maxpool_2x2,
    relu,
    softmax,
)
from .model import (
    Architecture,
    CnnModel,
    ForwardPass,
    ModelConfig,
    backward,
    batch_loss,
    forward,
    init_model,
    predict,
    predict_proba,
)
from .serialization import load_model, read_model, save_model, write_model
from .training import TrainReport, accuracy, train

__all__ = [
    "Architecture", "CnnModel", "ConvLayer", "DenseLayer", "ForwardPass", "ModelConfig",
    "TrainReport", "accuracy", "backward", "batch_loss", "conv2d_forward", "cross_entropy_loss",
    "dense_forward", "dropout", "forward", "init_model", "kernels", "load_model", "maxpool_2x2",
    "predict", "predict_proba", "read_model", "relu", "save_model", "softmax", "train", "write_model",
]
