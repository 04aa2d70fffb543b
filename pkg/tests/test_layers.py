import numpy as np
import pytest

from barchart_trader.errors import ShapeError
from barchart_trader.neuralnet import kernels
from barchart_trader.neuralnet.layers import (
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
    softmax,
)
from oracles import conv2d_loops, dense_loops, maxpool_loops


def test_conv_zero_input_gives_bias(backend):
    rng = np.random.default_rng(0)
    layer = ConvLayer(rng.normal(size=(3, 3, 1, 4)), rng.normal(size=4))
    out = conv2d_forward(np.zeros((3, 3, 1)), layer)
    assert np.array_equal(out, np.broadcast_to(layer.biases, (3, 3, 4)))


def test_conv_identity_kernel(backend):
    k = np.zeros((3, 3, 1, 1))
    k[1, 1, 0, 0] = 1
    x = np.random.default_rng(1).normal(size=(3, 3, 1))
    assert np.array_equal(conv2d_forward(x, ConvLayer(k, np.zeros(1))), x)


def test_conv_matches_loops(backend):
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4, 4, 3))
    layer = ConvLayer(rng.normal(size=(3, 3, 3, 2)), rng.normal(size=2))
    np.testing.assert_allclose(conv2d_forward(x, layer), conv2d_loops(x, layer.kernels, layer.biases), rtol=0, atol=1e-12)


def test_conv_channel_mismatch():
    with pytest.raises(ShapeError):
        conv2d_forward(np.zeros((4, 4, 2)), ConvLayer(np.zeros((3, 3, 1, 1)), np.zeros(1)))


def test_conv_backward_is_adjoint(backend):
    # <conv(x), g> is linear in x: its x-gradient must satisfy <dx, x> = <out - b, g>
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2, 5, 5, 3))
    layer = ConvLayer(rng.normal(size=(3, 3, 3, 4)), rng.normal(size=4))
    out, cols = conv2d_forward(x, layer, return_cols=True)
    g = rng.normal(size=out.shape)
    dx, dk, db = conv2d_backward(g, cols, x.shape, layer)
    np.testing.assert_allclose(np.sum(dx * x), np.sum((out - layer.biases) * g), rtol=1e-12)
    np.testing.assert_allclose(np.sum(dk * layer.kernels), np.sum((out - layer.biases) * g), rtol=1e-12)
    np.testing.assert_allclose(db, g.sum(axis=(0, 1, 2)), rtol=1e-12)


def test_relu():
    assert relu(np.array([-1.0, 0.0, 2.0])).tolist() == [0, 0, 2]
    assert not relu(-np.ones(5)).any()
    x = np.arange(1.0, 6.0)
    assert np.array_equal(relu(x), x)


def test_maxpool_block(backend):
    x = np.array([[1.0, 2.0], [3.0, 4.0]])[..., None]
    out, arg = maxpool_2x2(x)
    assert out[0, 0, 0] == 4 and arg[0, 0, 0] == 3


def test_maxpool_constant_ties_to_first(backend):
    out, arg = maxpool_2x2(np.full((4, 6, 2), 7.0))
    assert np.all(out == 7) and np.all(arg == 0)


def test_maxpool_full_size_matches_loops(backend):
    x = np.random.default_rng(4).normal(size=(30, 30, 32))
    out, arg = maxpool_2x2(x)
    ref, ref_arg = maxpool_loops(x)
    assert out.shape == (15, 15, 32)
    assert np.array_equal(out, ref) and np.array_equal(arg, ref_arg)


def test_maxpool_odd_dims():
    with pytest.raises(ShapeError):
        maxpool_2x2(np.zeros((3, 4, 1)))


def test_maxpool_backward_routes_to_argmax(backend):
    x = np.random.default_rng(5).normal(size=(1, 4, 4, 2))
    out, arg = maxpool_2x2(x)
    dx = maxpool_2x2_backward(np.ones_like(out), arg)
    assert np.array_equal(dx != 0, x == np.repeat(np.repeat(out, 2, axis=1), 2, axis=2))


def test_dropout_degenerate_cases():
    x = np.random.default_rng(6).normal(size=100)
    rng = np.random.default_rng(0)
    assert np.array_equal(dropout(x, 0.0, True, rng)[0], x)
    assert np.array_equal(dropout(x, 0.0, False)[0], x)
    assert np.array_equal(dropout(x, 0.5, False)[0], x)


def test_dropout_statistics():
    x = np.ones(100_000) * 3.0
    out, mask = dropout(x, 0.25, True, np.random.default_rng(42))
    kept = np.count_nonzero(out) / x.size
    assert abs(kept - 0.75) < 0.01
    assert abs(out.mean() - 3.0) < 0.03
    assert np.allclose(out[out != 0], 4.0)


def test_dense():
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(dense_forward(x, DenseLayer(np.eye(3), np.zeros(3))), x)
    assert dense_forward(x, DenseLayer(np.zeros((3, 3)), [1.0, 2.0, 3.0])).tolist() == [1, 2, 3]
    rng = np.random.default_rng(7)
    layer = DenseLayer(rng.normal(size=(3, 5)), rng.normal(size=3))
    v = rng.normal(size=5)
    np.testing.assert_allclose(dense_forward(v, layer), dense_loops(v, layer.weights, layer.biases), rtol=0, atol=1e-12)
    with pytest.raises(ShapeError):
        dense_forward(np.zeros(4), layer)


def test_softmax():
    np.testing.assert_allclose(softmax(np.zeros(3)), [1 / 3] * 3, rtol=0, atol=1e-15)
    e = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(softmax(e + 1000.0), softmax(e), rtol=0, atol=1e-12)
    # exp(k) / (e + e^2 + e^3) evaluated directly
    direct = np.exp(e) / np.exp(e).sum()
    np.testing.assert_allclose(softmax(e), direct, rtol=1e-12)
    np.testing.assert_allclose(softmax(e), [0.09003, 0.24473, 0.66524], atol=1e-5)
    many = softmax(np.random.default_rng(8).normal(size=(50, 3)) * 20)
    assert np.all(np.abs(many.sum(axis=1) - 1) < 1e-12)


def test_cross_entropy():
    assert cross_entropy_loss(np.array([1.0, 0.0, 0.0]), 0) == 0
    assert cross_entropy_loss(np.full(3, 1 / 3), 2) == pytest.approx(np.log(3), abs=1e-12)
    assert cross_entropy_loss(np.array([0.1, 0.7, 0.2]), 1) == pytest.approx(0.35667, abs=1e-5)
    assert cross_entropy_loss(np.array([1.0, 0.0, 0.0]), 1) == pytest.approx(-np.log(1e-12))


def test_backends_bit_identical():
    if "cython" not in kernels.BACKENDS:
        pytest.skip("compiled kernels not built")
    py, cy = kernels.BACKENDS["python"], kernels.BACKENDS["cython"]
    rng = np.random.default_rng(9)
    x = rng.normal(size=(3, 8, 6, 5))
    cols = py.im2col3x3(x)
    assert np.array_equal(cols, cy.im2col3x3(x))
    d = rng.normal(size=cols.shape)
    assert np.array_equal(py.col2im3x3(d, 3, 8, 6, 5), cy.col2im3x3(d, 3, 8, 6, 5))
    (o1, a1), (o2, a2) = py.maxpool2x2(x), cy.maxpool2x2(x)
    assert np.array_equal(o1, o2) and np.array_equal(a1, a2)
    g = rng.normal(size=o1.shape)
    assert np.array_equal(py.maxpool2x2_backward(g, a1), cy.maxpool2x2_backward(g, a2))


def test_backend_selected_from_environment():
    import os
    import subprocess
    import sys

    code = "from barchart_trader.neuralnet import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, BARCHART_TRADER_KERNELS="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    env["BARCHART_TRADER_KERNELS"] = "fortran"
    bad = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert bad.returncode != 0 and "unknown kernel backend" in bad.stderr
