import numpy as np
import pytest

from barchart_trader.errors import ModelFormatError, StateError, ValidationError
from barchart_trader.labeler import TrendLabel
from barchart_trader.chart_encoder import ChartImage
from barchart_trader.neuralnet import (
    Architecture,
    CnnModel,
    ModelConfig,
    backward,
    forward,
    init_model,
    load_model,
    predict,
    predict_proba,
    save_model,
    softmax,
    train,
)
from gradcheck import SMALL, gradient_errors, small_model


def test_full_size_parameter_counts():
    model = init_model(ModelConfig())
    assert model.param_counts() == {"conv1": 320, "conv2": 18_496, "dense1": 1_843_328, "dense2": 387}


def test_gradients_match_finite_differences(backend):
    model = small_model(seed=1)
    rng = np.random.default_rng(2)
    x = rng.normal(size=(3, 6, 6, 1))
    errors = gradient_errors(model, x, np.array([0, 1, 2]))
    assert max(errors.values()) < 1e-4, errors


def test_bias_gradient_at_zero_input():
    model = small_model(seed=3)
    for name, p in model.params().items():
        if name != "dense2.biases" and p.ndim == 1:
            p[:] = 0
    y = np.array([0, 2, 2, 1])
    fwd = forward(model, np.zeros((4, 6, 6, 1)), training=True, rng=np.random.default_rng(0))
    g = backward(model, fwd, y)
    expected = np.mean(softmax(model.dense2.biases) - np.eye(3)[y], axis=0)
    np.testing.assert_allclose(g["dense2.biases"], expected, rtol=0, atol=1e-15)


def test_duplicated_sample_same_gradient():
    model = small_model(seed=4, dropout_rates=(0.0, 0.0))
    x = np.random.default_rng(5).normal(size=(1, 6, 6, 1))
    y = np.array([2])
    one = backward(model, forward(model, x, training=True), y)
    two = backward(model, forward(model, np.concatenate([x, x]), training=True), np.array([2, 2]))
    for name in one:
        np.testing.assert_allclose(two[name], one[name], rtol=1e-12, atol=1e-15)


def test_backward_requires_training_forward():
    model = small_model()
    x = np.zeros((2, 6, 6, 1))
    with pytest.raises(StateError):
        backward(model, forward(model, x, training=False), [0, 1])
    with pytest.raises(StateError):
        backward(model, None, [0, 1])
    with pytest.raises(StateError):
        backward(model, forward(model, x, training=True, rng=np.random.default_rng(0)), [0, 1, 2])


def _toy_data():
    x = np.zeros((20, 30, 30, 1))
    x[10:] = 1.0
    y = np.array([0] * 10 + [1] * 10)
    return x, y


TOY = ModelConfig(epochs=30, batch_size=4, learning_rate=0.01, seed=0, micro_batch=20)


def test_zero_epochs_returns_initial_model():
    cfg = ModelConfig(epochs=0, seed=9)
    model, report = train(_toy_data(), cfg)
    assert report.epochs == 0
    assert np.array_equal(model.flat_params(), init_model(cfg).flat_params())


def test_train_rejects_empty():
    with pytest.raises(ValidationError):
        train((np.zeros((0, 30, 30, 1)), np.zeros(0, dtype=int)), TOY)


@pytest.fixture(scope="module")
def toy_model():
    return train(_toy_data(), TOY)


def test_toy_separable_reaches_full_accuracy(toy_model):
    model, report = toy_model
    x, y = _toy_data()
    assert report.epochs == 30
    assert np.array_equal(np.argmax(predict_proba(model, x), axis=1), y)
    assert report.loss[-1] < report.loss[0]
    label, probs = predict(model, ChartImage(np.ones((30, 30), dtype=bool)))
    assert label is TrendLabel.BUY and probs.sum() == pytest.approx(1.0)


def test_training_is_deterministic(toy_model):
    small = ModelConfig(epochs=2, batch_size=8, learning_rate=0.05, seed=3, architecture=SMALL, optimizer="adam")
    rng = np.random.default_rng(0)
    data = (rng.random((24, 6, 6, 1)), rng.integers(0, 3, 24))
    a, ra = train(data, small)
    b, rb = train(data, small)
    assert np.array_equal(a.flat_params(), b.flat_params())
    assert ra.loss == rb.loss
    c, _ = train(data, ModelConfig(**{**small.__dict__, "seed": 4}))
    assert not np.array_equal(a.flat_params(), c.flat_params())


def test_zero_model_predicts_uniform_hold():
    model = CnnModel.zeros(ModelConfig())
    label, probs = predict(model, ChartImage(np.ones((30, 30), dtype=bool)))
    assert label is TrendLabel.HOLD
    np.testing.assert_allclose(probs, [1 / 3] * 3, rtol=0, atol=1e-15)


def test_predict_is_pure(toy_model):
    model, _ = toy_model
    img = ChartImage(np.tri(30, dtype=bool))
    a, b = predict(model, img), predict(model, img)
    assert a[0] == b[0] and np.array_equal(a[1], b[1])


def test_save_load_round_trip():
    model = init_model(ModelConfig(seed=5))
    data = save_model(model)
    loaded = load_model(data)
    assert loaded.config == model.config
    assert np.array_equal(loaded.flat_params(), model.flat_params())
    assert save_model(loaded) == data


def test_save_load_trained_predictions(toy_model):
    model, _ = toy_model
    loaded = load_model(save_model(model), expected=Architecture())
    x, _ = _toy_data()
    assert np.array_equal(predict_proba(model, x), predict_proba(loaded, x))


def test_load_rejects_corruption():
    data = save_model(init_model(ModelConfig(architecture=SMALL)))
    with pytest.raises(ModelFormatError):
        load_model(data[: len(data) - 5])
    with pytest.raises(ModelFormatError):
        load_model(data[:10])
    with pytest.raises(ModelFormatError):
        load_model(b"XXXXXXXX" + data[8:])
    with pytest.raises(ModelFormatError):
        load_model(data + b"\0")
    with pytest.raises(ModelFormatError):
        load_model(data, expected=Architecture())
