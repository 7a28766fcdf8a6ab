import numpy as np
import pytest

from src.score_network.mlp import MlpNet, TapeError
from src.score_network.serialization import trunk_from_dict, trunk_to_dict
from src.score_network.tests.conftest import randomize


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-4)


def test_layer_dims_chain(rng):
    net = MlpNet([4, 6, 3], rng)
    assert net.shapes() == [(4, 6), (6,), (6, 3), (3,)]
    assert net.in_dim == 4 and net.out_dim == 3


def test_invalid_construction():
    with pytest.raises(ValueError):
        MlpNet([4])
    with pytest.raises(ValueError):
        MlpNet([4, 2], activation="relu6")


def test_zero_last_layer_outputs_zero(rng):
    net = MlpNet([4, 8, 3], rng)
    np.testing.assert_array_equal(net.evaluate(rng.normal(size=(5, 4))), 0.0)


def test_forward_matches_evaluate(rng):
    net = randomize(MlpNet([4, 8, 3], rng), rng)
    x = rng.normal(size=(5, 4))
    np.testing.assert_array_equal(net.forward(x), net.evaluate(x))


def test_wrong_input_width(rng):
    with pytest.raises(ValueError):
        MlpNet([4, 3], rng).forward(np.zeros((2, 5)))


def test_linear_layer_gradient(rng):
    net = MlpNet([3, 2], rng, zero_last=False)
    x = rng.normal(size=(1, 3))
    y = rng.normal(size=(1, 2))
    out = net.forward(x)
    # loss = 1/2 |W x - y|^2; upstream is the residual
    grads = net.backward(out - y)
    np.testing.assert_allclose(grads.params[0], np.outer(x[0], out[0] - y[0]))
    np.testing.assert_allclose(grads.params[1], (out - y)[0])


def test_zero_upstream_gives_zero_gradients(rng):
    net = randomize(MlpNet([4, 8, 8, 3], rng), rng)
    net.forward(rng.normal(size=(3, 4)))
    grads = net.backward(np.zeros((3, 3)))
    for g in grads.params:
        np.testing.assert_array_equal(g, 0.0)


def test_backward_without_forward(rng):
    net = MlpNet([4, 3], rng)
    with pytest.raises(TapeError):
        net.backward(np.zeros((1, 3)))
    net.forward(np.zeros((1, 4)))
    net.backward(np.zeros((1, 3)))
    with pytest.raises(TapeError):
        net.backward(np.zeros((1, 3)))


def test_gradients_match_finite_differences(rng):
    net = randomize(MlpNet([4, 7, 6, 3], rng), rng)
    x = rng.normal(size=(4, 4))
    c = rng.normal(size=(4, 3))

    def loss() -> float:
        return float(np.sum(c * net.evaluate(x)))

    net.zero_grad()
    net.forward(x)
    grads = net.backward(c)
    flat = [
        (k, idx)
        for k, p in enumerate(net.params)
        for idx in np.ndindex(p.shape)
    ]
    picks = rng.choice(len(flat), size=100, replace=False)
    h = 1e-5
    for pick in picks:
        k, idx = flat[pick]
        original = net.params[k][idx]
        net.params[k][idx] = original + h
        up = loss()
        net.params[k][idx] = original - h
        down = loss()
        net.params[k][idx] = original
        numeric = (up - down) / (2 * h)
        assert relative_error(grads.params[k][idx], numeric) < 1e-4


def test_input_gradient_matches_finite_differences(rng):
    net = randomize(MlpNet([4, 7, 3], rng), rng)
    x = rng.normal(size=(2, 4))
    c = rng.normal(size=(2, 3))
    net.forward(x)
    dx = net.backward(c).inputs
    h = 1e-5
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        up, down = np.sum(c * net.evaluate(xp)), np.sum(c * net.evaluate(xm))
        numeric = (up - down) / (2 * h)
        assert relative_error(dx[idx], numeric) < 1e-4


def test_gradients_accumulate_until_zeroed(rng):
    net = randomize(MlpNet([4, 5, 3], rng), rng)
    x, c = rng.normal(size=(2, 4)), rng.normal(size=(2, 3))
    net.forward(x)
    first = [g.copy() for g in net.backward(c).params]
    net.forward(x)
    second = net.backward(c).params
    for a, b in zip(first, second):
        np.testing.assert_allclose(b, 2 * a)
    net.zero_grad()
    for g in net.grads:
        np.testing.assert_array_equal(g, 0.0)


def test_trunk_dict_round_trip(rng):
    net = randomize(MlpNet([4, 5, 3], rng), rng)
    back = trunk_from_dict(trunk_to_dict(net))
    assert back.layer_dims == net.layer_dims
    for a, b in zip(back.params, net.params):
        np.testing.assert_array_equal(a, b)
    assert trunk_to_dict(back) == trunk_to_dict(net)


def test_trunk_dict_rejects_bad_shapes(rng):
    doc = trunk_to_dict(MlpNet([4, 5, 3], rng))
    doc["params"][0] = doc["params"][0][:-1]
    with pytest.raises(ValueError):
        trunk_from_dict(doc)
