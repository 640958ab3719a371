import numpy as np
import pytest

from synthrl.nn import (
    Activation,
    Network,
    activation,
    affine,
    dropout,
    gated,
    grad_check,
    long_memory,
    make_dropout_masks,
)


def mse_loss(x, target):
    """Build a loss_fn closure running forward+backward on fixed data."""

    def loss_fn(net):
        y, _, cache = net.forward(x, want_cache=True)
        diff = np.atleast_2d(y) - target
        loss = float(np.mean(diff**2))
        net.backward(cache, 2.0 * diff / diff.size)
        return loss

    return loss_fn


def sequence_loss(seq, target):
    def loss_fn(net):
        states, caches = None, []
        y = None
        for t in range(seq.shape[0]):
            y, states, cache = net.forward(seq[t], states=states, want_cache=True)
            caches.append(cache)
        diff = y - target
        loss = float(np.mean(diff**2))
        dy = 2.0 * diff / diff.size
        sg = None
        for t in range(len(caches) - 1, -1, -1):
            _, sg = net.backward(caches[t], dy, state_grads=sg)
            dy = np.zeros_like(dy)
        return loss

    return loss_fn


def test_gradients_zero_at_optimum():
    net = Network([affine(2, 2)], seed=1)
    x = np.array([[1.0, 2.0], [0.5, -1.0]])
    target, _ = net.forward(x)
    loss_fn = mse_loss(x, target)
    net.zero_grad()
    assert loss_fn(net) == 0.0
    for p in net.parameters():
        assert np.all(p.grad == 0.0)


def test_scalar_affine_hand_gradient():
    # y = w*x, loss = y^2, x=1, w=3 -> dL/dw = 2*y*x = 6
    net = Network([affine(1, 1)], seed=2)
    net.params[0]["W"].values[...] = 3.0
    net.params[0]["b"].values[...] = 0.0
    x = np.array([[1.0]])
    y, _, cache = net.forward(x, want_cache=True)
    net.zero_grad()
    net.backward(cache, 2.0 * y)
    assert net.params[0]["W"].grad[0, 0] == pytest.approx(6.0)


def test_backward_requires_cache():
    net = Network([affine(2, 2)], seed=3)
    with pytest.raises(ValueError, match="cache"):
        net.backward(None, np.zeros(2))


def test_backward_accumulates_without_zeroing():
    net = Network([affine(1, 1)], seed=4)
    net.params[0]["W"].values[...] = 3.0
    net.params[0]["b"].values[...] = 0.0
    x = np.array([[1.0]])
    y, _, cache = net.forward(x, want_cache=True)
    net.zero_grad()
    net.backward(cache, 2.0 * y)
    net.backward(cache, 2.0 * y)
    assert net.params[0]["W"].grad[0, 0] == pytest.approx(12.0)


def test_grad_check_quadratic_is_tiny():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 4))
    t = rng.normal(size=(3, 2))
    net = Network([affine(4, 2)], seed=5)
    assert grad_check(net, mse_loss(x, t)) < 1e-6


def test_grad_check_identity_chain():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(3, 4))
    t = rng.normal(size=(3, 4))
    net = Network(
        [affine(4, 4), activation(4, Activation.IDENTITY), affine(4, 4)], seed=6
    )
    assert grad_check(net, mse_loss(x, t)) < 1e-6


@pytest.mark.parametrize("draw", range(10))
def test_grad_check_two_layer_tanh_random_draws(draw):
    rng = np.random.default_rng(100 + draw)
    x = rng.normal(size=(4, 3))
    t = rng.normal(size=(4, 2))
    net = Network(
        [affine(3, 6), activation(6, Activation.TANH), affine(6, 2)],
        seed=200 + draw,
    )
    assert grad_check(net, mse_loss(x, t)) < 1e-4


@pytest.mark.parametrize("kind", ["long-memory", "gated"])
def test_grad_check_recurrent_over_sequence(kind):
    rng = np.random.default_rng(7)
    seq = rng.normal(size=(3, 4, 2))
    t = rng.normal(size=(4, 2))
    cell = long_memory(2, 4) if kind == "long-memory" else gated(2, 4)
    net = Network([cell, affine(4, 2)], seed=8)
    assert grad_check(net, sequence_loss(seq, t)) < 1e-4


def test_grad_check_with_dropout_mask_fixed():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(4, 3))
    t = rng.normal(size=(4, 2))
    net = Network(
        [affine(3, 6), activation(6, Activation.RELU), dropout(6, 0.4), affine(6, 2)],
        seed=10,
    )
    masks = make_dropout_masks(net, 55, batch=4)

    def loss_fn(n):
        y, _, cache = n.forward(x, masks=masks, training=True, want_cache=True)
        diff = y - t
        loss = float(np.mean(diff**2))
        n.backward(cache, 2.0 * diff / diff.size)
        return loss

    assert grad_check(net, loss_fn) < 1e-4


def test_grad_check_rejects_large_networks():
    net = Network([affine(120, 120)], seed=11)
    with pytest.raises(ValueError, match="limited"):
        grad_check(net, lambda n: 0.0)


def test_grad_check_rejects_nonfinite_loss():
    net = Network([affine(2, 2)], seed=12)
    with pytest.raises(FloatingPointError):
        grad_check(net, lambda n: float("nan"))
