import numpy as np
import pytest

from synthrl.nn import (
    Adam,
    FrozenNetworkError,
    Network,
    affine,
    clip_grad_norm,
    mc_forward,
    make_dropout_masks,
    dropout,
    activation,
    Activation,
)


def test_zero_gradient_leaves_parameters_unchanged():
    net = Network([affine(3, 2)], seed=1)
    before = net.get_values()
    opt = Adam(net, learning_rate=0.1)
    net.zero_grad()
    opt.step()
    after = net.get_values()
    assert all(np.array_equal(a, b) for a, b in zip(before, after))
    assert opt.state.step_count == 1
    assert all(np.all(m == 0.0) for m in opt.state.first_moment)


def test_first_step_matches_hand_formula():
    net = Network([affine(1, 1)], seed=2)
    net.params[0]["W"].values[...] = 0.5
    net.params[0]["b"].values[...] = 0.0
    g = 0.3
    net.params[0]["W"].grad[...] = g
    lr, b1, b2, eps = 0.01, 0.9, 0.999, 1e-8
    opt = Adam(net, learning_rate=lr, beta1=b1, beta2=b2, eps=eps)
    opt.step()
    # bias correction at t=1: m_hat = g, v_hat = g^2
    expected = 0.5 - lr * g / (np.sqrt(g * g) + eps)
    assert net.params[0]["W"].values[0, 0] == pytest.approx(expected, rel=1e-12)


def test_zero_learning_rate_keeps_parameters():
    net = Network([affine(2, 2)], seed=3)
    before = net.get_values()
    for p in net.parameters():
        p.grad[...] = 1.0
    Adam(net, learning_rate=0.0).step()
    after = net.get_values()
    assert all(np.array_equal(a, b) for a, b in zip(before, after))


def test_nonfinite_gradient_aborts_with_tensor_name():
    net = Network([affine(2, 2)], seed=4)
    net.params[0]["W"].grad[0, 0] = np.nan
    with pytest.raises(FloatingPointError, match="'W'"):
        Adam(net).step()


def test_frozen_network_rejects_steps():
    net = Network([affine(2, 2)], seed=5)
    opt = Adam(net)
    net.freeze()
    with pytest.raises(FrozenNetworkError):
        opt.step()
    with pytest.raises(FrozenNetworkError):
        net.set_values(net.get_values())


def test_clip_grad_norm():
    net = Network([affine(2, 2)], seed=6)
    for p in net.parameters():
        p.grad[...] = 3.0
    norm = clip_grad_norm(net.parameters(), 1.0)
    assert norm > 1.0
    clipped = np.sqrt(sum(float(np.sum(p.grad**2)) for p in net.parameters()))
    assert clipped == pytest.approx(1.0, rel=1e-9)


def test_optimizer_determinism():
    def run():
        net = Network([affine(2, 2)], seed=7)
        opt = Adam(net, learning_rate=0.05)
        rng = np.random.default_rng(0)
        for _ in range(10):
            x = rng.normal(size=(4, 2))
            y, _, cache = net.forward(x, want_cache=True)
            net.zero_grad()
            net.backward(cache, 2.0 * y / y.size)
            opt.step()
        return net.checksum()

    assert run() == run()


class TestMCForward:
    def test_rate_zero_outputs_identical(self):
        net = Network([affine(2, 4), dropout(4, 0.0), affine(4, 2)], seed=8)
        with pytest.raises(ValueError):
            # rate-0 dropout gives degenerate variance; rejected
            mc_forward(net, np.ones(2), 3, 1)

    def test_k_default_three_passes(self):
        net = Network([affine(2, 4), dropout(4, 0.5), affine(4, 2)], seed=9)
        outs = mc_forward(net, np.ones(2), 3, 11)
        assert len(outs) == 3

    def test_requires_dropout_layer(self):
        net = Network([affine(2, 2)], seed=10)
        with pytest.raises(ValueError, match="dropout"):
            mc_forward(net, np.ones(2), 3, 1)

    def test_bit_identical_given_seed(self):
        net = Network([affine(2, 4), dropout(4, 0.5), affine(4, 2)], seed=11)
        a = mc_forward(net, np.ones(2), 4, 123)
        b = mc_forward(net, np.ones(2), 4, 123)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_identical_mask_hook_gives_zero_variance(self):
        net = Network([affine(2, 4), dropout(4, 0.5), affine(4, 2)], seed=12)
        outs = mc_forward(net, np.ones(2), 3, 7, identical_masks=True)
        assert np.var(np.stack(outs), axis=0).max() == 0.0
