import numpy as np
import pytest

from synthrl.nn import (
    Activation,
    DimensionMismatch,
    LayerSpec,
    LayerKind,
    Network,
    activation,
    affine,
    dropout,
    gated,
    long_memory,
    make_dropout_masks,
)


def test_affine_identity():
    net = Network([affine(2, 2)], seed=1)
    net.params[0]["W"].values[...] = np.eye(2)
    net.params[0]["b"].values[...] = 0.0
    y, _ = net.forward(np.array([1.0, 2.0]))
    assert np.array_equal(y, np.array([1.0, 2.0]))


def test_gated_cell_zero_weights_keeps_zero_hidden():
    # sigmoid(0)=0.5 update gate, tanh(0)=0 candidate -> hidden stays zero
    net = Network([gated(3, 5)], seed=2)
    for p in net.parameters():
        p.values[...] = 0.0
    y, states = net.forward(np.array([0.7, -2.0, 3.1]))
    assert np.all(y == 0.0)
    assert np.all(states[0].hidden == 0.0)


def test_dropout_rate_zero_is_identity():
    net = Network([dropout(4, 0.0)], seed=3)
    x = np.array([1.0, -2.0, 3.0, 0.5])
    masks = make_dropout_masks(net, 7, batch=None)
    y, _ = net.forward(x, masks=masks, training=True)
    assert np.array_equal(y, x)


def test_dropout_only_applied_when_training_and_masked():
    net = Network([dropout(4, 0.5)], seed=4)
    x = np.array([1.0, -2.0, 3.0, 0.5])
    masks = make_dropout_masks(net, 7, batch=None)
    y_eval, _ = net.forward(x, masks=masks, training=False)
    y_nomask, _ = net.forward(x, masks=None, training=True)
    assert np.array_equal(y_eval, x)
    assert np.array_equal(y_nomask, x)
    y_train, _ = net.forward(x, masks=masks, training=True)
    assert not np.array_equal(y_train, x)


def test_dimension_mismatch_names_layer():
    net = Network([affine(3, 4), affine(4, 2)], seed=5)
    with pytest.raises(DimensionMismatch, match="layer 0"):
        net.forward(np.zeros(5))
    with pytest.raises(DimensionMismatch, match="layer 1"):
        Network([affine(3, 4), affine(5, 2)], seed=5)


def test_layer_spec_validation():
    with pytest.raises(ValueError):
        LayerSpec(LayerKind.AFFINE, 0, 3)
    with pytest.raises(ValueError):
        LayerSpec(LayerKind.DROPOUT, 3, 3, dropout_rate=1.0)
    with pytest.raises(ValueError):
        LayerSpec(LayerKind.ACTIVATION, 3, 4)


def test_recurrent_unrolling_matches_threaded_single_steps():
    rng = np.random.default_rng(0)
    net = Network([long_memory(2, 4), gated(4, 3), affine(3, 2)], seed=6)
    seq = rng.normal(size=(6, 2))

    states = None
    outs = []
    for t in range(6):
        y, states = net.forward(seq[t], states=states)
        outs.append(y)

    # re-run from scratch; determinism makes this the unrolled reference
    states2 = net.init_state()
    outs2 = []
    for t in range(6):
        y2, states2 = net.forward(seq[t], states=states2)
        outs2.append(y2)
    assert all(np.array_equal(a, b) for a, b in zip(outs, outs2))


def test_forward_determinism_bit_exact():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(5, 3))
    net_a = Network([affine(3, 8), activation(8, Activation.TANH), affine(8, 2)], seed=11)
    net_b = Network([affine(3, 8), activation(8, Activation.TANH), affine(8, 2)], seed=11)
    ya, _ = net_a.forward(x)
    yb, _ = net_b.forward(x)
    assert np.array_equal(ya, yb)
    assert net_a.checksum() == net_b.checksum()


def test_batch_matches_per_row():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(4, 3))
    net = Network([affine(3, 6), activation(6, Activation.SIGMOID), affine(6, 2)], seed=12)
    batch_y, _ = net.forward(x)
    for i in range(4):
        yi, _ = net.forward(x[i])
        assert np.allclose(batch_y[i], yi, atol=1e-12)
