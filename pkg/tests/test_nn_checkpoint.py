import numpy as np
import pytest

from synthrl.nn import (
    Activation,
    CheckpointError,
    Network,
    activation,
    affine,
    gated,
    load_checkpoint,
    long_memory,
    save_checkpoint,
)


def build_nets():
    enc = Network([long_memory(3, 4), gated(4, 5)], seed=1)
    head = Network([affine(5, 4), activation(4, Activation.TANH), affine(4, 2)], seed=2)
    return {"encoder": enc, "head": head}


def test_round_trip_bit_exact(tmp_path):
    nets = build_nets()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, nets, meta={"note": "unit", "value": 1.25})
    loaded, meta = load_checkpoint(path)
    assert meta == {"note": "unit", "value": 1.25}
    assert set(loaded) == {"encoder", "head"}
    for name in nets:
        assert loaded[name].checksum() == nets[name].checksum()
        for spec_a, spec_b in zip(loaded[name].specs, nets[name].specs):
            assert spec_a == spec_b


def test_frozen_flag_round_trips(tmp_path):
    nets = build_nets()
    nets["encoder"].freeze()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, nets)
    loaded, _ = load_checkpoint(path)
    assert loaded["encoder"].frozen
    assert not loaded["head"].frozen


def test_corrupted_payload_detected(tmp_path):
    nets = build_nets()
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, nets)
    blob = bytearray(path.read_bytes())
    blob[-5] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(CheckpointError, match="checksum"):
        load_checkpoint(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(path)


def test_save_is_deterministic(tmp_path):
    nets = build_nets()
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_checkpoint(p1, nets, meta={"k": 1})
    save_checkpoint(p2, nets, meta={"k": 1})
    assert p1.read_bytes() == p2.read_bytes()
