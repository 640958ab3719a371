"""Versioned binary checkpoint container.

Layout, all little-endian:

    bytes 0..7    magic ``SRLCKPT1``
    bytes 8..15   uint64 header length H
    bytes 16..16+H  UTF-8 JSON header
    remainder     parameter payload, raw ``<f8`` arrays

The header records, per network, the full layer-spec list and an array
index (layer, parameter name, shape, element offset), plus a
``payload_sha256`` content checksum and a free-form ``meta`` block.
Round-trips are bit-exact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .layers import LayerSpec
from .network import Network

MAGIC = b"SRLCKPT1"
FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path: str | Path, nets: dict[str, Network], meta: dict | None = None) -> None:
    chunks: list[bytes] = []
    offset = 0
    networks = {}
    for name, net in sorted(nets.items()):
        arrays = []
        for layer_idx, layer_params in enumerate(net.params):
            for pname, tensor in layer_params.items():
                raw = np.ascontiguousarray(tensor.values, dtype="<f8").tobytes()
                arrays.append(
                    {
                        "layer": layer_idx,
                        "param": pname,
                        "shape": list(tensor.values.shape),
                        "offset": offset,
                        "count": tensor.numel(),
                    }
                )
                chunks.append(raw)
                offset += tensor.numel()
        networks[name] = {
            "specs": [s.to_dict() for s in net.specs],
            "seed": net.seed,
            "frozen": net.frozen,
            "arrays": arrays,
        }
    payload = b"".join(chunks)
    header = {
        "format_version": FORMAT_VERSION,
        "networks": networks,
        "meta": meta or {},
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(header_bytes).to_bytes(8, "little"))
        fh.write(header_bytes)
        fh.write(payload)


def load_checkpoint(path: str | Path) -> tuple[dict[str, Network], dict]:
    blob = Path(path).read_bytes()
    if blob[:8] != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a checkpoint file")
    header_len = int.from_bytes(blob[8:16], "little")
    header = json.loads(blob[16 : 16 + header_len].decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format version {header.get('format_version')}"
        )
    payload = blob[16 + header_len :]
    digest = hashlib.sha256(payload).hexdigest()
    if digest != header["payload_sha256"]:
        raise CheckpointError(f"{path}: payload checksum mismatch")

    flat = np.frombuffer(payload, dtype="<f8")
    nets: dict[str, Network] = {}
    for name, entry in header["networks"].items():
        specs = [LayerSpec.from_dict(d) for d in entry["specs"]]
        net = Network(specs, seed=int(entry["seed"]))
        for arr in entry["arrays"]:
            tensor = net.params[arr["layer"]][arr["param"]]
            values = flat[arr["offset"] : arr["offset"] + arr["count"]]
            tensor.values[...] = values.reshape(arr["shape"])
        if entry.get("frozen"):
            net.freeze()
        nets[name] = net
    return nets, header.get("meta", {})
