"""Layer kinds, their parameters, and hand-written forward/backward kernels.

Supported kinds: affine, elementwise activation, inverted dropout, a
long-memory cell (LSTM-style, with a cell vector) and a gated cell
(GRU-style, hidden only). Recurrent kernels advance exactly one time step
per call; sequence processing is the caller threading RecurrentState.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..seeding import rng_for
from .tensor import ParamTensor


class LayerKind(str, Enum):
    AFFINE = "affine"
    ACTIVATION = "activation"
    DROPOUT = "dropout"
    LONG_MEMORY = "long-memory-cell"
    GATED = "gated-cell"


class Activation(str, Enum):
    TANH = "tanh"
    RELU = "relu"
    SIGMOID = "sigmoid"
    IDENTITY = "identity"


RECURRENT_KINDS = (LayerKind.LONG_MEMORY, LayerKind.GATED)


@dataclass(frozen=True)
class LayerSpec:
    """Static description of one layer; owns no parameters itself."""

    kind: LayerKind
    in_dim: int
    out_dim: int
    activation: Activation = Activation.IDENTITY
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.in_dim <= 0 or self.out_dim <= 0:
            raise ValueError(f"layer dimensions must be positive, got {self}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if self.kind in (LayerKind.ACTIVATION, LayerKind.DROPOUT) and self.in_dim != self.out_dim:
            raise ValueError(f"{self.kind.value} layers require in_dim == out_dim")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "activation": self.activation.value,
            "dropout_rate": self.dropout_rate,
        }

    @staticmethod
    def from_dict(d: dict) -> "LayerSpec":
        return LayerSpec(
            kind=LayerKind(d["kind"]),
            in_dim=int(d["in_dim"]),
            out_dim=int(d["out_dim"]),
            activation=Activation(d["activation"]),
            dropout_rate=float(d["dropout_rate"]),
        )


def affine(in_dim: int, out_dim: int) -> LayerSpec:
    return LayerSpec(LayerKind.AFFINE, in_dim, out_dim)


def activation(dim: int, fn: Activation) -> LayerSpec:
    return LayerSpec(LayerKind.ACTIVATION, dim, dim, activation=fn)


def dropout(dim: int, rate: float) -> LayerSpec:
    return LayerSpec(LayerKind.DROPOUT, dim, dim, dropout_rate=rate)


def long_memory(in_dim: int, hidden: int) -> LayerSpec:
    return LayerSpec(LayerKind.LONG_MEMORY, in_dim, hidden)


def gated(in_dim: int, hidden: int) -> LayerSpec:
    return LayerSpec(LayerKind.GATED, in_dim, hidden)


@dataclass
class RecurrentState:
    """Per-layer recurrent carry: hidden always, cell only for long-memory."""

    hidden: np.ndarray
    cell: np.ndarray | None = None

    def copy(self) -> "RecurrentState":
        return RecurrentState(self.hidden.copy(), None if self.cell is None else self.cell.copy())


@dataclass
class DropoutMask:
    """A keep/drop mask regenerable bit-exactly from (seed, rate, shape)."""

    seed: int
    rate: float
    mask: np.ndarray = field(repr=False)

    @staticmethod
    def generate(seed: int, rate: float, shape: tuple[int, ...]) -> "DropoutMask":
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
        rng = rng_for(seed)
        mask = (rng.random(shape) >= rate).astype(np.float64)
        return DropoutMask(seed=seed, rate=rate, mask=mask)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def apply_activation(fn: Activation, x: np.ndarray) -> np.ndarray:
    if fn is Activation.TANH:
        return np.tanh(x)
    if fn is Activation.RELU:
        return np.maximum(x, 0.0)
    if fn is Activation.SIGMOID:
        return _sigmoid(x)
    return x


def activation_grad(fn: Activation, x: np.ndarray, y: np.ndarray, dy: np.ndarray) -> np.ndarray:
    if fn is Activation.TANH:
        return dy * (1.0 - y * y)
    if fn is Activation.RELU:
        return dy * (x > 0.0)
    if fn is Activation.SIGMOID:
        return dy * y * (1.0 - y)
    return dy


def init_layer_params(spec: LayerSpec, seed: int) -> dict[str, ParamTensor]:
    """Uniform ±1/sqrt(fan_in) weights; long-memory forget-gate bias starts at 1."""
    rng = rng_for(seed)

    def uniform(name: str, fan_in: int, shape: tuple[int, ...]) -> ParamTensor:
        bound = 1.0 / np.sqrt(fan_in)
        return ParamTensor(name, rng.uniform(-bound, bound, size=shape))

    h = spec.out_dim
    if spec.kind is LayerKind.AFFINE:
        return {
            "W": uniform("W", spec.in_dim, (spec.in_dim, h)),
            "b": ParamTensor("b", np.zeros(h)),
        }
    if spec.kind is LayerKind.LONG_MEMORY:
        b = np.zeros(4 * h)
        b[h : 2 * h] = 1.0  # forget gate
        return {
            "Wx": uniform("Wx", spec.in_dim, (spec.in_dim, 4 * h)),
            "Wh": uniform("Wh", h, (h, 4 * h)),
            "b": ParamTensor("b", b),
        }
    if spec.kind is LayerKind.GATED:
        return {
            "Wx": uniform("Wx", spec.in_dim, (spec.in_dim, 3 * h)),
            "Wh": uniform("Wh", h, (h, 3 * h)),
            "b": ParamTensor("b", np.zeros(3 * h)),
        }
    return {}


# ---------------------------------------------------------------------------
# Forward/backward kernels. All operate on batched rows (B, dim); caches hold
# exactly what the matching backward needs.
# ---------------------------------------------------------------------------


def affine_forward(params, x):
    y = x @ params["W"].values + params["b"].values
    return y, {"x": x}


def affine_backward(params, cache, dy):
    x = cache["x"]
    params["W"].grad += x.T @ dy
    params["b"].grad += dy.sum(axis=0)
    return dy @ params["W"].values.T


def activation_forward(spec, x):
    y = apply_activation(spec.activation, x)
    return y, {"x": x, "y": y}


def activation_backward(spec, cache, dy):
    return activation_grad(spec.activation, cache["x"], cache["y"], dy)


def dropout_forward(spec, x, mask: DropoutMask | None, training: bool):
    # Inverted dropout: train-time scaling by 1/(1-rate), identity at eval.
    # No mask supplied means no dropout even in training mode.
    if not training or mask is None or spec.dropout_rate == 0.0:
        return x, {"scaled_mask": None}
    if mask.mask.shape not in (x.shape, x.shape[1:]):
        raise ValueError(
            f"dropout mask shape {mask.mask.shape} does not match input {x.shape}"
        )
    scaled = mask.mask / (1.0 - mask.rate)
    return x * scaled, {"scaled_mask": scaled}


def dropout_backward(cache, dy):
    scaled = cache["scaled_mask"]
    return dy if scaled is None else dy * scaled


def long_memory_forward(params, x, state: RecurrentState):
    h_prev, c_prev = state.hidden, state.cell
    n = params["b"].values.size // 4
    pre = x @ params["Wx"].values + h_prev @ params["Wh"].values + params["b"].values
    i = _sigmoid(pre[:, :n])
    f = _sigmoid(pre[:, n : 2 * n])
    g = np.tanh(pre[:, 2 * n : 3 * n])
    o = _sigmoid(pre[:, 3 * n :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    cache = {"x": x, "h_prev": h_prev, "c_prev": c_prev, "i": i, "f": f, "g": g, "o": o, "tc": tc}
    return h, RecurrentState(h, c), cache


def long_memory_backward(params, cache, dh, dc):
    i, f, g, o, tc = cache["i"], cache["f"], cache["g"], cache["o"], cache["tc"]
    if dc is None:
        dc = np.zeros_like(dh)
    do = dh * tc
    dc_total = dc + dh * o * (1.0 - tc * tc)
    df = dc_total * cache["c_prev"]
    di = dc_total * g
    dg = dc_total * i
    dc_prev = dc_total * f
    dpre = np.concatenate(
        [
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ],
        axis=1,
    )
    params["Wx"].grad += cache["x"].T @ dpre
    params["Wh"].grad += cache["h_prev"].T @ dpre
    params["b"].grad += dpre.sum(axis=0)
    dx = dpre @ params["Wx"].values.T
    dh_prev = dpre @ params["Wh"].values.T
    return dx, dh_prev, dc_prev


def gated_forward(params, x, state: RecurrentState):
    # Update convention: h' = (1 - z) * h + z * g with candidate g built on r * h.
    h_prev = state.hidden
    n = params["b"].values.size // 3
    Wx, Wh, b = params["Wx"].values, params["Wh"].values, params["b"].values
    pre_zr = x @ Wx[:, : 2 * n] + h_prev @ Wh[:, : 2 * n] + b[: 2 * n]
    z = _sigmoid(pre_zr[:, :n])
    r = _sigmoid(pre_zr[:, n:])
    hr = r * h_prev
    pre_g = x @ Wx[:, 2 * n :] + hr @ Wh[:, 2 * n :] + b[2 * n :]
    g = np.tanh(pre_g)
    h = (1.0 - z) * h_prev + z * g
    cache = {"x": x, "h_prev": h_prev, "z": z, "r": r, "g": g, "hr": hr}
    return h, RecurrentState(h), cache


def gated_backward(params, cache, dh):
    x, h_prev = cache["x"], cache["h_prev"]
    z, r, g, hr = cache["z"], cache["r"], cache["g"], cache["hr"]
    n = z.shape[1]
    Wx, Wh = params["Wx"].values, params["Wh"].values

    dz = dh * (g - h_prev)
    dg = dh * z
    dh_prev = dh * (1.0 - z)

    dpre_g = dg * (1.0 - g * g)
    params["Wx"].grad[:, 2 * n :] += x.T @ dpre_g
    params["Wh"].grad[:, 2 * n :] += hr.T @ dpre_g
    params["b"].grad[2 * n :] += dpre_g.sum(axis=0)
    dhr = dpre_g @ Wh[:, 2 * n :].T
    dr = dhr * h_prev
    dh_prev = dh_prev + dhr * r

    dpre_z = dz * z * (1.0 - z)
    dpre_r = dr * r * (1.0 - r)
    dpre_zr = np.concatenate([dpre_z, dpre_r], axis=1)
    params["Wx"].grad[:, : 2 * n] += x.T @ dpre_zr
    params["Wh"].grad[:, : 2 * n] += h_prev.T @ dpre_zr
    params["b"].grad[: 2 * n] += dpre_zr.sum(axis=0)

    dx = dpre_g @ Wx[:, 2 * n :].T + dpre_zr @ Wx[:, : 2 * n].T
    dh_prev = dh_prev + dpre_zr @ Wh[:, : 2 * n].T
    return dx, dh_prev
