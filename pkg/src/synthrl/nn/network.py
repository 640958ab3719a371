"""A network is an ordered layer stack with single-step recurrent semantics.

`forward` advances every recurrent layer by one time step; running a
sequence means calling it T times while threading the returned states.
`backward` mirrors one forward call and both accumulates parameter
gradients and returns the gradients flowing into the inputs and the
previous recurrent states, which is all that is needed for full
backpropagation through time driven by the caller.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..seeding import derive_seed
from .layers import (
    Activation,
    DropoutMask,
    LayerKind,
    LayerSpec,
    RECURRENT_KINDS,
    RecurrentState,
    activation_backward,
    activation_forward,
    affine_backward,
    affine_forward,
    dropout_backward,
    dropout_forward,
    gated_backward,
    gated_forward,
    init_layer_params,
    long_memory_backward,
    long_memory_forward,
)
from .tensor import ParamTensor


class FrozenNetworkError(RuntimeError):
    """Raised when a parameter-mutating call reaches a frozen network."""


class DimensionMismatch(ValueError):
    """Raised with the offending layer index when shapes disagree."""

    def __init__(self, layer_index: int, message: str):
        self.layer_index = layer_index
        super().__init__(f"layer {layer_index}: {message}")


class Network:
    def __init__(self, specs: list[LayerSpec], seed: int):
        if not specs:
            raise ValueError("a network needs at least one layer")
        for i in range(1, len(specs)):
            if specs[i].in_dim != specs[i - 1].out_dim:
                raise DimensionMismatch(
                    i,
                    f"in_dim {specs[i].in_dim} does not match previous out_dim "
                    f"{specs[i - 1].out_dim}",
                )
        self.specs = list(specs)
        self.seed = seed
        self.params: list[dict[str, ParamTensor]] = [
            init_layer_params(spec, derive_seed(seed, "layer", i, spec.kind.value))
            for i, spec in enumerate(self.specs)
        ]
        self.frozen = False

    # -- introspection ------------------------------------------------------

    @property
    def in_dim(self) -> int:
        return self.specs[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.specs[-1].out_dim

    def parameters(self) -> list[ParamTensor]:
        return [p for layer in self.params for p in layer.values()]

    def num_params(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def recurrent_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.specs) if s.kind in RECURRENT_KINDS]

    def dropout_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.specs) if s.kind is LayerKind.DROPOUT]

    def has_dropout(self) -> bool:
        return any(s.dropout_rate > 0.0 for s in self.specs if s.kind is LayerKind.DROPOUT)

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for p in self.parameters():
            digest.update(np.ascontiguousarray(p.values, dtype="<f8").tobytes())
        return digest.hexdigest()

    # -- parameter management ----------------------------------------------

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def freeze(self) -> None:
        self.frozen = True

    def get_values(self) -> list[np.ndarray]:
        return [p.values.copy() for p in self.parameters()]

    def set_values(self, values: list[np.ndarray]) -> None:
        if self.frozen:
            raise FrozenNetworkError("cannot set parameters of a frozen network")
        own = self.parameters()
        if len(values) != len(own):
            raise ValueError(f"expected {len(own)} arrays, got {len(values)}")
        for p, v in zip(own, values):
            if p.values.shape != v.shape:
                raise ValueError(f"shape mismatch for {p.name}: {p.values.shape} vs {v.shape}")
            p.values[...] = v

    # -- state handling ------------------------------------------------------

    def init_state(self, batch: int | None = None) -> list[RecurrentState]:
        """Zero states for the recurrent layers, in layer order."""
        states = []
        for i in self.recurrent_indices():
            h = self.specs[i].out_dim
            shape = (h,) if batch is None else (batch, h)
            cell = np.zeros(shape) if self.specs[i].kind is LayerKind.LONG_MEMORY else None
            states.append(RecurrentState(np.zeros(shape), cell))
        return states

    # -- forward / backward --------------------------------------------------

    def forward(
        self,
        x: np.ndarray,
        states: list[RecurrentState] | None = None,
        masks: list[DropoutMask | None] | None = None,
        training: bool = False,
        want_cache: bool = False,
    ):
        """One step through the stack.

        ``states`` holds one RecurrentState per recurrent layer (in layer
        order); ``masks`` one entry per dropout layer. Returns
        ``(output, new_states)`` or ``(output, new_states, cache)`` when
        ``want_cache`` is set.
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise DimensionMismatch(0, f"input width {x.shape[-1]} != in_dim {self.in_dim}")

        rec_idx = self.recurrent_indices()
        if states is None:
            states = self.init_state(batch=x.shape[0])
        if len(states) != len(rec_idx):
            raise ValueError(f"expected {len(rec_idx)} recurrent states, got {len(states)}")
        drop_idx = self.dropout_indices()
        if masks is not None and len(masks) != len(drop_idx):
            raise ValueError(f"expected {len(drop_idx)} dropout masks, got {len(masks)}")

        new_states: list[RecurrentState] = []
        caches: list[dict] = []
        rec_pos = 0
        drop_pos = 0
        for i, spec in enumerate(self.specs):
            if x.shape[1] != spec.in_dim:
                raise DimensionMismatch(i, f"got width {x.shape[1]}, expected {spec.in_dim}")
            if spec.kind is LayerKind.AFFINE:
                x, cache = affine_forward(self.params[i], x)
            elif spec.kind is LayerKind.ACTIVATION:
                x, cache = activation_forward(spec, x)
            elif spec.kind is LayerKind.DROPOUT:
                mask = masks[drop_pos] if masks is not None else None
                x, cache = dropout_forward(spec, x, mask, training)
                drop_pos += 1
            elif spec.kind is LayerKind.LONG_MEMORY:
                st = self._lift_state(states[rec_pos], x.shape[0])
                x, new_state, cache = long_memory_forward(self.params[i], x, st)
                new_states.append(new_state)
                rec_pos += 1
            else:  # gated
                st = self._lift_state(states[rec_pos], x.shape[0])
                x, new_state, cache = gated_forward(self.params[i], x, st)
                new_states.append(new_state)
                rec_pos += 1
            caches.append(cache)
        if not np.isfinite(x).all():
            raise FloatingPointError("non-finite network output")
        out = x[0] if single else x
        if single:
            new_states = [
                RecurrentState(s.hidden[0], None if s.cell is None else s.cell[0])
                for s in new_states
            ]
        if want_cache:
            return out, new_states, {"layers": caches, "single": single}
        return out, new_states

    @staticmethod
    def _lift_state(state: RecurrentState, batch: int) -> RecurrentState:
        h = state.hidden
        c = state.cell
        if h.ndim == 1:
            h = np.broadcast_to(h, (batch, h.shape[0]))
            c = None if c is None else np.broadcast_to(c, (batch, c.shape[0]))
            return RecurrentState(np.array(h), None if c is None else np.array(c))
        return state

    def backward(
        self,
        cache: dict,
        output_grad: np.ndarray,
        state_grads: list[RecurrentState] | None = None,
    ):
        """Backprop one cached forward call.

        ``state_grads`` carries the gradients flowing into this step's NEW
        recurrent states (from later time steps); the return value is
        ``(input_grad, prev_state_grads)`` with parameter gradients
        accumulated in place. Repeated calls without `zero_grad` accumulate.
        """
        if cache is None or "layers" not in cache:
            raise ValueError("backward requires the cache of a matching forward pass")
        layer_caches = cache["layers"]
        dy = np.asarray(output_grad, dtype=np.float64)
        if cache["single"] and dy.ndim == 1:
            dy = dy[None, :]

        rec_idx = self.recurrent_indices()
        if state_grads is None:
            state_grads = [None] * len(rec_idx)
        if len(state_grads) != len(rec_idx):
            raise ValueError(f"expected {len(rec_idx)} state grads, got {len(state_grads)}")
        prev_state_grads: list[RecurrentState] = [None] * len(rec_idx)

        rec_pos = len(rec_idx) - 1
        for i in range(len(self.specs) - 1, -1, -1):
            spec = self.specs[i]
            lc = layer_caches[i]
            if spec.kind is LayerKind.AFFINE:
                dy = affine_backward(self.params[i], lc, dy)
            elif spec.kind is LayerKind.ACTIVATION:
                dy = activation_backward(spec, lc, dy)
            elif spec.kind is LayerKind.DROPOUT:
                dy = dropout_backward(lc, dy)
            elif spec.kind is LayerKind.LONG_MEMORY:
                sg = state_grads[rec_pos]
                dh_extra = None if sg is None else sg.hidden
                dc_extra = None if sg is None else sg.cell
                dh = dy if dh_extra is None else dy + dh_extra
                dy, dh_prev, dc_prev = long_memory_backward(self.params[i], lc, dh, dc_extra)
                prev_state_grads[rec_pos] = RecurrentState(dh_prev, dc_prev)
                rec_pos -= 1
            else:  # gated
                sg = state_grads[rec_pos]
                dh = dy if sg is None else dy + sg.hidden
                dy, dh_prev = gated_backward(self.params[i], lc, dh)
                prev_state_grads[rec_pos] = RecurrentState(dh_prev)
                rec_pos -= 1
        dx = dy[0] if cache["single"] else dy
        return dx, prev_state_grads


def mask_seed_for(pass_seed: int, dropout_position: int) -> int:
    """Mask seed for the j-th dropout layer of one stochastic pass.

    The first dropout layer uses the pass seed itself; further layers use
    derived, decorrelated seeds.
    """
    if dropout_position == 0:
        return pass_seed
    return derive_seed(pass_seed, "dropout-layer", dropout_position)


def make_dropout_masks(net: Network, pass_seed: int, batch: int | None) -> list[DropoutMask]:
    masks = []
    for j, idx in enumerate(net.dropout_indices()):
        spec = net.specs[idx]
        shape = (spec.in_dim,) if batch is None else (batch, spec.in_dim)
        masks.append(DropoutMask.generate(mask_seed_for(pass_seed, j), spec.dropout_rate, shape))
    return masks


def mc_forward(
    net: Network,
    x: np.ndarray,
    k: int,
    base_seed: int,
    states: list[RecurrentState] | None = None,
    identical_masks: bool = False,
) -> list[np.ndarray]:
    """k stochastic forward passes with per-pass dropout masks.

    Pass ``i`` is seeded with ``base_seed + i``; the output list is
    reproducible bit-exactly from ``(x, k, base_seed)``. ``identical_masks``
    is a degenerate hook for tests: every pass reuses the pass-0 masks.
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if not net.has_dropout():
        raise ValueError("mc_forward requires at least one dropout layer with nonzero rate")
    x = np.asarray(x, dtype=np.float64)
    batch = None if x.ndim == 1 else x.shape[0]
    outputs = []
    for i in range(k):
        pass_seed = base_seed if identical_masks else base_seed + i
        masks = make_dropout_masks(net, pass_seed, batch)
        init = states if states is None else [s.copy() for s in states]
        y, _ = net.forward(x, states=init, masks=masks, training=True)
        outputs.append(y)
    return outputs
