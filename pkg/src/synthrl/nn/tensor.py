"""Parameter storage for the network substrate."""

from __future__ import annotations

import numpy as np


class ParamTensor:
    """A named weight array with a parallel gradient accumulator.

    Values and gradients always share the same float64 shape; backward
    passes accumulate into ``grad`` until ``zero_grad`` is called.
    """

    __slots__ = ("name", "values", "grad")

    def __init__(self, name: str, values: np.ndarray):
        self.name = name
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.grad = np.zeros_like(self.values)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def numel(self) -> int:
        return int(self.values.size)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def assert_finite(self, context: str = "") -> None:
        if not np.isfinite(self.values).all():
            raise FloatingPointError(
                f"non-finite values in parameter '{self.name}' {context}".rstrip()
            )

    def __repr__(self) -> str:  # pragma: no cover
        return f"ParamTensor({self.name!r}, shape={self.shape})"
