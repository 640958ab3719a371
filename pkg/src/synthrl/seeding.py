"""Deterministic seed derivation.

Every source of randomness in the pipeline flows from one run seed through
`derive_seed`, so adding a stage (or reordering rollouts within one) never
perturbs the random streams of the others.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output step for the state ``x``."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(base: int, *labels: int | str) -> int:
    """Mix string/int labels into ``base``, returning a 64-bit seed.

    Labels are folded in order, so ``derive_seed(s, "stage", 3)`` is stable
    no matter what other labels exist elsewhere in the program.
    """
    s = base & _MASK64
    for label in labels:
        key = fnv1a64(label) if isinstance(label, str) else label & _MASK64
        s = splitmix64(s ^ key)
    return s


def rng_for(base: int, *labels: int | str) -> np.random.Generator:
    """A PCG64 generator seeded from ``derive_seed(base, *labels)``."""
    return np.random.Generator(np.random.PCG64(derive_seed(base, *labels)))
