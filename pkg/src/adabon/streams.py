"""Deterministic, splittable random streams.

Every random draw in an experiment comes from a Philox4x64-10 generator
(counter-based, as shipped with numpy) whose 64-bit key is derived from a
path of words::

    key = mix(... mix(mix(root) ^ w1) ^ w2 ...)

``mix`` is the SplitMix64 finalizer.  Integer words are taken modulo 2**64,
string words (purpose tags such as ``"matrix"``) are hashed with 64-bit
FNV-1a over their UTF-8 bytes.  A run ``r`` of batch ``b`` uses paths like
``(root, b, r, "matrix", i)``, so work items can be executed in any order
or in parallel without changing a single draw.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood); a bijection on 64-bit words."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return h


def _word(w) -> int:
    if isinstance(w, str):
        return fnv1a64(w)
    if isinstance(w, (bool, np.bool_)):
        raise TypeError("boolean stream words are ambiguous")
    return int(w) & MASK64


def derive_key(root: int, *words) -> int:
    """Fold ``words`` into ``root`` and return the 64-bit stream key."""
    state = mix64(_word(root))
    for w in words:
        state = mix64(state ^ _word(w))
    return state


def make_rng(root: int, *words) -> np.random.Generator:
    """A fresh Philox generator keyed by ``derive_key(root, *words)``."""
    return np.random.Generator(np.random.Philox(key=derive_key(root, *words)))


def child_rngs(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Split ``n`` independent streams off ``rng``.

    One 64-bit word is drawn from ``rng`` per child and used as that child's
    key path, so the result depends only on the parent's state.
    """
    words = rng.integers(0, MASK64, size=n, dtype=np.uint64, endpoint=True)
    return [make_rng(int(w), "child", i) for i, w in enumerate(words)]
