"""Seeded, counter-based uniform streams.

Every draw is a pure function of ``(key, draw index)``: the key is derived
from the user seed and a stream id, and the value at index ``i`` is the
SplitMix64 output for state ``key + (i + 1) * GOLDEN``.  That gives

* reproducibility across runs and platforms (only uint64 arithmetic),
* random access, so a record's draw can be addressed by its id and the
  result does not depend on processing order or parallelism.
"""
from __future__ import annotations

import hashlib
from typing import Union

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53

StreamId = Union[int, str]


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_id(value: StreamId) -> int:
    """Map an int or str identifier onto an unsigned 64-bit integer."""
    if isinstance(value, (int, np.integer)):
        return int(value) & _MASK64
    digest = hashlib.blake2b(str(value).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _derive_key(parent: int, stream_id: StreamId) -> int:
    state = np.array([parent ^ hash_id(stream_id)], dtype=np.uint64)
    with np.errstate(over="ignore"):
        return int(_mix(_mix(state + _GOLDEN) + _GOLDEN)[0])


class RandomStream:
    """A reproducible source of uniforms on the open interval (0, 1).

    >>> s = RandomStream(42)
    >>> u = s.uniforms(3)
    >>> bool(np.all((u > 0) & (u < 1)))
    True
    """

    def __init__(self, seed: int, stream_id: StreamId = 0):
        if not 0 <= int(seed) <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self.stream_id = stream_id
        self._key = _derive_key(self.seed, stream_id)
        self._counter = 0

    @classmethod
    def _from_key(cls, key: int, seed: int, stream_id: StreamId) -> "RandomStream":
        obj = cls.__new__(cls)
        obj.seed = seed
        obj.stream_id = stream_id
        obj._key = key
        obj._counter = 0
        return obj

    @property
    def key(self) -> int:
        return self._key

    @property
    def draw_index(self) -> int:
        """Index of the next sequential draw."""
        return self._counter

    def child(self, stream_id: StreamId) -> "RandomStream":
        """Independent stream derived from this stream's key and ``stream_id``."""
        return RandomStream._from_key(_derive_key(self._key, stream_id), self.seed, stream_id)

    def uniform_at(self, indices) -> np.ndarray:
        """Uniforms at explicit draw indices; does not advance the counter.

        Indices may be any int/str ids (strings are hashed to 64 bits).
        """
        arr = np.asarray(indices)
        if arr.dtype.kind in "iu":
            idx = arr.astype(np.uint64)
        else:
            idx = np.array([hash_id(v) for v in arr.ravel()], dtype=np.uint64).reshape(arr.shape)
        with np.errstate(over="ignore"):
            state = np.uint64(self._key) + (idx + np.uint64(1)) * _GOLDEN
            z = _mix(np.asarray(state, dtype=np.uint64))
        return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53

    def uniforms(self, n: int) -> np.ndarray:
        start = self._counter
        self._counter += int(n)
        return self.uniform_at(np.arange(start, start + int(n), dtype=np.uint64))

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def permutation(self, n: int) -> np.ndarray:
        """Seeded permutation of ``range(n)`` (argsort of n fresh uniforms)."""
        return np.argsort(self.uniforms(n), kind="stable")

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id!r}, draw_index={self._counter})"
