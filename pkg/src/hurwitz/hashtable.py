"""Segmented open-addressing accumulator keyed by Cantor-paired indices.

Slots are grouped in segments of eight 64-bit keys (one cache line).  A key
hashes to a home segment; segments are visited in triangular (quadratic)
order and scanned linearly.  After ``PROBE_LIMIT`` segments a key spills
into a small overflow buffer.
"""

from __future__ import annotations

from math import isqrt
from typing import IO, Iterator

import numpy as np

from . import kernels

SEG = 8
PROBE_LIMIT = 64
EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)


class OverflowBufferExhausted(RuntimeError):
    pass


def cantor_pair(j: int, k: int) -> int:
    return (j + k) * (j + k + 1) // 2 + k


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    k = z - w * (w + 1) // 2
    return w - k, k


def _capacity_for(expected: int) -> int:
    cap = SEG
    while cap < 2 * expected:
        cap *= 2
    return cap


class Accumulator:
    """Partial sums of coefficients, one table per fixed first index ``owner``."""

    def __init__(self, owner: int, p: int, expected: int, overflow: int | None = None):
        self.owner = owner
        self.p = p
        self.capacity = _capacity_for(expected)
        self.keys = np.full(self.capacity, EMPTY, dtype=np.uint64)
        self.vals = np.zeros(self.capacity, dtype=np.int64)
        n_over = overflow if overflow is not None else max(64, self.capacity // 64)
        self.okeys = np.full(n_over, EMPTY, dtype=np.uint64)
        self.ovals = np.zeros(n_over, dtype=np.int64)
        self.ocount = np.zeros(1, dtype=np.int64)

    def _arrays(self):
        return self.keys, self.vals, self.okeys, self.ovals, self.ocount

    def _check(self, status: int) -> None:
        if status:
            raise OverflowBufferExhausted(
                f"accumulator for index {self.owner}: overflow buffer of {self.okeys.shape[0]} slots is full"
            )

    def upsert_keys(self, keys, values) -> None:
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        values = np.ascontiguousarray(values, dtype=np.int64)
        self._check(kernels.impl().ht_upsert_many(*self._arrays(), keys, values, self.p))

    def upsert(self, j: int, k: int, value: int) -> None:
        self.upsert_keys(np.array([cantor_pair(j, k)], dtype=np.uint64), np.array([value % self.p]))

    def lookup_keys(self, keys) -> tuple[np.ndarray, np.ndarray]:
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        return kernels.impl().ht_lookup_many(*self._arrays(), keys)

    def get(self, j: int, k: int) -> int | None:
        found, vals = self.lookup_keys(np.array([cantor_pair(j, k)], dtype=np.uint64))
        return int(vals[0]) if found[0] else None

    def accumulate(self, r, rec_off, idx, val, lengths, d: int, min_index: int, trivial: int) -> None:
        status = kernels.impl().accumulate_records(
            *self._arrays(), r, rec_off, idx, val, self.owner, lengths, d, min_index, trivial, self.p
        )
        self._check(status)

    def __len__(self) -> int:
        return int((self.keys != EMPTY).sum()) + int(self.ocount[0])

    @property
    def overflow_used(self) -> int:
        return int(self.ocount[0])

    def occupancy(self) -> float:
        return len(self) / self.capacity

    def to_dict(self) -> dict[int, int]:
        used = self.keys != EMPTY
        out = {int(k): int(v) for k, v in zip(self.keys[used], self.vals[used])}
        n = int(self.ocount[0])
        out.update({int(k): int(v) for k, v in zip(self.okeys[:n], self.ovals[:n])})
        return out

    def items(self) -> Iterator[tuple[int, int, int]]:
        """``(j, k, value)`` triples in increasing key order."""
        for key, value in sorted(self.to_dict().items()):
            j, k = cantor_unpair(key)
            yield j, k, value

    def dump(self, fh: IO[str]) -> None:
        for j, k, value in self.items():
            fh.write(f"{j} {k} {value}\n")
