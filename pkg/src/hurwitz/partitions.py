"""Partitions, secondary partitions and the lookup tables built over them.

Every partition of every ``n <= d`` gets a *global offset* in one
concatenated table, layer by layer, each layer in reverse-lexicographic
order: ``(n)`` comes first and ``(1, ..., 1)`` last.
"""

from __future__ import annotations

from collections import Counter
from math import comb, factorial, prod
from typing import Iterator, NamedTuple, Sequence

import numpy as np


class Partition(NamedTuple):
    parts: tuple[int, ...]
    n: int
    length: int
    index: int
    offset: int


def partitions_of(n: int) -> Iterator[tuple[int, ...]]:
    """Yield the partitions of ``n`` in reverse-lexicographic order."""
    if n < 0:
        raise ValueError(f"cannot partition a negative integer: {n}")
    if n == 0:
        yield ()
        return
    a = [n]
    while True:
        yield tuple(a)
        k = len(a) - 1
        while k >= 0 and a[k] == 1:
            k -= 1
        if k < 0:
            return
        v = a[k] - 1
        rem = len(a) - k
        del a[k:]
        a.append(v)
        while rem > v:
            a.append(v)
            rem -= v
        if rem:
            a.append(rem)


def partition_count(n: int) -> int:
    # Euler's pentagonal recurrence; used only as an independent cross-check.
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]


def class_size_of(parts: Sequence[int]) -> int:
    """Size of the conjugacy class of cycle type ``parts``: ``n! / z``."""
    n = sum(parts)
    z = 1
    for k, m in Counter(parts).items():
        z *= k**m * factorial(m)
    return factorial(n) // z


def count_secondary(d: int) -> int:
    """Number of multisets of partitions whose sizes sum to ``d``."""
    if d < 0:
        raise ValueError("d must be non-negative")
    coef = [1] + [0] * d
    for n in range(1, d + 1):
        for _ in range(partition_count(n)):
            for k in range(n, d + 1):
                coef[k] += coef[k - n]
    return coef[d]


def multiset_choose(n: int, k: int) -> int:
    return comb(n + k - 1, k)


class PartitionTable:
    """Layers of partitions for ``0 <= n <= d`` plus the derived tables.

    Besides the layers themselves the table holds part counts, exact
    conjugacy-class sizes and the monomial product table, which maps two
    partitions to the partition formed by the union of their parts.
    """

    def __init__(self, d: int):
        if d < 0:
            raise ValueError("degree must be non-negative")
        self.d = d
        self.layers: list[list[tuple[int, ...]]] = [list(partitions_of(n)) for n in range(d + 1)]
        self.counts = np.array([len(layer) for layer in self.layers], dtype=np.int64)
        self.offsets = np.zeros(d + 2, dtype=np.int64)
        np.cumsum(self.counts, out=self.offsets[1:])
        self.total = int(self.offsets[-1])

        self.parts: list[tuple[int, ...]] = [lam for layer in self.layers for lam in layer]
        self._offset_of = {lam: off for off, lam in enumerate(self.parts)}
        self.sizes = np.repeat(np.arange(d + 1, dtype=np.int64), self.counts)
        self.lengths = np.array([len(lam) for lam in self.parts], dtype=np.int64)
        self.class_sizes: list[int] = [class_size_of(lam) for lam in self.parts]
        self._class_mod: dict[int, np.ndarray] = {}

        self._build_products()

    # lookups ---------------------------------------------------------------

    def partition(self, offset: int) -> Partition:
        lam = self.parts[offset]
        n = int(self.sizes[offset])
        return Partition(lam, n, len(lam), offset - int(self.offsets[n]), offset)

    def layer(self, n: int) -> list[Partition]:
        if not 0 <= n <= self.d:
            raise ValueError(f"layer {n} outside 0..{self.d}")
        base = int(self.offsets[n])
        return [Partition(lam, n, len(lam), i, base + i) for i, lam in enumerate(self.layers[n])]

    def lookup(self, parts: Sequence[int]) -> Partition:
        lam = tuple(int(x) for x in parts)
        if any(a < b for a, b in zip(lam, lam[1:])) or any(x < 1 for x in lam):
            raise ValueError(f"not a non-increasing list of positive parts: {lam}")
        if sum(lam) > self.d:
            raise ValueError(f"partition {lam} exceeds degree {self.d}")
        return self.partition(self._offset_of[lam])

    def offset(self, parts: Sequence[int]) -> int:
        return self.lookup(parts).offset

    def index_in_layer(self, parts: Sequence[int]) -> int:
        return self.lookup(parts).index

    def class_size(self, offset: int) -> int:
        return self.class_sizes[offset]

    def class_sizes_mod(self, p: int) -> np.ndarray:
        if p not in self._class_mod:
            self._class_mod[p] = np.array([c % p for c in self.class_sizes], dtype=np.int64)
        return self._class_mod[p]

    # monomial products -----------------------------------------------------

    def _build_products(self) -> None:
        d = self.d
        self.block_start = np.full((d + 1, d + 1), -1, dtype=np.int64)
        chunks = []
        pos = 0
        for n1 in range(d + 1):
            for n2 in range(d + 1 - n1):
                base = int(self.offsets[n1 + n2])
                block = np.empty((len(self.layers[n1]), len(self.layers[n2])), dtype=np.int32)
                for a, lam in enumerate(self.layers[n1]):
                    for b, mu in enumerate(self.layers[n2]):
                        merged = tuple(sorted(lam + mu, reverse=True))
                        block[a, b] = self._offset_of[merged] - base
                self.block_start[n1, n2] = pos
                pos += block.size
                chunks.append(block.ravel())
        self.products = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int32)

    def product_block(self, n1: int, n2: int) -> np.ndarray:
        """Layer-local product indices for layers ``n1`` x ``n2`` as a 2-D view."""
        start = int(self.block_start[n1, n2])
        if start < 0:
            raise ValueError(f"product of sizes {n1} + {n2} exceeds degree {self.d}")
        shape = (int(self.counts[n1]), int(self.counts[n2]))
        return self.products[start : start + shape[0] * shape[1]].reshape(shape)

    def monomial_product(self, a: int, b: int) -> int:
        """Global offset of the product of the monomials at offsets ``a`` and ``b``."""
        n1, n2 = int(self.sizes[a]), int(self.sizes[b])
        if n1 + n2 > self.d:
            raise ValueError(f"product of sizes {n1} + {n2} exceeds degree {self.d}")
        ia = a - int(self.offsets[n1])
        ib = b - int(self.offsets[n2])
        return int(self.offsets[n1 + n2]) + int(self.product_block(n1, n2)[ia, ib])

    # secondary partitions --------------------------------------------------

    def iter_secondary(self, primary: Sequence[int]) -> Iterator[tuple[int, ...]]:
        """Yield every secondary partition refining ``primary`` exactly once.

        A secondary partition is returned as the tuple of global offsets of
        its components in canonical order: sizes descending, and within a
        block of equal sizes, layer indices non-decreasing.  The walk is an
        odometer over the index vector rather than a recursion.
        """
        sizes = sorted((int(s) for s in primary), reverse=True)
        if sum(sizes) > self.d or any(s < 1 for s in sizes):
            raise ValueError(f"invalid primary partition {tuple(primary)}")
        n = len(sizes)
        top = [int(self.counts[s]) - 1 for s in sizes]
        base = [int(self.offsets[s]) for s in sizes]
        idx = [0] * n
        while True:
            yield tuple(b + i for b, i in zip(base, idx))
            t = n - 1
            while t >= 0 and idx[t] == top[t]:
                t -= 1
            if t < 0:
                return
            idx[t] += 1
            for u in range(t + 1, n):
                idx[u] = idx[u - 1] if sizes[u] == sizes[u - 1] else 0

    def secondary_count(self, primary: Sequence[int]) -> int:
        return prod(multiset_choose(int(self.counts[s]), m) for s, m in Counter(primary).items())

    def iter_all_secondary(self) -> Iterator[tuple[int, ...]]:
        for lam in self.layers[self.d]:
            yield from self.iter_secondary(lam)

    def trivial_offset(self) -> int:
        """Offset of ``(1, ..., 1)`` in the top layer."""
        return self.total - 1

    def top_index(self, offset: int) -> int:
        return offset - int(self.offsets[self.d])

    def top_parts(self, index: int) -> tuple[int, ...]:
        return self.layers[self.d][index]


def multiplicities(omega: Sequence[int]) -> list[int]:
    """Counts of equal components in a secondary partition."""
    return list(Counter(omega).values())


def format_layer(table: PartitionTable, n: int) -> str:
    return "\n".join(" ".join(map(str, lam)) for lam in table.layers[n])
