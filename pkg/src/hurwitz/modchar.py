"""Prime-field helpers and symmetric-group character tables modulo ``p``.

Characters come from the Murnaghan-Nakayama rule: cycles are stripped
largest first as rim hooks, handled on the beta-set (abacus) of the shape,
where removing a hook of length ``h`` slides one bead down by ``h``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
from sympy import isprime

from .partitions import PartitionTable

MAX_PRIME = 2**31 - 1  # residues must stay below 2**31 so products fit in int64


class ZeroInverse(ZeroDivisionError):
    pass


class DimensionNotInvertible(ArithmeticError):
    """An irreducible dimension vanishes modulo the working prime."""

    def __init__(self, p: int, parts: tuple[int, ...]):
        super().__init__(f"dim S^{parts} is divisible by p={p}")
        self.p = p
        self.parts = parts


def field_inverse(x: int, p: int) -> int:
    x %= p
    if x == 0:
        raise ZeroInverse(f"0 has no inverse modulo {p}")
    return pow(x, -1, p)


def check_prime(p: int, d: int) -> None:
    if not d < p <= MAX_PRIME:
        raise ValueError(f"prime {p} must satisfy {d} < p <= {MAX_PRIME}")
    if not isprime(p):
        raise ValueError(f"{p} is not prime")


def factorial_tables(d: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """``n! mod p`` and ``(n!)^-1 mod p`` for ``0 <= n <= d``."""
    fact = np.ones(d + 1, dtype=np.int64)
    for n in range(1, d + 1):
        fact[n] = fact[n - 1] * n % p
    inv_fact = np.ones(d + 1, dtype=np.int64)
    inv_fact[d] = field_inverse(int(fact[d]), p)
    for n in range(d, 0, -1):
        inv_fact[n - 1] = inv_fact[n] * n % p
    return fact, inv_fact


def _shape_from_beta(beta: list[int]) -> tuple[int, ...]:
    L = len(beta)
    beta = sorted(beta, reverse=True)
    return tuple(x for x in (b - (L - 1 - i) for i, b in enumerate(beta)) if x > 0)


class MNCharacters:
    """Memoized Murnaghan-Nakayama evaluation modulo ``p``.

    The memo is keyed on ``(shape, remaining cycles)`` and shared across
    all layers, since the same sub-shapes reappear for every ``n``.
    """

    def __init__(self, p: int):
        self.p = p
        self._memo: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}

    def __call__(self, shape: tuple[int, ...], cycles: tuple[int, ...]) -> int:
        if sum(shape) != sum(cycles):
            raise ValueError(f"shape {shape} and cycle type {cycles} have different sizes")
        return self._chi(tuple(shape), tuple(sorted(cycles, reverse=True)))

    def _chi(self, shape: tuple[int, ...], cycles: tuple[int, ...]) -> int:
        if not cycles:
            return 1
        key = (shape, cycles)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        h, rest = cycles[0], cycles[1:]
        L = len(shape)
        beta = [shape[i] + (L - 1 - i) for i in range(L)]
        occupied = set(beta)
        total = 0
        for b in beta:
            t = b - h
            if t < 0 or t in occupied:
                continue
            # leg length = beads jumped over
            leg = sum(1 for c in beta if t < c < b)
            new_beta = [t if c == b else c for c in beta]
            term = self._chi(_shape_from_beta(new_beta), rest)
            total += -term if leg & 1 else term
        total %= self.p
        self._memo[key] = total
        return total


class CharacterTables:
    """Character tables of ``S_0, ..., S_d`` reduced modulo ``p``.

    ``layer(n)[a, b]`` is the value of the irreducible character of the
    ``a``-th partition of ``n`` on the class of the ``b``-th partition, both
    in reverse-lex order.
    """

    def __init__(self, table: PartitionTable, p: int, check_dims: bool = True):
        check_prime(p, table.d)
        self.table = table
        self.p = p
        mn = MNCharacters(p)
        self.layers: list[np.ndarray] = []
        for layer in table.layers:
            m = len(layer)
            chi = np.empty((m, m), dtype=np.int64)
            for a, lam in enumerate(layer):
                for b, nu in enumerate(layer):
                    chi[a, b] = mn(lam, nu)
            self.layers.append(chi)
        # the identity class (1,...,1) is the last column of every layer
        self.dims = np.concatenate([chi[:, -1] for chi in self.layers])
        if check_dims:
            bad = np.flatnonzero(self.dims == 0)
            if bad.size:
                raise DimensionNotInvertible(p, table.parts[int(bad[0])])

    def layer(self, n: int) -> np.ndarray:
        return self.layers[n]

    def character(self, lam, nu) -> int:
        a = self.table.lookup(lam)
        b = self.table.lookup(nu)
        if a.n != b.n:
            raise ValueError("partitions of different sizes")
        return int(self.layers[a.n][a.index, b.index])

    def dimension(self, lam) -> int:
        """``dim S^lam`` modulo ``p``."""
        return int(self.dims[self.table.lookup(lam).offset])

    @cached_property
    def inv_dims(self) -> np.ndarray:
        return np.array([field_inverse(int(x), self.p) for x in self.dims], dtype=np.int64)


def irrep_dimension(lam, tables: CharacterTables) -> int:
    x = tables.dimension(lam)
    if x == 0:
        raise DimensionNotInvertible(tables.p, tuple(lam))
    return x


def hook_length_dimension(lam) -> int:
    """Exact ``dim S^lam`` from the hook-length formula."""
    from math import factorial

    lam = tuple(lam)
    conj = [sum(1 for x in lam if x > j) for j in range(lam[0])] if lam else []
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return factorial(sum(lam)) // hooks


def format_character_layer(tables: CharacterTables, n: int) -> str:
    rows = [" ".join(str(int(x)) for x in row) for row in tables.layers[n]]
    return "\n".join(rows)
