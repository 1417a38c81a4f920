"""Modular evaluation of the three-point realizability polynomial.

For each secondary partition ``omega`` we compute its weight ``r(omega)``
and the expanded polynomial ``s(omega)`` (a sparse vector over the
partitions of ``d``), stream these records to batch files, and then, for a
fixed first index ``i``, accumulate ``r * c_i * c_j * c_k`` into a hash
table keyed by the pair ``(j, k)``.  A compatible triple whose key is
missing or whose sum is zero is a candidate exception.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .batchfile import BatchData, read_batch, write_records
from .hashtable import Accumulator, cantor_pair
from .modchar import CharacterTables, check_prime, factorial_tables, field_inverse
from .partitions import PartitionTable

log = logging.getLogger(__name__)

DEFAULT_PRIME = 1_000_000_007
DEFAULT_BATCH_SIZE = 150


class FieldTables:
    """Everything the engine needs for one degree and one prime."""

    def __init__(self, table: PartitionTable, p: int):
        check_prime(p, table.d)
        self.table = table
        self.d = table.d
        self.p = p
        self.chars = CharacterTables(table, p)
        self.fact, self.inv_fact = factorial_tables(table.d, p)
        self.dims = self.chars.dims
        self.inv_dims = self.chars.inv_dims
        cls = table.class_sizes_mod(p)
        # factor polynomial of each component: chi(C_nu) |C_nu| / dim
        self.factors: list[np.ndarray] = []
        for n in range(table.d + 1):
            lo, hi = int(table.offsets[n]), int(table.offsets[n + 1])
            chi = self.chars.layer(n)
            scaled = chi * cls[lo:hi][None, :] % p
            for a in range(hi - lo):
                self.factors.append(scaled[a] * self.inv_dims[lo + a] % p)
        top = table.offsets[table.d]
        self.top_lengths = np.ascontiguousarray(table.lengths[top:], dtype=np.int64)

    @property
    def n_top(self) -> int:
        return int(self.table.counts[self.d])

    @property
    def trivial(self) -> int:
        return self.n_top - 1


def compute_r(omega: Sequence[int], ft: FieldTables) -> int:
    """Weight of a secondary partition modulo ``p``.

    ``omega`` lists component offsets in the partition table.
    """
    p = ft.p
    n = len(omega)
    value = int(ft.fact[n]) * field_inverse(n, p) % p
    for mult in Counter(omega).values():
        value = value * int(ft.inv_fact[mult]) % p
    for off in omega:
        size = int(ft.table.sizes[off])
        t = int(ft.dims[off]) * int(ft.inv_fact[size]) % p
        value = value * t % p * t % p
    if n % 2 == 0:
        value = (p - value) % p
    return value


def _product(left: np.ndarray, n_left: int, off: int, ft: FieldTables) -> tuple[np.ndarray, int]:
    table = ft.table
    n_right = int(table.sizes[off])
    if n_left == 0:
        return ft.factors[off].copy(), n_right
    block = table.product_block(n_left, n_right)
    out = kernels.impl().poly_mul(left, ft.factors[off], block, int(table.counts[n_left + n_right]), ft.p)
    return out, n_left + n_right


def expand_s(omega: Sequence[int], ft: FieldTables) -> tuple[np.ndarray, np.ndarray]:
    """Sparse coefficients of ``s(omega)``: ascending top-layer indices and residues."""
    poly, size = np.ones(1, dtype=np.int64), 0
    for off in omega:
        poly, size = _product(poly, size, off, ft)
    if size != ft.d:
        raise ValueError(f"secondary partition has size {size}, expected {ft.d}")
    idx = np.flatnonzero(poly)
    return idx, poly[idx]


def iter_contributions(primaries: Iterable[Sequence[int]], ft: FieldTables) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(r, idx, val)`` for every secondary partition of each primary.

    Consecutive secondary partitions share long prefixes, so partial
    products are kept on a stack and only the changed tail is recomputed.
    """
    table = ft.table
    for primary in primaries:
        prev: tuple[int, ...] = ()
        stack: list[tuple[np.ndarray, int]] = []
        for omega in table.iter_secondary(primary):
            t = 0
            while t < len(prev) and prev[t] == omega[t]:
                t += 1
            del stack[t:]
            poly, size = stack[-1] if stack else (np.ones(1, dtype=np.int64), 0)
            for off in omega[t:]:
                poly, size = _product(poly, size, off, ft)
                stack.append((poly, size))
            prev = omega
            idx = np.flatnonzero(poly)
            yield compute_r(omega, ft), idx, poly[idx]


def batch_primaries(table: PartitionTable, batch_size: int) -> list[list[tuple[int, ...]]]:
    if batch_size < 1:
        raise ValueError("batch size must be positive")
    top = table.layers[table.d]
    return [top[s : s + batch_size] for s in range(0, len(top), batch_size)]


def write_batch(path, primaries: Sequence[Sequence[int]], ft: FieldTables, batch_id: int) -> Path:
    return write_records(path, ft.d, ft.p, batch_id, len(primaries), iter_contributions(primaries, ft))


def compatible_pairs(lengths: np.ndarray, d: int, i: int, min_index: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pairs ``(j, k)`` with ``min_index <= j <= k`` completing a compatible triple with ``i``.

    All indices are positions in the top layer; the trivial partition (last
    position) is excluded everywhere.
    """
    P = lengths.shape[0]
    trivial = P - 1
    if min_index is None:
        min_index = i
    if i == trivial:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    j, k = np.triu_indices(P)
    total = lengths[i] + lengths[j] + lengths[k]
    ok = (j >= min_index) & (j != trivial) & (k != trivial) & (total <= d + 2) & ((total - d) % 2 == 0)
    return j[ok].astype(np.int64), k[ok].astype(np.int64)


def accumulate(i: int, batches: Iterable[BatchData | str | Path], ft: FieldTables, min_index: int | None = None) -> Accumulator:
    """Accumulator for first index ``i`` over all records in ``batches``."""
    if min_index is None:
        min_index = i
    pj, _ = compatible_pairs(ft.top_lengths, ft.d, i, min_index)
    acc = Accumulator(i, ft.p, max(1, pj.shape[0]))
    for batch in batches:
        if not isinstance(batch, BatchData):
            batch = read_batch(batch, ft.d, ft.p)
        elif batch.header.d != ft.d or batch.header.p != ft.p:
            from .batchfile import HeaderMismatch

            raise HeaderMismatch(f"batch is for d={batch.header.d}, p={batch.header.p}")
        acc.accumulate(batch.r, batch.rec_off, batch.idx, batch.val, ft.top_lengths, ft.d, min_index, ft.trivial)
    return acc


def pair_values(acc: Accumulator, pj: np.ndarray, pk: np.ndarray) -> np.ndarray:
    """Residues stored for each pair; absent keys read as 0."""
    from ._kernels_numpy import cantor

    found, vals = acc.lookup_keys(cantor(pj, pk))
    return np.where(found, vals, 0)


def detect_exceptional(i: int, acc: Accumulator, lengths: np.ndarray, d: int) -> list[tuple[int, int, int]]:
    """Compatible triples ``i <= j <= k`` whose key is absent or zero."""
    pj, pk = compatible_pairs(lengths, d, i, i)
    if not pj.shape[0]:
        return []
    zero = pair_values(acc, pj, pk) == 0
    return [(i, int(j), int(k)) for j, k in zip(pj[zero], pk[zero])]


@dataclass
class PrimeRun:
    """Batches of one prime on disk plus the tables used to make them."""

    ft: FieldTables
    paths: list[Path] = field(default_factory=list)

    def coefficients(self, triples: Iterable[tuple[int, int, int]]) -> dict[tuple[int, int, int], int]:
        """Residues of the requested canonical triples ``i <= j <= k``."""
        by_i: dict[int, list[tuple[int, int]]] = {}
        for i, j, k in triples:
            by_i.setdefault(i, []).append((j, k))
        out = {}
        for i in sorted(by_i):
            acc = accumulate(i, self.paths, self.ft)
            jk = np.array(by_i[i], dtype=np.int64).reshape(-1, 2)
            vals = pair_values(acc, jk[:, 0], jk[:, 1])
            for (j, k), v in zip(by_i[i], vals):
                out[(i, j, k)] = int(v)
        return out


def run_prime(table: PartitionTable, p: int, batch_size: int, workdir) -> PrimeRun:
    """Write all batch files for ``p`` into ``workdir`` (no checkpointing)."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    ft = FieldTables(table, p)
    run = PrimeRun(ft)
    for b, prims in enumerate(batch_primaries(table, batch_size)):
        run.paths.append(write_batch(workdir / f"batch_{b:05d}.bin", prims, ft, b))
    return run


def all_coefficients(ft: FieldTables, batches: Sequence, min_index: int = 0) -> dict[tuple[int, int, int], int]:
    """Residue of every compatible canonical triple (small ``d`` only)."""
    out = {}
    for i in range(ft.trivial):
        acc = accumulate(i, batches, ft, min_index=min_index)
        pj, pk = compatible_pairs(ft.top_lengths, ft.d, i, i)
        for j, k, v in zip(pj, pk, pair_values(acc, pj, pk)):
            out[(i, int(j), int(k))] = int(v)
    return out


__all__ = [
    "DEFAULT_BATCH_SIZE",
    "DEFAULT_PRIME",
    "FieldTables",
    "PrimeRun",
    "accumulate",
    "all_coefficients",
    "batch_primaries",
    "cantor_pair",
    "compatible_pairs",
    "compute_r",
    "detect_exceptional",
    "expand_s",
    "iter_contributions",
    "run_prime",
    "write_batch",
]
