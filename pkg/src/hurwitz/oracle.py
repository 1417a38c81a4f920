"""Brute-force realizability through permutation triples.

A triple of partitions of ``d`` is realizable iff there are permutations
of those cycle types with product the identity that generate a transitive
subgroup of ``S_d``.  Only usable for small ``d``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from typing import Sequence

from .classify import is_compatible
from .partitions import class_size_of, partitions_of

MAX_DEGREE = 8

Perm = tuple[int, ...]


class DegreeTooLarge(ValueError):
    pass


def _guard(d: int) -> None:
    if d > MAX_DEGREE:
        raise DegreeTooLarge(f"brute force is limited to d <= {MAX_DEGREE}, got {d}")
    if d < 1:
        raise ValueError("degree must be positive")


def cycle_type(perm: Perm) -> tuple[int, ...]:
    seen = [False] * len(perm)
    lengths = []
    for x in range(len(perm)):
        if seen[x]:
            continue
        n = 0
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            n += 1
        lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


def compose(a: Perm, b: Perm) -> Perm:
    """``a o b``: apply ``b`` first."""
    return tuple(a[x] for x in b)


def inverse(a: Perm) -> Perm:
    out = [0] * len(a)
    for x, y in enumerate(a):
        out[y] = x
    return tuple(out)


def representative(lam: Sequence[int]) -> Perm:
    perm = []
    start = 0
    for n in lam:
        perm.extend(range(start + 1, start + n))
        perm.append(start)
        start += n
    return tuple(perm)


@lru_cache(maxsize=None)
def _classes(d: int) -> tuple[dict[tuple[int, ...], list[Perm]], dict[Perm, tuple[int, ...]]]:
    by_type: dict[tuple[int, ...], list[Perm]] = {}
    type_of: dict[Perm, tuple[int, ...]] = {}
    for perm in permutations(range(d)):
        t = cycle_type(perm)
        by_type.setdefault(t, []).append(perm)
        type_of[perm] = t
    return by_type, type_of


def transitive(d: int, *gens: Perm) -> bool:
    parent = list(range(d))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = d
    for g in gens:
        for x in range(d):
            a, b = find(x), find(g[x])
            if a != b:
                parent[a] = b
                comps -= 1
    return comps == 1


def _check(triple, d: int):
    _guard(d)
    tri = tuple(tuple(sorted(lam, reverse=True)) for lam in triple)
    if any(sum(lam) != d for lam in tri):
        raise ValueError(f"{triple} is not a triple of partitions of {d}")
    return tri


def realizable(triple, d: int) -> tuple[bool, tuple[Perm, Perm, Perm] | None]:
    """Search for ``(s1, s2, s3)`` with ``s1 s2 s3 = 1`` generating a transitive group.

    ``s1`` is pinned to one representative of its class (conjugation does
    not change the answer); ``s2`` runs over its whole class.
    """
    l1, l2, l3 = _check(triple, d)
    by_type, type_of = _classes(d)
    s1 = representative(l1)
    for s2 in by_type[l2]:
        prod = compose(s1, s2)
        if type_of[prod] != l3:
            continue
        if transitive(d, s1, s2):
            return True, (s1, s2, inverse(prod))
    return False, None


def transitive_count(triple, d: int) -> int:
    """Number of transitive ``(s1, s2, s3)`` with the given cycle types and product 1."""
    l1, l2, l3 = _check(triple, d)
    by_type, type_of = _classes(d)
    s1 = representative(l1)
    n = sum(1 for s2 in by_type[l2] if type_of[compose(s1, s2)] == l3 and transitive(d, s1, s2))
    return n * class_size_of(l1)


def exceptional_set(d: int) -> set[tuple[tuple[int, ...], ...]]:
    """Compatible triples (reverse-lex canonical order) that are not realizable."""
    _guard(d)
    layer = list(partitions_of(d))
    out = set()
    for tri in combinations_with_replacement(layer, 3):
        if is_compatible(tri) and not realizable(tri, d)[0]:
            out.add(tri)
    return out
