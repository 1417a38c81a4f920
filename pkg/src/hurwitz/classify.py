"""Riemann-Hurwitz compatibility and the four structural labels of exceptions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

Triple = tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

LABELS = ("type0", "typeI", "typeII", "typeIII")


class NonIntegralGenus(ValueError):
    pass


def _degree(triple: Sequence[Sequence[int]]) -> int:
    if len(triple) != 3:
        raise ValueError("expected three partitions")
    sizes = {sum(lam) for lam in triple}
    if len(sizes) != 1:
        raise ValueError(f"partitions of different sizes: {triple}")
    return sizes.pop()


def compute_genus(triple: Sequence[Sequence[int]]) -> int:
    d = _degree(triple)
    twice = 2 - 2 * d + sum(d - len(lam) for lam in triple)
    if twice % 2:
        raise NonIntegralGenus(f"{triple} violates the parity condition")
    return twice // 2


def is_trivial(lam: Sequence[int]) -> bool:
    return all(x == 1 for x in lam)


def is_compatible(triple: Sequence[Sequence[int]]) -> bool:
    d = _degree(triple)
    if any(is_trivial(lam) for lam in triple):
        return False
    total = sum(len(lam) for lam in triple)
    return total <= d + 2 and (total - d) % 2 == 0


def splittable(parts: Sequence[int], c: int) -> bool:
    """Can the parts be grouped into ``c`` groups of equal sum?"""
    d = sum(parts)
    if c < 1 or d % c:
        raise ValueError(f"{c} does not divide {d}")
    target = d // c
    items = sorted(parts, reverse=True)
    if items and items[0] > target:
        return False
    loads = [0] * c

    def place(t: int) -> bool:
        if t == len(items):
            return True
        x = items[t]
        seen = set()
        for b in range(c):
            if loads[b] in seen or loads[b] + x > target:
                continue
            seen.add(loads[b])
            loads[b] += x
            if place(t + 1):
                return True
            loads[b] -= x
        return False

    return place(0)


def _single_big_part(lam: Sequence[int]) -> bool:
    return sum(1 for x in lam if x > 1) == 1


def type_ii_witness(triple: Sequence[Sequence[int]]) -> dict | None:
    d = _degree(triple)
    for c in range(2, d + 1):
        if d % c:
            continue
        for a, b, third in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            if all(x % c == 0 for x in triple[a]) and all(x % c == 0 for x in triple[b]):
                if not splittable(triple[third], c):
                    return {"c": c, "positions": [a, b]}
    return None


@dataclass
class LabeledTriple:
    triple: Triple
    genus: int
    label: str
    witness: dict = field(default_factory=dict)


def assign_label(triple: Sequence[Sequence[int]]) -> LabeledTriple:
    """Label by first match: type0, typeI, typeII, otherwise typeIII."""
    tri = tuple(tuple(lam) for lam in triple)
    d = _degree(tri)
    genus = compute_genus(tri)
    total = sum(len(lam) for lam in tri)
    if total < d + 2:
        return LabeledTriple(tri, genus, "type0")
    if total == d + 2:
        for pos, lam in enumerate(tri):
            if _single_big_part(lam):
                return LabeledTriple(tri, genus, "typeI", {"position": pos})
        w = type_ii_witness(tri)
        if w is not None:
            return LabeledTriple(tri, genus, "typeII", w)
    return LabeledTriple(tri, genus, "typeIII")
