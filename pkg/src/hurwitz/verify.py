"""Certifying zero coefficients with several primes.

Every coefficient of the polynomial, written over the common denominator
``(d!)^4``, has a numerator of absolute value at most
``M_d = p2(d) * (d!)^8``.  A coefficient that vanishes modulo distinct
primes whose product exceeds ``M_d`` is therefore zero over the integers.

The module also carries an exact rational evaluation of the coefficients
for tiny ``d``, built on characters from the Frobenius formula rather than
on rim hooks, so that it shares nothing with the modular engine.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial, gcd, prod
from typing import Callable, Iterable, Sequence

from sympy import isprime, nextprime
from sympy.ntheory.modular import crt

from .classify import is_compatible
from .modchar import DimensionNotInvertible, hook_length_dimension
from .partitions import PartitionTable, class_size_of, count_secondary, partitions_of

log = logging.getLogger(__name__)

DEFAULT_START = 1_000_000_007
EXACT_MAX_DEGREE = 6

CONFIRMED = "confirmed-exceptional"
FALSE_POSITIVE = "false-positive"
PENDING = "pending"


def numerator_bound(d: int) -> int:
    if d < 1:
        raise ValueError("degree must be positive")
    return count_secondary(d) * factorial(d) ** 8


def prime_usable(p: int, d: int) -> bool:
    """``p`` exceeds ``d`` and divides no irreducible dimension of ``S_n``, ``n <= d``."""
    if p <= d or not isprime(p):
        return False
    return all(hook_length_dimension(lam) % p for n in range(1, d + 1) for lam in partitions_of(n))


def select_primes(d: int, bound: int | None = None, start: int = DEFAULT_START, exclude: Iterable[int] = ()) -> list[int]:
    """Fewest consecutive usable primes ``>= start`` whose product exceeds ``bound``."""
    if bound is None:
        bound = numerator_bound(d)
    skip = set(exclude)
    primes: list[int] = []
    product = 1
    p = start if isprime(start) else nextprime(start)
    while product <= bound:
        if p not in skip and prime_usable(p, d):
            primes.append(p)
            product *= p
        p = nextprime(p)
    return primes


@dataclass
class BoundCertificate:
    d: int
    p2: int
    bound: int
    primes: list[int]

    @classmethod
    def build(cls, d: int, primes: Sequence[int] | None = None, start: int = DEFAULT_START) -> "BoundCertificate":
        bound = numerator_bound(d)
        if primes is None:
            primes = select_primes(d, bound, start)
        return cls(d, count_secondary(d), bound, list(primes))

    def valid(self) -> bool:
        ps = self.primes
        return (
            len(set(ps)) == len(ps)
            and all(prime_usable(p, self.d) for p in ps)
            and prod(ps) > self.bound
            and self.bound == numerator_bound(self.d)
        )

    def to_manifest(self) -> dict:
        return {
            "degree": self.d,
            "p2": str(self.p2),
            "numerator_bound": str(self.bound),
            "primes": list(self.primes),
            "product": str(prod(self.primes)),
        }


@dataclass
class CandidateStatus:
    triple: tuple[int, int, int]
    residues: dict[int, int] = field(default_factory=dict)
    verdict: str = PENDING
    rejected_by: int | None = None


def confirm(
    candidates: Sequence[tuple[int, int, int]],
    certificate: BoundCertificate,
    evaluate: Callable[[int, list[tuple[int, int, int]]], dict[tuple[int, int, int], int]],
    known: dict[int, dict[tuple[int, int, int], int]] | None = None,
) -> list[CandidateStatus]:
    """Re-evaluate candidates prime by prime until each is decided.

    ``evaluate(p, triples)`` returns the residues of ``triples`` modulo
    ``p``; ``known`` supplies residues already computed (usually those of
    the first prime).  A prime rejected with ``DimensionNotInvertible`` is
    swapped for the next usable prime and ``certificate.primes`` updated.
    """
    status = {t: CandidateStatus(tuple(t)) for t in candidates}
    if not status:
        return []
    known = known or {}
    queue = list(certificate.primes)
    used: list[int] = []
    while queue:
        p = queue.pop(0)
        pending = [t for t, s in status.items() if s.verdict == PENDING]
        if not pending:
            used.append(p)
            continue
        if p in known:
            res = {t: known[p][t] for t in pending}
        else:
            try:
                res = evaluate(p, pending)
            except DimensionNotInvertible:
                log.warning("prime %d divides an irreducible dimension; replacing it", p)
                taken = set(used) | set(queue) | {p}
                replacement = select_primes(certificate.d, 1, max(taken) + 1, exclude=taken)[0]
                queue.append(replacement)
                certificate.primes = [q for q in certificate.primes if q != p] + [replacement]
                continue
        used.append(p)
        for t in pending:
            s = status[t]
            s.residues[p] = res[t] % p
            if s.residues[p]:
                s.verdict = FALSE_POSITIVE
                s.rejected_by = p
    if prod(used) <= certificate.bound:
        raise ValueError("primes do not certify the numerator bound")
    for s in status.values():
        if s.verdict == PENDING:
            s.verdict = CONFIRMED
    return [status[t] for t in candidates]


def crt_combine(residues: Sequence[tuple[int, int]], symmetric: bool = True) -> int:
    """Integer congruent to each ``residue mod prime``.

    With ``symmetric`` the representative lies in ``(-M/2, M/2]``; otherwise
    in ``[0, M)``.
    """
    if not residues:
        raise ValueError("no residues given")
    mods = [int(m) for _, m in residues]
    for a in range(len(mods)):
        for b in range(a + 1, len(mods)):
            if gcd(mods[a], mods[b]) != 1:
                raise ValueError(f"moduli {mods[a]} and {mods[b]} are not coprime")
    value, modulus = crt(mods, [int(r) % m for r, m in residues], symmetric=symmetric)
    return int(value)


# exact rational path -------------------------------------------------------


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


@lru_cache(maxsize=None)
def frobenius_character(lam: tuple[int, ...], nu: tuple[int, ...]) -> int:
    """Exact character value from the Frobenius formula.

    The value is the coefficient of ``x^(lam + delta)`` in the product of
    the Vandermonde determinant and the power sums ``p_nu``, computed in
    ``len(lam)`` variables.
    """
    if sum(lam) != sum(nu):
        raise ValueError("sizes differ")
    if not lam:
        return 1
    N = len(lam)
    unit = [tuple(1 if t == s else 0 for t in range(N)) for s in range(N)]
    poly = {tuple([0] * N): 1}
    for i in range(N):
        for j in range(i + 1, N):
            poly = _poly_mul(poly, {unit[i]: 1, unit[j]: -1})
    for part in nu:
        poly = _poly_mul(poly, {tuple(part * x for x in u): 1 for u in unit})
    target = tuple(lam[i] + N - 1 - i for i in range(N))
    return poly.get(target, 0)


def exact_coefficients(d: int) -> dict[tuple[tuple[int, ...], ...], Fraction]:
    """Exact coefficient of every compatible triple (reverse-lex canonical order)."""
    if d > EXACT_MAX_DEGREE:
        raise ValueError(f"exact evaluation is limited to d <= {EXACT_MAX_DEGREE}")
    table = PartitionTable(d)
    top = table.layers[d]
    coeff: dict[tuple, Fraction] = {}
    triples = [t for t in combinations_with_replacement(top, 3) if is_compatible(t)]
    for t in triples:
        coeff[t] = Fraction(0)

    def factor(mu):
        dim = frobenius_character(mu, (1,) * sum(mu))
        return {nu: Fraction(frobenius_character(mu, nu) * class_size_of(nu), dim) for nu in table.layers[sum(mu)]}

    for omega in table.iter_all_secondary():
        comps = [table.parts[off] for off in omega]
        n = len(comps)
        r = Fraction((-1) ** (n - 1), n) * factorial(n)
        for m in Counter(comps).values():
            r /= factorial(m)
        for mu in comps:
            r *= Fraction(frobenius_character(mu, (1,) * sum(mu)), factorial(sum(mu))) ** 2
        s: dict[tuple[int, ...], Fraction] = {(): Fraction(1)}
        for mu in comps:
            f = factor(mu)
            nxt: dict[tuple[int, ...], Fraction] = {}
            for a, ca in s.items():
                for b, cb in f.items():
                    key = tuple(sorted(a + b, reverse=True))
                    nxt[key] = nxt.get(key, Fraction(0)) + ca * cb
            s = nxt
        for t in triples:
            coeff[t] += r * s.get(t[0], 0) * s.get(t[1], 0) * s.get(t[2], 0)
    return coeff


def scaled_numerators(coeffs: dict, d: int) -> dict:
    """Numerators over the common denominator ``(d!)^4``."""
    den = factorial(d) ** 4
    out = {}
    for t, c in coeffs.items():
        scaled = c * den
        if scaled.denominator != 1:
            raise ValueError(f"{t}: coefficient {c} is not an integer over (d!)^4")
        out[t] = scaled.numerator
    return out
