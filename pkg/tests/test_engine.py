from fractions import Fraction

import numpy as np
import pytest

from hurwitz.batchfile import HeaderMismatch, read_batch
from hurwitz.engine import (
    FieldTables,
    accumulate,
    all_coefficients,
    batch_primaries,
    compatible_pairs,
    compute_r,
    detect_exceptional,
    expand_s,
    iter_contributions,
    run_prime,
)
from hurwitz.modchar import field_inverse
from hurwitz.oracle import exceptional_set
from hurwitz.partitions import PartitionTable
from hurwitz.verify import exact_coefficients

P = 1_000_000_007


def mod(x: Fraction, p: int = P) -> int:
    return x.numerator * field_inverse(x.denominator, p) % p


def ft_for(d, p=P):
    return FieldTables(PartitionTable(d), p)


def dense_tensor(ft):
    """Full coefficient tensor mod p straight from the contributions."""
    n = ft.n_top
    out = np.zeros((n, n, n), dtype=object)
    for r, idx, val in iter_contributions(ft.table.layers[ft.d], ft):
        s = np.zeros(n, dtype=object)
        s[idx] = val.astype(object)
        out = (out + r * np.einsum("i,j,k->ijk", s, s, s)) % ft.p
    return out


def test_compute_r_d2():
    ft = ft_for(2)
    T = ft.table
    assert compute_r((T.offset((2,)),), ft) == mod(Fraction(1, 4))
    assert compute_r((T.offset((1, 1)),), ft) == mod(Fraction(1, 4))
    one = T.offset((1,))
    assert compute_r((one, one), ft) == mod(Fraction(-1, 2))


def test_expand_s_d2():
    ft = ft_for(2)
    T = ft.table
    idx, val = expand_s((T.offset((2,)),), ft)
    assert idx.tolist() == [0, 1] and val.tolist() == [1, 1]
    idx, val = expand_s((T.offset((1, 1)),), ft)
    assert idx.tolist() == [0, 1] and val.tolist() == [P - 1, 1]
    one = T.offset((1,))
    idx, val = expand_s((one, one), ft)
    assert idx.tolist() == [1] and val.tolist() == [1]
    with pytest.raises(ValueError):
        expand_s((one,), ft)


def test_d2_values():
    t = dense_tensor(ft_for(2))
    assert t[0, 0, 0] == 0
    assert t[0, 0, 1] == mod(Fraction(1, 2))
    assert t[1, 1, 1] == 0


def test_contribution_count():
    ft = ft_for(5)
    assert sum(1 for _ in iter_contributions(ft.table.layers[5], ft)) == 27


@pytest.mark.parametrize("d", range(2, 7))
def test_dense_tensor_matches_exact(d):
    ft = ft_for(d)
    t = dense_tensor(ft)
    index = {lam: a for a, lam in enumerate(ft.table.layers[d])}
    lengths = ft.top_lengths
    for (a, b, c), value in np.ndenumerate(t):
        assert value == t[tuple(sorted((a, b, c)))]
        total = lengths[a] + lengths[b] + lengths[c]
        if (total - d) % 2 or total > d + 2:
            assert value == 0
    for tri, exact in exact_coefficients(d).items():
        assert t[tuple(index[lam] for lam in tri)] == mod(exact)


def test_compatible_pairs():
    ft = ft_for(4)
    j, k = compatible_pairs(ft.top_lengths, 4, 1)
    # (3,1) with partners: lengths must sum with 2 to at most 6, even
    assert list(zip(j.tolist(), k.tolist())) == [(1, 1), (1, 2), (2, 2)]
    j, _ = compatible_pairs(ft.top_lengths, 4, ft.trivial)
    assert j.size == 0


@pytest.fixture
def d6_batches(tmp_path):
    ft = ft_for(6)
    run = run_prime(ft.table, P, 150, tmp_path)
    return ft, run


@pytest.mark.parametrize("d", range(2, 7))
def test_accumulate_matches_exact(d, tmp_path, backend):
    ft = ft_for(d)
    run = run_prime(ft.table, P, 4, tmp_path)
    got = all_coefficients(ft, run.paths)
    index = {lam: a for a, lam in enumerate(ft.table.layers[d])}
    expected = {tuple(index[lam] for lam in tri): mod(v) for tri, v in exact_coefficients(d).items()}
    assert got == expected


@pytest.mark.parametrize("d", [4, 5, 6])
def test_batch_size_independence(d, tmp_path, backend):
    ft = ft_for(d)
    reference = None
    for B in (1, 2, 7, ft.n_top):
        run = run_prime(ft.table, P, B, tmp_path / f"B{B}")
        assert len(run.paths) == len(batch_primaries(ft.table, B))
        got = all_coefficients(ft, run.paths)
        if reference is None:
            reference = got
        assert got == reference


def test_symmetry_with_all_pairs(d6_batches, backend):
    ft, run = d6_batches
    canon = all_coefficients(ft, run.paths)
    for i in range(ft.trivial):
        acc = accumulate(i, run.paths, ft, min_index=0)
        for j, k, v in acc.items():
            key = tuple(sorted((i, j, k)))
            if key in canon:
                assert canon[key] == v


def test_detect_matches_oracle(d6_batches, backend):
    ft, run = d6_batches
    found = set()
    for i in range(ft.trivial):
        acc = accumulate(i, run.paths, ft)
        found |= {tuple(ft.table.layers[6][x] for x in t) for t in detect_exceptional(i, acc, ft.top_lengths, 6)}
    assert found == exceptional_set(6)


def test_backends_agree(tmp_path):
    from hurwitz import kernels

    ft = ft_for(7)
    results = []
    previous = kernels.backend()
    try:
        for name in ("numba", "numpy"):
            kernels.set_backend(name)
            run = run_prime(ft.table, P, 5, tmp_path / name)
            results.append(([p.read_bytes() for p in run.paths], all_coefficients(ft, run.paths)))
    finally:
        kernels.set_backend(previous)
    assert results[0] == results[1]


def test_accepts_batch_data_and_checks_header(d6_batches):
    ft, run = d6_batches
    data = [read_batch(p) for p in run.paths]
    a = accumulate(0, data, ft)
    b = accumulate(0, run.paths, ft)
    assert a.to_dict() == b.to_dict()
    with pytest.raises(HeaderMismatch):
        accumulate(0, run.paths, ft_for(6, 998_244_353))
    with pytest.raises(HeaderMismatch):
        accumulate(0, data, ft_for(6, 998_244_353))


def test_coefficients_lookup(d6_batches):
    ft, run = d6_batches
    canon = all_coefficients(ft, run.paths)
    wanted = list(canon)[:5]
    assert run.coefficients(wanted) == {t: canon[t] for t in wanted}
