from itertools import combinations_with_replacement, permutations

import pytest

from hurwitz.classify import is_compatible
from hurwitz.oracle import (
    DegreeTooLarge,
    _classes,
    compose,
    cycle_type,
    exceptional_set,
    inverse,
    realizable,
    representative,
    transitive,
    transitive_count,
)
from hurwitz.partitions import partitions_of


def full_search(triple, d):
    """Realizability without pinning the first permutation."""
    by_type, type_of = _classes(d)
    for s1 in by_type[triple[0]]:
        for s2 in by_type[triple[1]]:
            if type_of[compose(s1, s2)] == triple[2] and transitive(d, s1, s2):
                return True
    return False


def test_permutation_helpers():
    assert cycle_type((1, 2, 0, 3)) == (3, 1)
    assert cycle_type(representative((3, 2, 1))) == (3, 2, 1)
    a = (1, 2, 0)
    assert compose(a, inverse(a)) == (0, 1, 2)
    assert transitive(3, a)
    assert not transitive(4, (1, 0, 3, 2))


def test_examples():
    assert exceptional_set(4) == {((3, 1), (2, 2), (2, 2))}
    assert exceptional_set(3) == set()
    assert len(exceptional_set(6)) == 6
    ok, (s1, s2, s3) = realizable(((3,), (2, 1), (2, 1)), 3)
    assert ok and compose(compose(s1, s2), s3) == (0, 1, 2)
    assert [cycle_type(s) for s in (s1, s2, s3)] == [(3,), (2, 1), (2, 1)]


@pytest.mark.parametrize("d", range(2, 6))
def test_pinning_first_permutation_is_harmless(d):
    for tri in combinations_with_replacement(list(partitions_of(d)), 3):
        if is_compatible(tri):
            assert realizable(tri, d)[0] == full_search(tri, d)


@pytest.mark.parametrize("d", range(3, 7))
def test_order_invariance(d):
    for tri in combinations_with_replacement(list(partitions_of(d)), 3):
        if not is_compatible(tri):
            continue
        answers = {realizable(perm, d)[0] for perm in permutations(tri)}
        assert len(answers) == 1
        counts = {transitive_count(perm, d) for perm in permutations(tri)}
        assert len(counts) == 1


def test_limits():
    with pytest.raises(DegreeTooLarge):
        exceptional_set(9)
    with pytest.raises(ValueError):
        realizable(((2,), (2,), (3,)), 2)
