import itertools

import pytest

from loopnet import fixtures
from loopnet.errors import InvalidSimplex
from loopnet.simplex import (
    NERVE,
    REVERSED,
    TANGENT,
    Simplex1,
    classify,
    enumerate_simplices,
    is_nerve,
    is_nerve2,
    iter_simplices2,
    make_simplex1,
    make_simplex2,
    simplex_counts,
)


def brute_sigma1(P):
    return {
        Simplex1(s, a, b)
        for s, a, b in itertools.product(P.elements, repeat=3)
        if P.le(a, s) and P.le(b, s)
    }


def brute_sigma2(P):
    s1 = brute_sigma1(P)
    out = set()
    for s in P.elements:
        for f0, f1, f2 in itertools.product(s1, repeat=3):
            if not all(P.le(f.support, s) for f in (f0, f1, f2)):
                continue
            v0, v1, v2 = f2.d1, f2.d0, f0.d0
            if f0.d1 == v1 and f1.d0 == v2 and f1.d1 == v0:
                out.add((s, f0, f1, f2))
    return out


def test_diamond_sigma1_counts(diamond):
    got, truncated = enumerate_simplices(diamond, 1)
    assert not truncated
    assert set(got) == brute_sigma1(diamond)
    counts = simplex_counts(diamond)
    assert counts["sigma1"] == 20
    assert (counts[NERVE], counts[TANGENT], counts[REVERSED]) == (8, 8, 4)
    assert counts["degenerate"] == 4


def test_diamond_sigma2_matches_brute_force(diamond):
    got = {tuple(c) for c in iter_simplices2(diamond)}
    assert got == brute_sigma2(diamond)


def test_towers_counts(towers):
    counts = simplex_counts(towers)
    assert counts["sigma1"] == len(brute_sigma1(towers)) == 211
    assert counts[TANGENT] == 148


def test_minkowski_sigma1(mink):
    P, _ = mink
    assert simplex_counts(P)["sigma1"] == 2354


def test_classification(diamond):
    assert classify(diamond, Simplex1("o", "o", "x")) == NERVE
    assert classify(diamond, Simplex1("o", "x", "o")) == REVERSED
    assert classify(diamond, Simplex1("o", "x", "y")) == TANGENT
    assert classify(diamond, Simplex1("o", "x", "x")) == TANGENT
    # the opposite of a tangent simplex is tangent
    for b in brute_sigma1(diamond):
        if classify(diamond, b) == TANGENT:
            assert classify(diamond, b.opposite()) == TANGENT


def test_nerve_two_simplex(diamond):
    c = make_simplex2(diamond, "o", ("o", "o", "x"), ("o", "o", "x"), ("x", "x", "x"))
    assert is_nerve2(diamond, c)
    assert all(is_nerve(diamond, f) for f in c.faces())
    assert c.vertices == ("x", "x", "o")


def test_bad_simplices(diamond):
    with pytest.raises(InvalidSimplex):
        make_simplex1(diamond, "x", "o", "x")
    with pytest.raises(InvalidSimplex):
        make_simplex2(diamond, "o", ("o", "y", "x"), ("o", "o", "x"), ("o", "y", "x"))
    with pytest.raises(InvalidSimplex):
        make_simplex2(diamond, "x", ("o", "o", "x"), ("o", "o", "x"), ("x", "x", "x"))


def test_cap_truncates(towers):
    got, truncated = enumerate_simplices(towers, 1, cap=10)
    assert truncated and len(got) == 10
