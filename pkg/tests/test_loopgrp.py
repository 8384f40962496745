import random

import pytest
from hypothesis import given, settings, strategies as st

from loopnet import fixtures
from loopnet.causet import PosetMorphism
from loopnet.errors import NotAPath, NotTangent
from loopnet.loopgrp import (
    Letter,
    Word,
    abelianize,
    apply_morphism,
    endpoints,
    format_word,
    in_loop_group,
    inverse,
    is_loop,
    is_path,
    letters_of,
    loop_blocks,
    make_letter,
    multiply,
    parse_word,
    perp_witness,
    reduce,
    signed_letters,
)
from loopnet.net import FibreCache
from loopnet.simplex import Simplex1
from oracles import fixpoint_reduce, loop_rich_word, partition_member

TOWERS = fixtures.two_towers()
LETTERS = signed_letters(TOWERS)
FIB = FibreCache(TOWERS)


def random_word(rng, n):
    return Word(rng.choice(LETTERS) for _ in range(n))


def test_reduce_matches_fixpoint_oracle():
    rng = random.Random(1)
    small = LETTERS[:6]  # a small alphabet produces many cancellations
    for k in range(10_000):
        alphabet = small if k % 2 else LETTERS
        w = Word(rng.choice(alphabet) for _ in range(rng.randint(0, 200)))
        assert reduce(w) == fixpoint_reduce(w)


def test_loop_membership_matches_partition_oracle():
    rng = random.Random(2)
    fib = FIB
    members = 0
    for _ in range(1000):
        w = loop_rich_word(rng, TOWERS, fib, rng.randint(1, 12))
        got = in_loop_group(w)
        assert got == partition_member(w), format_word(w)
        members += got
    assert 100 < members < 900  # both outcomes are exercised


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(LETTERS), max_size=30), st.lists(st.sampled_from(LETTERS), max_size=30))
def test_group_laws(a, b):
    a, b = Word(a), Word(b)
    assert reduce(multiply(a, inverse(a))) == ()
    assert reduce(inverse(inverse(a))) == reduce(a)
    assert reduce(inverse(multiply(a, b))) == reduce(multiply(inverse(b), inverse(a)))
    assert reduce(reduce(a)) == reduce(a)
    assert reduce(multiply(reduce(a), b)) == reduce(multiply(a, b))


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_products_of_loops_are_members(data):
    gens = [g for o in ("O1", "O2", "T") for g in FIB[o].generators[:60]]
    picks = data.draw(st.lists(st.sampled_from(gens), min_size=1, max_size=5))
    flips = data.draw(st.lists(st.booleans(), min_size=len(picks), max_size=len(picks)))
    w = multiply(*[inverse(g) if f else g for g, f in zip(picks, flips)])
    blocks = loop_blocks(w)
    assert blocks is not None
    assert all(is_loop(x) for x in blocks)
    assert multiply(*blocks) == reduce(w)


def test_paths_and_endpoints(diamond):
    p = parse_word("(o;y,x)", diamond)
    q = parse_word("(ohat;x,y) (o;y,x)", diamond)
    assert is_path(q) and is_loop(q, at="x") and not is_loop(q, at="y")
    assert endpoints(p) == ("x", "y")
    with pytest.raises(NotAPath):
        endpoints(Word())
    with pytest.raises(NotAPath):
        endpoints(parse_word("(o;y,x) (o;y,x)", diamond))


def test_parse_and_format(diamond):
    w = parse_word("(o;y,x) ~(o;x,x) (ohat;x,y)", diamond)
    assert format_word(w) == "(o;y,x) ~(o;x,x) (ohat;x,y)"
    assert parse_word(format_word(w), diamond) == w
    assert format_word(Word()) == "1" and parse_word("1") == ()
    with pytest.raises(NotTangent):
        parse_word("(o;o,x)", diamond)
    with pytest.raises(ValueError):
        parse_word("(o;y,x) junk", diamond)


def test_letters_are_canonical(diamond):
    b = Simplex1("o", "y", "x")
    x, y = make_letter(b), make_letter(b.opposite())
    assert x.simplex == y.simplex and x.sign == -y.sign
    assert x.oriented == b and y.oriented == b.opposite()
    # self-opposite letters get a formal inverse
    s = make_letter(Simplex1("o", "x", "x"))
    assert s.inverse() != s and reduce(Word([s, s.inverse()])) == ()
    assert reduce(Word([s, s])) == Word([s, s])
    assert len(letters_of(diamond)) == 6


def test_abelianization(diamond):
    w = parse_word("(o;y,x) (ohat;x,y) (o;x,y)", diamond)
    ab = abelianize(w)
    assert ab == {make_letter(("ohat", "x", "y")).simplex: make_letter(("ohat", "x", "y")).sign}


def test_perp_witness_on_towers(towers):
    fib = FibreCache(towers, 4)
    p, q = fib["O1"].generators[0], fib["O2"].generators[0]
    assert perp_witness(p, q, towers) is not None
    p2 = fib["O1"].generators[1]
    assert perp_witness(p, p2, towers) is None


def test_morphism_on_words():
    P, act = fixtures.minkowski_with_rotations()
    psi = PosetMorphism(P, P, act.perms["r"])
    p, q = fixtures.witness_loops()
    img = apply_morphism(p, psi)
    assert is_loop(img) and {x.support for x in img} == {"ob1", "oa1"}
    assert apply_morphism(inverse(p), psi) == inverse(img)
