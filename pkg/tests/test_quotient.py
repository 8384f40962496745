import random

import pytest
from hypothesis import given, settings, strategies as st

from loopnet import fixtures
from loopnet.connection import MatrixBackend
from loopnet.errors import CertificateInvalid
from loopnet.loopgrp import Word, format_word, inverse, multiply, parse_word, reduce
from loopnet.net import FibreCache, commutation_certificate
from loopnet.quotient import (
    EQUAL,
    UNEQUAL,
    UNKNOWN,
    Certificate,
    QuotientEngine,
    quotient_equal,
    reverse_certificate,
    verify_certificate,
)

TOWERS = fixtures.two_towers()
FIB = FibreCache(TOWERS)


@pytest.fixture(scope="module")
def tower_backend():
    return MatrixBackend.covariant(TOWERS, None, ["O1", "O2"], dim=2, seed=5)


def test_disjoint_loops_commute():
    p, q = FIB["O1"].generators[3], FIB["O2"].generators[7]
    v = quotient_equal(TOWERS, multiply(p, q), multiply(q, p))
    assert v.status == EQUAL
    assert verify_certificate(TOWERS, v.certificate)
    rev = reverse_certificate(v.certificate)
    assert rev.start == inverse(v.certificate.start)
    assert verify_certificate(TOWERS, rev)
    assert v.certificate.to_json()["steps"]


def test_free_equality_needs_no_search():
    w = FIB["O1"].generators[0]
    v = quotient_equal(TOWERS, multiply(w, inverse(w), w), w)
    assert v.status == EQUAL and len(v.certificate) == 0


def test_same_tower_is_unknown_without_backend():
    p, p2 = FIB["O1"].generators[0], FIB["O1"].generators[5]
    v = quotient_equal(TOWERS, multiply(p, p2), multiply(p2, p), depth=3, width=2000)
    assert v.status == UNKNOWN


def test_backend_separates_same_tower(tower_backend):
    p, p2 = FIB["O1"].generators[0], FIB["O1"].generators[5]
    eng = QuotientEngine(TOWERS, [tower_backend])
    v = eng.equal(multiply(p, p2), multiply(p2, p))
    assert v.status == UNEQUAL and v.witness["separator"] == "matrix"


def test_uncertified_backend_is_ignored():
    be = MatrixBackend.random(TOWERS, dim=2, seed=1)
    assert not be.certify_causal()
    p, p2 = FIB["O1"].generators[0], FIB["O1"].generators[5]
    v = QuotientEngine(TOWERS, [be], depth=2, width=500).equal(multiply(p, p2), multiply(p2, p))
    assert v.status == UNKNOWN


def test_abelianization_separates(diamond):
    a = parse_word("(o;y,x)", diamond)
    b = parse_word("(ohat;y,x)", diamond)
    v = quotient_equal(diamond, a, b)
    assert v.status == UNEQUAL and v.witness["separator"] == "abelianization"


def test_tampered_certificates_are_rejected():
    p, q = FIB["O1"].generators[3], FIB["O2"].generators[7]
    cert = commutation_certificate(TOWERS, p, q, ("O1", "O2"))
    assert verify_certificate(TOWERS, cert)
    bad = Certificate(cert.start, [dict(cert.steps[0], witness=["O2", "O2"]), cert.steps[1]])
    with pytest.raises(CertificateInvalid):
        verify_certificate(TOWERS, bad)
    wrong = Certificate(cert.start, [dict(cert.steps[0], witness=["O1", "O1"]), cert.steps[1]])
    with pytest.raises(CertificateInvalid):
        verify_certificate(TOWERS, wrong)
    short = Certificate(cert.start, cert.steps[1:])
    with pytest.raises(CertificateInvalid):
        verify_certificate(TOWERS, short)
    with pytest.raises(CertificateInvalid):
        verify_certificate(TOWERS, Certificate(cert.start, [{"op": "teleport"}]))


def test_conjugated_commutator_needs_insertion():
    # w [p, q] w̄ with w a single letter
    p, q = FIB["O1"].generators[0], FIB["O2"].generators[0]
    x = p[0]
    c = multiply(Word([x]), p, q, inverse(p), inverse(q), Word([x.inverse()]))
    v = quotient_equal(TOWERS, c, Word())
    assert v.status == EQUAL
    assert verify_certificate(TOWERS, v.certificate)


LETTERS = sorted({x for g in FIB["T"].generators[:40] for x in g}, key=str)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.sampled_from(LETTERS), max_size=6),
    st.lists(st.sampled_from(LETTERS), max_size=6),
    st.integers(0, len(FIB["O1"]) - 1),
    st.integers(0, len(FIB["O2"]) - 1),
)
def test_inserted_commutators_are_never_separated(a1, a2, i, j):
    backend = MatrixBackend.covariant(TOWERS, None, ["O1", "O2"], dim=2, seed=5)
    p, q = FIB["O1"].generators[i], FIB["O2"].generators[j]
    lhs = multiply(Word(a1), p, q, inverse(p), inverse(q), Word(a2))
    rhs = multiply(Word(a1), Word(a2))
    v = QuotientEngine(TOWERS, [backend], depth=3, width=3000).equal(lhs, rhs)
    assert v.status != UNEQUAL
    if v.status == EQUAL:
        assert verify_certificate(TOWERS, v.certificate)
