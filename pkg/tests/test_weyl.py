import math

import numpy as np
import pytest

from loopnet import fixtures
from loopnet.cochain import TestFunction
from loopnet.errors import QuadratureNotConverged
from loopnet.simplex import Simplex1
from loopnet.weyl import (
    IDENTITY,
    HyperboloidProfile,
    QuadratureConfig,
    WeylElement,
    corona_check,
    corona_integral,
    em_transform,
    hyperboloid_inner,
    phase_distance,
    sigma,
    weyl_commutator,
    weyl_multiply,
)
from oracles import MOMENTA, em_transform_4d

PROF = HyperboloidProfile(1.0)
A = TestFunction.atom((0, 0, 0, 0), 1, 1.0)
B = TestFunction.atom((3, 0, 0, 0), 1, 0.5)  # timelike to A
S = TestFunction.atom((0, 6, 0, 0), 1, 1.0)  # spacelike to A
S1 = TestFunction.atom((1, 6, 0, 0), 1, 1.0)  # spacelike, not simultaneous
F = TestFunction.atom((0.5, 1, -2, 0.25), 1.5, 2.0) + TestFunction.atom((0, 0, 0, 0), 1, -0.7)


@pytest.mark.parametrize("mass", [1.0, 0.0])
def test_em_transform_matches_4d_quadrature(mass):
    _, E = em_transform(F, HyperboloidProfile(mass), MOMENTA)
    ref = em_transform_4d(F, MOMENTA, mass=mass)
    assert np.max(np.abs(E - ref) / np.abs(ref)) < 1e-6


def test_em_transform_translation_phase():
    y = (1, 2, 0, -1)
    moved = TestFunction.atom(y, 1, 1.0)
    p, E0 = em_transform(A, PROF, MOMENTA)
    _, E1 = em_transform(moved, PROF, MOMENTA)
    om = np.sqrt(np.sum(p**2, axis=1) + 1)
    np.testing.assert_allclose(E1, np.exp(1j * (om * y[0] - p @ np.array(y[1:]))) * E0, atol=1e-15)


def test_negative_mass_rejected():
    with pytest.raises(ValueError):
        HyperboloidProfile(-1.0)


def test_sigma_antisymmetric_and_causal():
    assert sigma(A, B, PROF) == pytest.approx(-sigma(B, A, PROF), abs=1e-15)
    assert abs(sigma(A, A, PROF)) < 1e-15
    ref = abs(sigma(A, B, PROF))
    assert ref > 1e-3 * hyperboloid_inner(A, A, PROF).real
    # spacelike separated supports: the commutator function vanishes
    assert sigma(A, S, PROF) == 0.0
    assert abs(sigma(A, S1, PROF)) < 1e-8 * ref


def test_sigma_bilinear():
    lhs = sigma(A * 2.0 + S, B, PROF)
    assert lhs == pytest.approx(2 * sigma(A, B, PROF) + sigma(S, B, PROF), rel=1e-12)


def test_gram_is_hermitian_positive():
    fs = [A, B, S, F]
    G = np.array([[hyperboloid_inner(f, g, PROF) for g in fs] for f in fs])
    np.testing.assert_allclose(G, G.conj().T, atol=1e-14)
    assert np.min(np.linalg.eigvalsh(G)) > 0


def test_weyl_relations():
    a, b, c = WeylElement(0.3, A), WeylElement(-1.0, B), WeylElement(0.0, S * 3.0)
    m = lambda x, y: weyl_multiply(x, y, PROF)
    left, right = m(m(a, b), c), m(a, m(b, c))
    assert left.func == right.func and phase_distance(left.phase, right.phase) < 1e-12
    assert m(a, a.inverse()).is_identity(1e-15)
    assert m(a, IDENTITY) == a
    comm = weyl_commutator(a, b, PROF)
    assert not comm.func
    assert phase_distance(comm.phase, -sigma(A, B, PROF)) < 1e-12
    assert weyl_commutator(a, c, PROF).is_identity(1e-9)


def test_quadrature_refuses_coarse_grids():
    prof = HyperboloidProfile(1.0, QuadratureConfig(radial_nodes=32))
    with pytest.raises(QuadratureNotConverged):
        hyperboloid_inner(A, B, prof)
    assert PROF.convergence_ok()


# --------------------------------------------------------------- coronas


def test_corona_seeded_and_stable(field, mink):
    P, _ = mink
    fc = field[2]
    b = Simplex1("ob0", "x0", "y0")
    f_ev, _ = fc.parts(b)
    args = (P.region("ob0"), [P.region("x0"), P.region("y0")], f_ev, fc.prof.config)
    assert corona_integral(*args) == corona_integral(*args)
    v, v2, change = corona_check(*args)
    assert v > 0 and change < 0.01
    other = corona_integral(*args[:3], QuadratureConfig(seed=7))
    assert other == pytest.approx(v, rel=0.02)


def test_corona_excludes_faces(mink, field):
    P, _ = mink
    f_ev, _ = field[2].parts(Simplex1("ob0", "x0", "y0"))
    full = corona_integral(P.region("ob0"), [], f_ev)
    cut = corona_integral(P.region("ob0"), [P.region("x0"), P.region("y0")], f_ev)
    assert 0 < cut < full
    assert corona_integral(P.region("ob0"), [P.region("ob0")], f_ev) == 0.0


def test_corona_rotation_symmetrized(mink, field):
    P, act = mink
    fc = field[2]
    b = Simplex1("ob0", "x0", "y0")
    rb = Simplex1("ob1", "x1", "y1")
    assert act.act("r", "ob0") == "ob1"

    def direct(s):
        f_ev, _ = fc.parts(s)
        faces = [P.region(s.d0), P.region(s.d1)]
        return corona_integral(P.region(s.support), faces, f_ev, fc.prof.config, fc.linear_maps)

    assert direct(rb) == pytest.approx(direct(b), rel=1e-12)


def test_ladder_translation_covariance(mink, field):
    P, _ = mink
    fc = field[2]
    lo = Simplex1("s-1", "a0", "a-1")
    hi = Simplex1("s0", "a1", "a0")
    ev_lo, odd_lo = fc.parts(lo)
    ev_hi, odd_hi = fc.parts(hi)
    assert ev_lo.transport(fixtures.TIME_SHIFT) == ev_hi
    assert odd_lo.transport(fixtures.TIME_SHIFT) == odd_hi

    def direct(s, ev):
        faces = [P.region(s.d0), P.region(s.d1)]
        return corona_integral(P.region(s.support), faces, ev, fc.prof.config)

    assert direct(hi, ev_hi) == pytest.approx(direct(lo, ev_lo), rel=1e-12)
    assert fc.coefficient(hi) == fc.coefficient(lo) > 0


def test_field_values(mink, field):
    P, act = mink
    fc = field[2]
    assert fc.value(Simplex1("O0", "O0", "x0")) == IDENTITY
    v = fc.value(Simplex1("ob0", "x0", "y0"))
    vb = fc.value(Simplex1("ob0", "y0", "x0"))
    assert v.func and vb.func == -v.func
