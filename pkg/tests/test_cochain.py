import math

import numpy as np
import pytest
from scipy.integrate import dblquad

from loopnet import fixtures
from loopnet.cochain import (
    Cochain,
    TestFunction,
    atom_mass,
    bar,
    build_invariant_0cochain,
    build_invariant_1cochain,
    bump,
    check_support,
    cutoff_tilde,
    d,
    delta,
    even_part,
    group_action,
    is_invariant,
    odd_part,
)
from loopnet.errors import ObstructedOrbit, SupportViolation
from loopnet.simplex import enumerate_simplices, is_nerve


@pytest.fixture(scope="module")
def f0(mink):
    return build_invariant_0cochain(mink[1])


@pytest.fixture(scope="module")
def f1(mink):
    return build_invariant_1cochain(mink[1])


def test_bump_is_smooth_and_compact():
    s = np.linspace(-1.5, 1.5, 301)
    v = bump(s)
    assert np.all(v[np.abs(s) >= 1] == 0) and np.all(v[np.abs(s) < 1] > 0)
    assert bump(np.array([0.999999]))[0] < 1e-100


def test_atom_mass_against_cartesian_quadrature():
    # the 4-D atom factorizes; check the spatial factor in cylindrical form
    R = 2.0
    radial = dblquad(lambda z, rho: 2 * math.pi * rho * float(bump(4 * (rho**2 + z**2) / R**2)),
                     0, R / 2, lambda rho: -R / 2, lambda rho: R / 2, epsabs=0, epsrel=1e-10)[0]
    t = atom_mass(R, dim=1)
    assert atom_mass(R) == pytest.approx(t * radial, rel=1e-8)


def test_normalized_atoms_have_unit_mass(mink):
    P, act = mink
    f = build_invariant_0cochain(act, amplitude=1.0)
    a = f["O0"].atoms[0]
    assert a.amplitude * atom_mass(a.scale) == pytest.approx(1.0, rel=1e-12)


def test_d_squared_vanishes():
    P, act = fixtures.circle_with_rotations()
    rng = np.random.default_rng(3)
    # distinct centers keep atoms from merging, so cancellation is exact
    f = Cochain(P, 0, {o: TestFunction.atom((0.25 * i,), 1, float(rng.normal()))
                       for i, o in enumerate(P.elements)})
    assert not d(f).is_zero()
    assert d(d(f)).is_zero()
    with pytest.raises(ValueError):
        d(d(d(f)))


def test_delta_adds_support_term(f0):
    df, dl = d(f0), delta(f0)
    for b, v in dl.items():
        assert v.close_to(df[b] + f0[b.support], 1e-14)


def test_bar_is_involution_and_splits(f1):
    assert bar(bar(f1)).equals(f1)
    assert (even_part(f1) + odd_part(f1)).equals(f1, 1e-14)
    assert bar(even_part(f1)).equals(even_part(f1), 1e-14)
    assert bar(odd_part(f1)).equals(odd_part(f1).scaled(-1.0), 1e-14)
    assert not odd_part(f1).is_zero()


def test_cutoff_tilde_kills_nerve(mink, f1):
    P = mink[0]
    t = cutoff_tilde(f1)
    for b, v in t.items():
        if is_nerve(P, b):
            assert not v
        else:
            assert v == f1[b]


def test_supports(mink, f0, f1):
    assert check_support(f0) == [] and check_support(f1) == []
    P = mink[0]
    b = next(b for b in enumerate_simplices(P, 1)[0] if b.support == "x0")
    moved = Cochain(P, 1, {b: TestFunction.atom((0, 40, 0, 0), 1)})
    with pytest.raises(SupportViolation):
        check_support(moved)
    assert check_support(moved, raise_error=False) == [b]


def test_invariance(mink, f0, f1):
    act = mink[1]
    assert is_invariant(act, f0) and is_invariant(act, f1)
    scaled = Cochain(f0.poset, 0, dict(f0.values, C=f0["C"] * 2.0))
    assert is_invariant(act, scaled)  # C is fixed by every rotation
    broken = Cochain(f0.poset, 0, dict(f0.values, O1=f0["O1"] * 2.0))
    assert not is_invariant(act, broken)
    for g in act.names:
        assert group_action(act, g, group_action(act, act.inverse(g), f1)).equals(f1, 1e-12)


def test_mismatched_realization_is_obstructed():
    P, act = fixtures.mismatched_realization()
    with pytest.raises(ObstructedOrbit) as exc:
        build_invariant_0cochain(act)
    assert exc.value.stabilizer is not None


def test_circle_cochains():
    P, act = fixtures.circle_with_rotations()
    f = build_invariant_0cochain(act)
    assert is_invariant(act, f) and check_support(f) == []
    assert d(d(f)).is_zero()
