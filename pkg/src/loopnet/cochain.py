"""Test-function valued cochains on the simplicial set of a geometric poset.

Test functions are finite sums of bump atoms.  An atom in Minkowski space
with center ``c`` and scale ``R`` is

    a · h(2 (t - c_t) / R) · h(4 |x - c|² / R²),   h(s) = exp(-1 / (1 - s²)),

supported in the box |t - c_t| < R/2, |x - c| < R/2, which lies inside the
double cone of radius R around c.  On the circle an atom is a · h(2 (θ - c) / R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.integrate import quad

from .causet import Arc, CausalPoset, DoubleCone, SymmetryAction, to_fraction
from .errors import ObstructedOrbit, SupportViolation
from .simplex import Simplex1, Simplex2, enumerate_simplices, is_nerve


def bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = np.abs(s) < 1
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


@dataclass(frozen=True)
class Atom:
    amplitude: float
    center: tuple
    scale: Fraction

    def key(self):
        return (self.center, self.scale)


class TestFunction:
    """Immutable sum of atoms, merged by (center, scale) and sorted."""

    __slots__ = ("atoms",)
    __test__ = False  # keep pytest from collecting it

    def __init__(self, atoms=()):
        merged = {}
        for a in atoms:
            k = (tuple(to_fraction(v) for v in a.center), to_fraction(a.scale))
            merged[k] = merged.get(k, 0.0) + float(a.amplitude)
        self.atoms = tuple(
            Atom(v, c, s) for (c, s), v in sorted(merged.items()) if v != 0.0
        )

    @classmethod
    def atom(cls, center, scale, amplitude=1.0):
        return cls([Atom(amplitude, tuple(center), scale)])

    def __add__(self, other):
        return TestFunction(self.atoms + other.atoms)

    def __neg__(self):
        return TestFunction(Atom(-a.amplitude, a.center, a.scale) for a in self.atoms)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = float(c)
        if c == 0.0:
            return ZERO
        return TestFunction(Atom(c * a.amplitude, a.center, a.scale) for a in self.atoms)

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.atoms)

    def __eq__(self, other):
        return isinstance(other, TestFunction) and self.atoms == other.atoms

    def __hash__(self):
        return hash(self.atoms)

    def __repr__(self):
        return f"TestFunction({len(self.atoms)} atoms)"

    def close_to(self, other, tol=1e-12) -> bool:
        a = {x.key(): x.amplitude for x in self.atoms}
        b = {x.key(): x.amplitude for x in other.atoms}
        scale = max([abs(v) for v in a.values()] + [abs(v) for v in b.values()] + [1e-300])
        return all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= tol * scale for k in set(a) | set(b))

    def pullback(self, g) -> "TestFunction":
        """F ∘ g for an isometry g: each atom moves to g⁻¹(center)."""
        ginv = g.inverse()
        return TestFunction(Atom(a.amplitude, _move(ginv, a.center), a.scale) for a in self.atoms)

    def transport(self, g) -> "TestFunction":
        """F ∘ g⁻¹: each atom moves to g(center)."""
        return TestFunction(Atom(a.amplitude, _move(g, a.center), a.scale) for a in self.atoms)

    def evaluate(self, pts) -> np.ndarray:
        """Values at points; pts has shape (N, dim)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(len(pts))
        for a in self.atoms:
            c = np.array([float(v) for v in a.center])
            R = float(a.scale)
            d = pts - c
            if len(c) == 1:
                out += a.amplitude * bump(2 * d[:, 0] / R)
            else:
                r2 = np.sum(d[:, 1:] ** 2, axis=1)
                out += a.amplitude * bump(2 * d[:, 0] / R) * bump(4 * r2 / R**2)
        return out

    def to_json(self):
        return [
            {"amplitude": a.amplitude, "center": [str(v) for v in a.center], "scale": str(a.scale)}
            for a in self.atoms
        ]


ZERO = TestFunction()


def _move(g, center):
    if len(center) == 1:
        return (g.apply(center[0]),)
    return g.apply(center)


def atom_mass(scale, dim=4) -> float:
    """L1 norm of the unit-amplitude atom of the given scale."""
    R = float(scale)
    t = quad(lambda s: float(bump(s)), -1, 1, epsabs=0, epsrel=1e-13)[0] * R / 2
    if dim == 1:
        return t
    r = quad(lambda x: 4 * math.pi * x * x * float(bump(4 * x * x / R**2)), 0, R / 2,
             epsabs=0, epsrel=1e-13)[0]
    return t * r


# ----------------------------------------------------------------- cochains


def simplex_support(x):
    return x if isinstance(x, str) else x.support


def map_simplex(x, perm: Mapping):
    if isinstance(x, str):
        return perm[x]
    if isinstance(x, Simplex1):
        return Simplex1(perm[x.support], perm[x.d0], perm[x.d1])
    return Simplex2(perm[x.support], *(map_simplex(f, perm) for f in x.faces()))


def opposite(x):
    return x.opposite()


class Cochain:
    """Degree-n cochain: a test function for each simplex in the domain."""

    def __init__(self, poset: CausalPoset, degree: int, values: Mapping, domain=None):
        self.poset = poset
        self.degree = degree
        self.values = {k: v for k, v in values.items() if v}
        if domain is None:
            domain = list(values) if degree == 2 else enumerate_simplices(poset, degree)[0]
        self.domain = list(domain)

    def __getitem__(self, x) -> TestFunction:
        return self.values.get(x, ZERO)

    def items(self):
        for x in self.domain:
            yield x, self[x]

    def __add__(self, other):
        return Cochain(self.poset, self.degree,
                       {x: self[x] + other[x] for x in self.domain}, self.domain)

    def __sub__(self, other):
        return Cochain(self.poset, self.degree,
                       {x: self[x] - other[x] for x in self.domain}, self.domain)

    def scaled(self, c):
        return Cochain(self.poset, self.degree, {x: self[x] * c for x in self.domain}, self.domain)

    def equals(self, other, tol=0.0) -> bool:
        for x in set(self.domain) | set(other.domain):
            if tol == 0.0:
                if self[x] != other[x]:
                    return False
            elif not self[x].close_to(other[x], tol):
                return False
        return True

    def is_zero(self) -> bool:
        return not self.values


def d(f: Cochain) -> Cochain:
    """Alternating face sum."""
    P = f.poset
    if f.degree == 0:
        vals = {b: f[b.d0] - f[b.d1] for b in enumerate_simplices(P, 1)[0]}
        return Cochain(P, 1, vals)
    if f.degree == 1:
        from .simplex import iter_simplices2

        dom = list(iter_simplices2(P))
        return Cochain(P, 2, {c: f[c.f0] - f[c.f1] + f[c.f2] for c in dom}, dom)
    raise ValueError("d is implemented for degrees 0 and 1")


def delta(f: Cochain) -> Cochain:
    """(δf)_b = f_{∂₀b} - f_{∂₁b} + f_{|b|}."""
    if f.degree != 0:
        raise ValueError("delta takes a 0-cochain")
    P = f.poset
    return Cochain(P, 1, {b: f[b.d0] - f[b.d1] + f[b.support] for b in enumerate_simplices(P, 1)[0]})


def bar(f: Cochain) -> Cochain:
    if f.degree != 1:
        raise ValueError("bar acts on 1-cochains")
    return Cochain(f.poset, 1, {b: f[b.opposite()] for b in f.domain}, f.domain)


def even_part(f: Cochain) -> Cochain:
    fb = bar(f)
    return Cochain(f.poset, 1, {b: (f[b] + fb[b]) * 0.5 for b in f.domain}, f.domain)


def odd_part(f: Cochain) -> Cochain:
    fb = bar(f)
    return Cochain(f.poset, 1, {b: (f[b] - fb[b]) * 0.5 for b in f.domain}, f.domain)


def cutoff_tilde(f: Cochain) -> Cochain:
    """Zero on nerve simplices, unchanged elsewhere."""
    P = f.poset
    return Cochain(P, 1, {b: v for b, v in f.values.items() if not is_nerve(P, b)}, f.domain)


def check_support(f: Cochain, raise_error=True) -> list:
    """Every atom of f_x must sit inside the closure of |x|."""
    P = f.poset
    bad = []
    for x, v in f.values.items():
        reg = P.region(simplex_support(x))
        for a in v.atoms:
            c = a.center[0] if isinstance(reg, Arc) else a.center
            if reg is None or not reg.holds_atom(c, a.scale):
                bad.append(x)
                break
    if bad and raise_error:
        raise SupportViolation(f"{len(bad)} values leave their supports, e.g. {bad[0]}")
    return bad


def group_action(action: SymmetryAction, g, f: Cochain) -> Cochain:
    """(g f)_x = f_{g(x)} ∘ g."""
    m = action.geometric(g)
    perm = action.perms[g]
    return Cochain(f.poset, f.degree,
                   {x: f[map_simplex(x, perm)].pullback(m) for x in f.domain}, f.domain)


def is_invariant(action: SymmetryAction, f: Cochain, tol=0.0) -> bool:
    return all(group_action(action, g, f).equals(f, tol) for g in action.names)


# ------------------------------------------------------- invariant cochains


def region_atom(reg, amplitude=1.0, normalize=True) -> TestFunction:
    """Atom centred in a region with scale equal to its radius (or arc length)."""
    if isinstance(reg, DoubleCone):
        center, scale, dim = reg.center, reg.radius, 4
    elif isinstance(reg, Arc):
        center, scale, dim = (reg.midpoint,), Fraction(reg.length), 1
    else:
        raise TypeError("region has no atom model")
    amp = amplitude / atom_mass(scale, dim) if normalize else amplitude
    return TestFunction.atom(center, scale, amp)


def build_invariant_0cochain(action: SymmetryAction, amplitude=1.0, normalize=True) -> Cochain:
    """Orbit transport of a centred atom; the stabilizer must fix the atom."""
    P = action.poset
    vals = {}
    for o in P.elements:
        if o in vals:
            continue
        f0 = region_atom(P.region(o), amplitude, normalize)
        stab = action.stabilizer(o)
        for g in stab:
            if f0.pullback(action.geometric(g)) != f0:
                raise ObstructedOrbit(
                    f"stabilizer element {g} of {o} moves every candidate atom",
                    action.orbit(o), stab,
                )
        for g in action.names:
            vals[action.act(g, o)] = f0.transport(action.geometric(g))
    return Cochain(P, 0, vals)


def build_invariant_1cochain(action: SymmetryAction, amplitude=1.0, normalize=True) -> Cochain:
    """Arc or cone bumps on non-degenerate 1-simplices, constant on orbits.

    Each orbit gets its own amplitude factor 1 + (k mod 3)/3 so that a simplex
    and its opposite generally carry different values.
    """
    P = action.poset
    vals = {}
    k = 0
    for b in enumerate_simplices(P, 1)[0]:
        if b.is_degenerate() or b in vals:
            continue
        f0 = region_atom(P.region(b.support), amplitude * (1 + (k % 3) / 3), normalize)
        k += 1
        for g in action.stabilizer(b.support):
            if map_simplex(b, action.perms[g]) == b and f0.pullback(action.geometric(g)) != f0:
                raise ObstructedOrbit(f"stabilizer of {b} moves every candidate atom")
        for g in action.names:
            vals[map_simplex(b, action.perms[g])] = f0.transport(action.geometric(g))
    return Cochain(P, 1, vals)
