"""Singular 0-, 1- and 2-simplices of a causal poset.

A 1-simplex ``(s; d0, d1)`` has support ``s`` and faces ``d0, d1 <= s``; it
runs from ``d1`` to ``d0``.  A 2-simplex stores its three faces; with vertices
``v0, v1, v2`` they are ``f0 = v1 -> v2``, ``f1 = v0 -> v2``, ``f2 = v0 -> v1``.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

from .causet import CausalPoset
from .errors import InvalidSimplex

NERVE = "nerve"
TANGENT = "tangent"
REVERSED = "reversed"


class Simplex1(NamedTuple):
    support: str
    d0: str
    d1: str

    @property
    def start(self):
        return self.d1

    @property
    def end(self):
        return self.d0

    def opposite(self) -> "Simplex1":
        return Simplex1(self.support, self.d1, self.d0)

    def is_self_opposite(self) -> bool:
        return self.d0 == self.d1

    def is_degenerate(self) -> bool:
        return self.d0 == self.d1 == self.support

    def __str__(self):
        return f"({self.support};{self.d0},{self.d1})"


class Simplex2(NamedTuple):
    support: str
    f0: Simplex1
    f1: Simplex1
    f2: Simplex1

    @property
    def vertices(self):
        return (self.f2.d1, self.f2.d0, self.f0.d0)

    def faces(self):
        return (self.f0, self.f1, self.f2)

    def __str__(self):
        return f"[{self.support}; {self.f0}, {self.f1}, {self.f2}]"


def make_simplex1(P: CausalPoset, support, d0, d1) -> Simplex1:
    for e in (support, d0, d1):
        P.idx(e)
    if not (P.le(d0, support) and P.le(d1, support)):
        raise InvalidSimplex(f"faces of ({support};{d0},{d1}) must lie below the support")
    return Simplex1(support, d0, d1)


def make_simplex2(P: CausalPoset, support, f0, f1, f2) -> Simplex2:
    f0, f1, f2 = (Simplex1(*f) for f in (f0, f1, f2))
    for f in (f0, f1, f2):
        make_simplex1(P, *f)
        if not P.le(f.support, support):
            raise InvalidSimplex(f"face {f} does not lie below {support}")
    # f0: v1->v2, f1: v0->v2, f2: v0->v1
    if not (f0.d0 == f1.d0 and f0.d1 == f2.d0 and f1.d1 == f2.d1):
        raise InvalidSimplex("faces do not share vertices consistently")
    return Simplex2(support, f0, f1, f2)


def is_nerve(P: CausalPoset, b: Simplex1) -> bool:
    return b.d0 == b.support and P.le(b.d1, b.d0)


def classify(P: CausalPoset, b: Simplex1) -> str:
    """nerve, tangent (both faces strictly below the support) or reversed nerve."""
    if is_nerve(P, b):
        return NERVE
    if b.d0 != b.support and b.d1 != b.support:
        return TANGENT
    return REVERSED


def is_tangent(P: CausalPoset, b: Simplex1) -> bool:
    return b.d0 != b.support and b.d1 != b.support


def is_nerve2(P: CausalPoset, c: Simplex2) -> bool:
    """c comes from a chain v0 <= v1 <= v2 = support."""
    if not all(is_nerve(P, f) for f in c.faces()):
        return False
    return c.f0.support == c.f1.support == c.support


def simplex_opposite(b: Simplex1) -> Simplex1:
    return b.opposite()


def enumerate_simplices(P: CausalPoset, degree: int, cap: int | None = None):
    """All singular simplices of the given degree; returns (list, truncated)."""
    if degree == 0:
        out = list(P.elements)
        return (out[:cap], True) if cap is not None and len(out) > cap else (out, False)
    if degree == 1:
        out = []
        for s in P.elements:
            low = P.below(s)
            for d0, d1 in itertools.product(low, low):
                if cap is not None and len(out) >= cap:
                    return out, True
                out.append(Simplex1(s, d0, d1))
        return out, False
    if degree == 2:
        out = []
        for c in iter_simplices2(P):
            if cap is not None and len(out) >= cap:
                return out, True
            out.append(c)
        return out, False
    raise ValueError("degree must be 0, 1 or 2")


def iter_simplices2(P: CausalPoset, supports=None):
    for s in supports if supports is not None else P.elements:
        low = P.below(s)
        for v0, v1, v2 in itertools.product(low, repeat=3):
            s0 = [t for t in low if P.le(v1, t) and P.le(v2, t)]
            s1 = [t for t in low if P.le(v0, t) and P.le(v2, t)]
            s2 = [t for t in low if P.le(v0, t) and P.le(v1, t)]
            for a, b, c in itertools.product(s0, s1, s2):
                yield Simplex2(s, Simplex1(a, v2, v1), Simplex1(b, v2, v0), Simplex1(c, v1, v0))


def tangent_simplices(P: CausalPoset) -> list:
    return [b for b in enumerate_simplices(P, 1)[0] if is_tangent(P, b)]


def nerve_simplices(P: CausalPoset) -> list:
    return [b for b in enumerate_simplices(P, 1)[0] if is_nerve(P, b)]


def simplex_counts(P: CausalPoset) -> dict:
    s1 = enumerate_simplices(P, 1)[0]
    kinds = {NERVE: 0, TANGENT: 0, REVERSED: 0}
    for b in s1:
        kinds[classify(P, b)] += 1
    degenerate = sum(b.is_degenerate() for b in s1)
    return {"sigma0": len(P), "sigma1": len(s1), "degenerate": degenerate, **kinds}
