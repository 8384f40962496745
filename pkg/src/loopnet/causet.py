"""Finite causal posets: ordered sets carrying a causal disjointness relation.

Elements are string ids.  The order is stored as a dense boolean matrix
``leq[i, j] == (e_i <= e_j)`` and disjointness as a symmetric boolean matrix.
Geometric posets (double cones, circle arcs, causal-set subsets) also keep a
region per element so that cochain values can be placed and moved around.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EmptyPoset, PosetInvalid, PosetTooLarge, UnknownElement


def to_fraction(x) -> Fraction:
    """Exact rational from int, float (decimal repr), Fraction or 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as a rational number")


def frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- regions


@dataclass(frozen=True)
class DoubleCone:
    """Open double cone |x - c| + |t - c_t| < radius; center is (t, x, y, z)."""

    center: tuple
    radius: Fraction

    def __post_init__(self):
        c = tuple(to_fraction(v) for v in self.center)
        if len(c) != 4:
            raise ValueError("double cone center needs 4 coordinates (t, x, y, z)")
        r = to_fraction(self.radius)
        if r <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    def _offsets(self, other):
        dt = abs(other.center[0] - self.center[0])
        dx2 = sum((a - b) ** 2 for a, b in zip(other.center[1:], self.center[1:]))
        return dt, dx2

    def includes(self, other: "DoubleCone") -> bool:
        # other is inside self iff |dc| + |dt| + r' <= R
        dt, dx2 = self._offsets(other)
        m = self.radius - other.radius - dt
        return m >= 0 and dx2 <= m * m

    def compactly_includes(self, other: "DoubleCone") -> bool:
        dt, dx2 = self._offsets(other)
        m = self.radius - other.radius - dt
        return m > 0 and dx2 < m * m

    def perp(self, other: "DoubleCone") -> bool:
        # closures spacelike separated: |dc| >= |dt| + R + R'
        dt, dx2 = self._offsets(other)
        rhs = dt + self.radius + other.radius
        return dx2 >= rhs * rhs

    def holds_atom(self, center, scale) -> bool:
        """Closed support box of an atom (half-widths scale/2) lies in the closure."""
        probe = DoubleCone(center, scale / 2)
        dt, dx2 = self._offsets(probe)
        m = self.radius - scale - dt
        return m >= 0 and dx2 <= m * m

    def to_json(self):
        return {"center": [frac_str(v) for v in self.center], "radius": frac_str(self.radius)}


@dataclass(frozen=True)
class Arc:
    """Open arc (start, start + length) on a circle of circumference n."""

    start: int
    length: int
    n: int

    def __post_init__(self):
        if not (0 < self.length < self.n):
            raise ValueError("arc length must be in (0, n)")
        object.__setattr__(self, "start", self.start % self.n)

    def includes(self, other: "Arc") -> bool:
        return (other.start - self.start) % self.n + other.length <= self.length

    def compactly_includes(self, other: "Arc") -> bool:
        off = (other.start - self.start) % self.n
        return off > 0 and off + other.length < self.length

    def perp(self, other: "Arc") -> bool:
        return (other.start - self.start) % self.n > self.length and (
            self.start - other.start
        ) % self.n > other.length

    def holds_atom(self, center, scale) -> bool:
        c = to_fraction(center)
        off = (c - scale / 2 - self.start) % self.n
        return off + scale <= self.length

    @property
    def midpoint(self) -> Fraction:
        return Fraction(self.start) + Fraction(self.length, 2)

    def label(self) -> str:
        return f"[{self.start},{self.start + self.length})"

    def to_json(self):
        return {"start": self.start, "length": self.length, "n": self.n}


def causal_le(p, q) -> bool:
    """p precedes q: q - p lies in the closed forward light cone."""
    dt = q[0] - p[0]
    if dt < 0:
        return False
    return dt * dt >= sum((a - b) ** 2 for a, b in zip(q[1:], p[1:]))


@dataclass(frozen=True)
class EventSet:
    members: frozenset
    points: tuple = field(repr=False, compare=False)

    def includes(self, other: "EventSet") -> bool:
        return other.members <= self.members

    def compactly_includes(self, other: "EventSet") -> bool:
        return other.members < self.members

    def perp(self, other: "EventSet") -> bool:
        for i in self.members:
            for j in other.members:
                if causal_le(self.points[i], self.points[j]) or causal_le(
                    self.points[j], self.points[i]
                ):
                    return False
        return True

    def to_json(self):
        return {"events": sorted(self.members)}


# ------------------------------------------------------------------ poset


class CausalPoset:
    """A finite poset with a causal disjointness relation."""

    def __init__(self, elements, leq, perp, geometry=None, labels=None, kind="explicit"):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise PosetInvalid("duplicate element ids")
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.leq = np.array(leq, dtype=bool).reshape(len(self.elements), len(self.elements))
        self.perp = np.array(perp, dtype=bool).reshape(self.leq.shape)
        self.geometry = dict(geometry) if geometry else {}
        self.labels = dict(labels) if labels else {}
        self.kind = kind
        n = len(self.elements)
        self._up = [self._mask(self.leq[i, :]) for i in range(n)]
        self._down = [self._mask(self.leq[:, i]) for i in range(n)]
        self._perp = [self._mask(self.perp[i, :]) for i in range(n)]

    @staticmethod
    def _mask(row) -> int:
        m = 0
        for j in np.flatnonzero(row):
            m |= 1 << int(j)
        return m

    def __len__(self):
        return len(self.elements)

    def __contains__(self, e):
        return e in self.index

    def __repr__(self):
        return f"CausalPoset({self.kind}, {len(self)} elements)"

    def idx(self, e) -> int:
        try:
            return self.index[e]
        except KeyError:
            raise UnknownElement(e) from None

    def le(self, a, b) -> bool:
        return bool(self.leq[self.idx(a), self.idx(b)])

    def lt(self, a, b) -> bool:
        return a != b and self.le(a, b)

    def is_perp(self, a, b) -> bool:
        return bool(self.perp[self.idx(a), self.idx(b)])

    def up_mask(self, e) -> int:
        return self._up[self.idx(e)]

    def perp_mask(self, e) -> int:
        return self._perp[self.idx(e)]

    def from_mask(self, mask: int) -> list:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.elements[i])
            mask >>= 1
            i += 1
        return out

    def below(self, o, strict=False) -> list:
        i = self.idx(o)
        return [e for j, e in enumerate(self.elements) if self.leq[j, i] and not (strict and j == i)]

    def above(self, o, strict=False) -> list:
        i = self.idx(o)
        return [e for j, e in enumerate(self.elements) if self.leq[i, j] and not (strict and j == i)]

    def maximal(self) -> list:
        return [e for e in self.elements if len(self.above(e)) == 1]

    def minimal(self) -> list:
        return [e for e in self.elements if len(self.below(e)) == 1]

    def dominators(self, supports: Iterable) -> int:
        """Bitmask of elements lying above every element of ``supports``."""
        m = (1 << len(self.elements)) - 1
        for s in supports:
            m &= self.up_mask(s)
        return m

    def perp_witness(self, supports1, supports2):
        """First (o1, o2) with supports1 <= o1, supports2 <= o2, o1 perp o2."""
        d1 = self.dominators(supports1)
        d2 = self.dominators(supports2)
        i = 0
        m = d1
        while m:
            if m & 1 and self._perp[i] & d2:
                j = (self._perp[i] & d2 & -(self._perp[i] & d2)).bit_length() - 1
                return self.elements[i], self.elements[j]
            m >>= 1
            i += 1
        return None

    def region(self, e):
        return self.geometry.get(e)

    def restrict(self, o) -> "CausalPoset":
        return restrict(self, o)

    def to_json(self):
        out = {"kind": "explicit", "elements": list(self.elements)}
        out["leq"] = [
            [a, b] for a in self.elements for b in self.elements if a != b and self.le(a, b)
        ]
        out["perp"] = [
            [a, b]
            for i, a in enumerate(self.elements)
            for j, b in enumerate(self.elements)
            if i < j and self.perp[i, j]
        ]
        return out


# ------------------------------------------------------------- validation


@dataclass
class ValidationReport:
    ok: bool
    violations: list
    connected: bool
    n_elements: int
    properties: dict

    def to_json(self):
        return {
            "ok": self.ok,
            "violations": self.violations,
            "pathwiseConnected": self.connected,
            "elements": self.n_elements,
            "properties": self.properties,
        }


def is_pathwise_connected(P: CausalPoset) -> bool:
    if len(P) == 0:
        return True
    # two elements are joined through a majorant iff they are joined in the comparability graph
    ncomp, _ = connected_components(csr_matrix(P.leq | P.leq.T), directed=False)
    return ncomp == 1


def validate_poset(P: CausalPoset, max_violations: int = 50) -> ValidationReport:
    L, D = P.leq, P.perp
    n = len(P)
    viol = []

    def note(kind, *els):
        if len(viol) < max_violations:
            viol.append({"kind": kind, "elements": list(els)})

    for i in np.flatnonzero(~np.diag(L)):
        note("reflexivity", P.elements[i])
    for i, j in zip(*np.nonzero(L & L.T)):
        if i < j:
            note("antisymmetry", P.elements[i], P.elements[j])
    Li = L.astype(np.int64)
    trans = (Li @ Li > 0) & ~L
    for i, j in zip(*np.nonzero(trans)):
        note("transitivity", P.elements[i], P.elements[j])
    for i in np.flatnonzero(np.diag(D)):
        note("perp-irreflexive", P.elements[i])
    for i, j in zip(*np.nonzero(D & ~D.T)):
        note("perp-symmetric", P.elements[i], P.elements[j])
    # stability: a <= o and o perp b  =>  a perp b
    unstable = (Li @ D.astype(np.int64) > 0) & ~D
    for i, j in zip(*np.nonzero(unstable)):
        note("perp-stability", P.elements[i], P.elements[j])
    connected = is_pathwise_connected(P)
    props = geometric_properties(P) if P.geometry and len(P.geometry) == n else {}
    return ValidationReport(not viol and connected, viol, connected, n, props)


def geometric_properties(P: CausalPoset) -> dict:
    """Which of the four net-of-regions properties the finite sample satisfies."""
    els = P.elements
    R = [P.geometry[e] for e in els]
    n = len(els)
    cc = np.array([[R[j].compactly_includes(R[i]) for j in range(n)] for i in range(n)])
    D = P.perp
    # cc[i, j]: e_i compactly inside e_j
    p1 = all(cc[:, i].any() and cc[i, :].any() for i in range(n))
    p2 = True
    for a, o in zip(*np.nonzero(cc)):
        if not (cc[a, :] & cc[:, o]).any():
            p2 = False
            break
    p3 = bool(D.any(axis=1).all())
    p4 = True
    for a, o in zip(*np.nonzero(D)):
        if not (cc[a, :] & D[:, o]).any():
            p4 = False
            break
    return {"1": bool(p1), "2": bool(p2), "3": p3, "4": bool(p4)}


def check_valid(P: CausalPoset) -> CausalPoset:
    rep = validate_poset(P)
    if not rep.ok:
        raise PosetInvalid("poset fails validation", rep)
    return P


# --------------------------------------------------------------- builders


def from_relations(elements, leq_pairs=(), perp_pairs=(), close_perp=False, labels=None):
    """Explicit poset from generating order pairs (a, b) meaning a <= b."""
    elements = list(elements)
    idx = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    L = np.eye(n, dtype=bool)
    for a, b in leq_pairs:
        if a not in idx:
            raise UnknownElement(a)
        if b not in idx:
            raise UnknownElement(b)
        L[idx[a], idx[b]] = True
    for k in range(n):  # transitive closure
        L |= np.outer(L[:, k], L[k, :])
    D = np.zeros((n, n), dtype=bool)
    for a, b in perp_pairs:
        if a not in idx:
            raise UnknownElement(a)
        if b not in idx:
            raise UnknownElement(b)
        D[idx[a], idx[b]] = D[idx[b], idx[a]] = True
    if close_perp:
        Li = L.astype(np.int64)
        D = (Li @ D.astype(np.int64) @ Li.T) > 0
    return CausalPoset(elements, L, D, labels=labels)


def _from_regions(ids, regions, kind):
    n = len(ids)
    L = np.array([[regions[j].includes(regions[i]) for j in range(n)] for i in range(n)])
    D = np.array([[i != j and regions[i].perp(regions[j]) for j in range(n)] for i in range(n)])
    return CausalPoset(ids, L, D, geometry=dict(zip(ids, regions)), kind=kind)


def build_minkowski_lattice(cones: Sequence, ids: Sequence[str] | None = None) -> CausalPoset:
    """Poset of double cones ordered by inclusion, disjoint when spacelike separated."""
    regs = []
    if not cones:
        raise EmptyPoset("no double cones given")
    for c in cones:
        if isinstance(c, DoubleCone):
            regs.append(c)
        elif isinstance(c, Mapping):
            regs.append(DoubleCone(tuple(c["center"]), c["radius"]))
        else:
            center, radius = c
            regs.append(DoubleCone(tuple(center), radius))
    if len(set(regs)) != len(regs):
        raise PosetInvalid("two cones coincide")
    ids = list(ids) if ids is not None else [f"c{i}" for i in range(len(regs))]
    if len(ids) != len(regs):
        raise ValueError("ids and cones differ in length")
    return _from_regions(ids, regs, "minkowski")


def build_circle(n: int, lengths: Iterable[int]) -> CausalPoset:
    """All arcs [s, s+L) of the allowed lengths on a circle with n vertices."""
    if n < 3:
        raise ValueError("circle needs at least 3 vertices")
    lengths = sorted(set(int(L) for L in lengths))
    regs = [Arc(s, L, n) for L in lengths for s in range(n)]
    return _from_regions([a.label() for a in regs], regs, "circle")


def sprinkle(count: int, seed: int, box=(1, 1, 1, 1), denominator: int = 1000):
    """Uniform random events in [0, box] rounded to an exact rational grid."""
    rng = np.random.default_rng(seed)
    raw = rng.random((count, 4)) * np.asarray(box, dtype=float)
    return [tuple(Fraction(round(v * denominator), denominator) for v in row) for row in raw]


def build_causal_set_poset(points, max_subset_size: int = 2, cap: int = 5000) -> CausalPoset:
    """Nonempty event subsets of bounded size, ordered by inclusion."""
    pts = tuple(tuple(to_fraction(v) for v in p) for p in points)
    k = min(max_subset_size, len(pts))
    total = sum(math.comb(len(pts), r) for r in range(1, k + 1))
    if total > cap:
        raise PosetTooLarge(f"{total} subsets exceed the cap {cap}")
    regs, ids = [], []
    for r in range(1, k + 1):
        for sub in itertools.combinations(range(len(pts)), r):
            regs.append(EventSet(frozenset(sub), pts))
            ids.append("{" + ",".join(f"p{i}" for i in sub) + "}")
    return _from_regions(ids, regs, "causal-set")


def restrict(P: CausalPoset, o) -> CausalPoset:
    """The sub-poset of elements below o."""
    keep = [P.idx(e) for e in P.below(o)]
    els = [P.elements[i] for i in keep]
    geo = {e: P.geometry[e] for e in els if e in P.geometry}
    return CausalPoset(
        els, P.leq[np.ix_(keep, keep)], P.perp[np.ix_(keep, keep)], geo, P.labels, P.kind
    )


# --------------------------------------------------------------- symmetry


def _rational_matrix(A):
    return tuple(tuple(to_fraction(v) for v in row) for row in A)


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + b on (t, x, y, z); A must preserve time and spatial length."""

    A: tuple
    b: tuple = (0, 0, 0, 0)

    def __post_init__(self):
        A = _rational_matrix(self.A)
        b = tuple(to_fraction(v) for v in self.b)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        M = np.array([[float(v) for v in row] for row in A])
        if M.shape != (4, 4) or abs(abs(M[0, 0]) - 1) > 0 or np.any(M[0, 1:]) or np.any(M[1:, 0]):
            raise ValueError("linear part must not mix time and space")
        S = [[A[i][j] for j in range(1, 4)] for i in range(1, 4)]
        StS = [[sum(S[k][i] * S[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
        if StS != [[int(i == j) for j in range(3)] for i in range(3)]:
            raise ValueError("spatial part must be orthogonal")

    @classmethod
    def translation(cls, b):
        return cls(tuple(tuple(int(i == j) for j in range(4)) for i in range(4)), tuple(b))

    def apply(self, p):
        return tuple(sum(self.A[i][j] * p[j] for j in range(4)) + self.b[i] for i in range(4))

    def linear(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.A])

    def inverse(self) -> "AffineMap":
        At = tuple(tuple(self.A[j][i] for j in range(4)) for i in range(4))
        b = tuple(-sum(At[i][j] * self.b[j] for j in range(4)) for i in range(4))
        return AffineMap(At, b)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other."""
        A = tuple(
            tuple(sum(self.A[i][k] * other.A[k][j] for k in range(4)) for j in range(4))
            for i in range(4)
        )
        return AffineMap(A, self.apply(other.b))

    def map_region(self, reg):
        return DoubleCone(self.apply(reg.center), reg.radius)

    def to_json(self):
        return {"A": [[frac_str(v) for v in r] for r in self.A], "b": [frac_str(v) for v in self.b]}


@dataclass(frozen=True)
class CircleRotation:
    k: int
    n: int

    def apply(self, theta):
        return (to_fraction(theta) + self.k) % self.n

    def inverse(self):
        return CircleRotation(-self.k % self.n, self.n)

    def compose(self, other):
        return CircleRotation((self.k + other.k) % self.n, self.n)

    def map_region(self, reg):
        return Arc(reg.start + self.k, reg.length, reg.n)

    def to_json(self):
        return {"rotate": self.k, "n": self.n}


@dataclass(frozen=True)
class PosetMorphism:
    """Injective order- and disjointness-preserving map between posets."""

    source: CausalPoset
    target: CausalPoset
    mapping: Mapping

    def __post_init__(self):
        m = dict(self.mapping)
        for e in self.source.elements:
            if e not in m:
                raise UnknownElement(e)
            self.target.idx(m[e])
        if len(set(m.values())) != len(m):
            raise ValueError("morphism must be injective")
        for a in self.source.elements:
            for b in self.source.elements:
                if self.source.le(a, b) and not self.target.le(m[a], m[b]):
                    raise ValueError(f"order not preserved at {a} <= {b}")
                if self.source.is_perp(a, b) and not self.target.is_perp(m[a], m[b]):
                    raise ValueError(f"disjointness not preserved at {a}, {b}")
        object.__setattr__(self, "mapping", m)

    def __call__(self, e):
        return self.mapping[e]


def inclusion(sub: CausalPoset, P: CausalPoset) -> PosetMorphism:
    return PosetMorphism(sub, P, {e: e for e in sub.elements})


class SymmetryAction:
    """A finite group acting on a causal poset by automorphisms.

    Group elements are named by shortest words in the generators ("e" is the
    identity, "r.r" is r applied twice).  ``maps`` optionally gives each group
    element a geometric realization acting on points.
    """

    def __init__(self, poset: CausalPoset, perms: dict, maps: dict | None = None):
        self.poset = poset
        self.perms = {g: dict(p) for g, p in perms.items()}
        self.maps = dict(maps) if maps else {}
        self.names = list(self.perms)
        key = {self._key(g): g for g in self.names}
        self._by_key = key
        for g in self.names:
            self._check_automorphism(g)

    def _key(self, g):
        return tuple(self.perms[g][e] for e in self.poset.elements)

    def _check_automorphism(self, g):
        P, p = self.poset, self.perms[g]
        if sorted(p.values()) != sorted(P.elements):
            raise ValueError(f"{g} is not a permutation of the elements")
        ix = [P.idx(p[e]) for e in P.elements]
        if not (P.leq[np.ix_(ix, ix)] == P.leq).all():
            raise ValueError(f"{g} does not preserve the order")
        if not (P.perp[np.ix_(ix, ix)] == P.perp).all():
            raise ValueError(f"{g} does not preserve disjointness")

    @classmethod
    def generate(cls, poset: CausalPoset, generators: dict, maps: dict | None = None):
        """Close a set of generating permutations under composition."""
        maps = maps or {}
        ident = {e: e for e in poset.elements}
        perms = {"e": ident}
        gmaps = {}
        some_map = next(iter(maps.values()), None)
        if some_map is not None:
            gmaps["e"] = (
                AffineMap.translation((0, 0, 0, 0))
                if isinstance(some_map, AffineMap)
                else CircleRotation(0, some_map.n)
            )
        seen = {tuple(ident[e] for e in poset.elements): "e"}
        frontier = ["e"]
        while frontier:
            nxt = []
            for h in frontier:
                for gname, gp in generators.items():
                    comp = {e: gp[perms[h][e]] for e in poset.elements}
                    k = tuple(comp[e] for e in poset.elements)
                    if k in seen:
                        continue
                    name = gname if h == "e" else f"{gname}.{h}"
                    seen[k] = name
                    perms[name] = comp
                    if gmaps and gname in maps:
                        gmaps[name] = maps[gname].compose(gmaps[h])
                    nxt.append(name)
            frontier = nxt
        return cls(poset, perms, gmaps if gmaps else None)

    @classmethod
    def from_geometry(cls, poset: CausalPoset, maps: dict):
        """Derive generator permutations from geometric maps acting on regions."""
        lookup = {reg: e for e, reg in poset.geometry.items()}
        gens = {}
        for name, m in maps.items():
            perm = {}
            for e in poset.elements:
                img = m.map_region(poset.geometry[e])
                if img not in lookup:
                    raise ValueError(f"map {name} sends {e} outside the poset")
                perm[e] = lookup[img]
            gens[name] = perm
        return cls.generate(poset, gens, maps)

    @classmethod
    def trivial(cls, poset: CausalPoset):
        return cls(poset, {"e": {e: e for e in poset.elements}})

    @property
    def order(self) -> int:
        return len(self.names)

    def act(self, g, o):
        return self.perms[g][o]

    def compose(self, g, h):
        """Name of g after h."""
        k = tuple(self.perms[g][self.perms[h][e]] for e in self.poset.elements)
        return self._by_key[k]

    def inverse(self, g):
        inv = {v: k for k, v in self.perms[g].items()}
        return self._by_key[tuple(inv[e] for e in self.poset.elements)]

    def geometric(self, g):
        return self.maps.get(g)

    def orbit(self, o) -> list:
        out = []
        for g in self.names:
            x = self.act(g, o)
            if x not in out:
                out.append(x)
        return out

    def stabilizer(self, o) -> list:
        return [g for g in self.names if self.act(g, o) == o]


def orbit_and_stabilizer(action: SymmetryAction, o):
    return action.orbit(o), action.stabilizer(o)
