"""Representation backends, path frames, connection systems and gauge fields.

Backends assign a unitary value to each letter and multiply them along words.
Two are provided: dense matrices (``MatrixBackend``) and the free-field Weyl
model (``WeylBackend``), which stores Weyl elements as a phase plus an
amplitude vector over a fixed list of atoms.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, eigh
from scipy.stats import unitary_group

from .causet import CausalPoset, SymmetryAction
from .cochain import Atom, TestFunction
from .errors import NoInvariantFrame, NotConnected
from .loopgrp import (
    Letter,
    Word,
    endpoints,
    format_word,
    inverse,
    is_path,
    letters_of,
    make_letter,
    multiply,
    signed_letters,
)
from .simplex import Simplex1, is_nerve, is_tangent
from .weyl import FieldConnection, HyperboloidProfile, WeylElement, phase_distance


def map_letter(action: SymmetryAction, g, x: Letter) -> Letter:
    b = x.oriented
    perm = action.perms[g]
    img = Simplex1(perm[b.support], perm[b.d0], perm[b.d1])
    if b.is_self_opposite():
        return Letter(img, x.sign)
    return make_letter(img)


def perp_pairs(P: CausalPoset):
    return [
        (P.elements[i], P.elements[j])
        for i in range(len(P))
        for j in range(i + 1, len(P))
        if P.perp[i, j]
    ]


# ---------------------------------------------------------------- backends


class Backend:
    name = "backend"

    def holonomy(self, w):
        out = self.identity()
        for x in w:
            out = self.mul(out, self.letter_value(x))
        return out

    def commutator(self, a, b):
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    def separates(self, a, b):
        A, B = self.holonomy(a), self.holonomy(b)
        dist = self.distance(A, B)
        if dist > self.separation_tol:
            return {"separator": self.name, "distance": dist}
        return None


class MatrixBackend(Backend):
    """Dense unitary matrices on canonical letters; inverse letters use U*."""

    name = "matrix"

    def __init__(self, P: CausalPoset, values: dict, gamma: dict | None = None,
                 action: SymmetryAction | None = None, tol=1e-8):
        self.P = P
        self.values = dict(values)
        self.gamma = gamma
        self.action = action
        self.tol = tol
        self.separation_tol = 1e-6
        self.dim = next(iter(self.values.values())).shape[0] if self.values else 1

    def identity(self):
        return np.eye(self.dim, dtype=complex)

    def mul(self, a, b):
        return a @ b

    def inv(self, a):
        return a.conj().T

    def distance(self, a, b) -> float:
        # the Frobenius norm bounds the operator norm; skip the SVD when tiny
        fro = float(np.linalg.norm(a - b))
        return fro if fro < 1e-10 else float(np.linalg.norm(a - b, 2))

    def close(self, a, b, tol=None) -> bool:
        return self.distance(a, b) <= (self.tol if tol is None else tol)

    def letter_value(self, x: Letter):
        U = self.values.get(x.simplex)
        if U is None:
            return self.identity()
        return U if x.sign > 0 else U.conj().T

    def unitarity_defect(self) -> float:
        I = self.identity()
        return max((float(np.linalg.norm(U.conj().T @ U - I, 2)) for U in self.values.values()),
                   default=0.0)

    def certify_causal(self, P=None) -> bool:
        """Letters under disjoint elements commute (so every causal commutator dies)."""
        P = P or self.P
        return self.causal_defect(P) <= self.tol

    def causal_defect(self, P=None) -> float:
        P = P or self.P
        by_support = {}
        for b, U in self.values.items():
            by_support.setdefault(b.support, []).append(U)
        worst = 0.0
        done = set()
        for o1, o2 in perp_pairs(P):
            s1 = [s for s in P.below(o1) if s in by_support]
            s2 = [s for s in P.below(o2) if s in by_support]
            for a in s1:
                for b in s2:
                    if (a, b) in done:
                        continue
                    done.add((a, b))
                    for U in by_support[a]:
                        for V in by_support[b]:
                            worst = max(worst, float(np.linalg.norm(U @ V - V @ U, 2)))
        return worst

    def covariance_defect(self) -> float:
        if self.action is None or self.gamma is None:
            return 0.0
        worst = 0.0
        for g in self.action.names:
            G = self.gamma[g]
            for b, U in self.values.items():
                img = map_letter(self.action, g, Letter(b, 1))
                V = self.letter_value(img)
                worst = max(worst, float(np.linalg.norm(G @ U @ G.conj().T - V, 2)))
        return worst

    @classmethod
    def covariant(cls, P: CausalPoset, action: SymmetryAction | None = None,
                  components=(), dim=2, seed=0xC0FFEE):
        """Random tensor-factor unitaries, covariant under the action.

        Letters below component i act on tensor factor i only, so letters
        under different components commute.  The symmetry permutes the
        factors; orbit representatives are averaged over their stabilizers.
        """
        action = action or SymmetryAction.trivial(P)
        comps = list(components)
        ncomp = len(comps)
        D = dim ** max(ncomp, 1)
        rng = np.random.default_rng(seed)

        def comp_of(e):
            hit = [i for i, c in enumerate(comps) if P.le(e, c)]
            return hit[0] if hit else None

        gamma = {}
        for g in action.names:
            perm = []
            for c in comps:
                img = action.act(g, c)
                if img not in comps:
                    raise ValueError(f"component {c} is not mapped to a component by {g}")
                perm.append(comps.index(img))
            gamma[g] = _factor_permutation(perm, dim) if ncomp else np.eye(D)

        def local_hermitian(i):
            A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            H = (A + A.conj().T) / 2
            if i is None:
                A = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
                return (A + A.conj().T) / 2
            return _embed(H, i, ncomp, dim)

        values = {}
        for x in letters_of(P):
            if x.simplex in values:
                continue
            b = x.simplex
            H0 = local_hermitian(comp_of(b.support))
            plus = [g for g in action.names if map_letter(action, g, x) == x]
            minus = [g for g in action.names if map_letter(action, g, x) == x.inverse()]
            H = sum(gamma[g] @ H0 @ gamma[g].conj().T for g in plus)
            if b.is_self_opposite():
                w, V = eigh(H)
                Pos = V[:, w > 0] @ V[:, w > 0].conj().T
                U = np.eye(D) - 2 * Pos
            else:
                H = H - sum((gamma[g] @ H0 @ gamma[g].conj().T for g in minus), 0 * H)
                U = expm(1j * H)
            for g in action.names:
                img = map_letter(action, g, x)
                V = gamma[g] @ U @ gamma[g].conj().T
                values[img.simplex] = V if img.sign > 0 else V.conj().T
        return cls(P, values, gamma, action)

    @classmethod
    def random(cls, P: CausalPoset, dim=2, seed=0xC0FFEE):
        """Independent Haar unitaries per letter (not causal in general)."""
        vals = {}
        for i, x in enumerate(letters_of(P)):
            vals[x.simplex] = unitary_group.rvs(dim, random_state=seed + i)
        return cls(P, vals)


def _embed(H, i, n, dim):
    out = np.eye(1)
    for k in range(n):
        out = np.kron(out, H if k == i else np.eye(dim))
    return out


def _factor_permutation(perm, dim):
    """Unitary sending tensor factor k to factor perm[k]."""
    n = len(perm)
    D = dim**n
    M = np.zeros((D, D))
    for idx in itertools.product(range(dim), repeat=n):
        out = [0] * n
        for k in range(n):
            out[perm[k]] = idx[k]
        src = int(np.ravel_multi_index(idx, (dim,) * n))
        dst = int(np.ravel_multi_index(out, (dim,) * n))
        M[dst, src] = 1
    return M.astype(complex)


@dataclass(frozen=True)
class WeylValue:
    """Weyl element as phase plus amplitudes over the backend's atom list."""

    phase: float
    vec: np.ndarray

    def __eq__(self, other):
        return self.phase == other.phase and np.array_equal(self.vec, other.vec)

    __hash__ = None


class WeylBackend(Backend):
    """Field connection values multiplied with the exact CCR phase rule."""

    name = "weyl"

    def __init__(self, fc: FieldConnection, phase_tol=1e-6, zero_tol=1e-9):
        self.fc = fc
        self.P = fc.P
        self.prof = fc.prof
        keys = {a.key() for v in fc.f.values.values() for a in v.atoms}
        self.atoms = sorted(keys)
        self.index = {k: i for i, k in enumerate(self.atoms)}
        self.gram = self._gram()
        self.Sigma = 2.0 * self.gram.imag
        self.separation_tol = phase_tol
        self.zero_tol = zero_tol
        self._letters = {}

    def _gram(self):
        n = len(self.atoms)
        G = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                (c1, R1), (c2, R2) = self.atoms[i], self.atoms[j]
                delta = tuple(y - x for x, y in zip(c1, c2))
                G[i, j] = self.prof.kernel(delta, R1, R2)
        return G

    def vector(self, f: TestFunction) -> np.ndarray:
        v = np.zeros(len(self.atoms))
        for a in f.atoms:
            v[self.index[a.key()]] += a.amplitude
        return v

    def function(self, v) -> TestFunction:
        return TestFunction(Atom(float(a), c, R) for a, (c, R) in zip(v, self.atoms) if a != 0.0)

    def element(self, val: WeylValue) -> WeylElement:
        return WeylElement(val.phase, self.function(val.vec))

    def identity(self):
        return WeylValue(0.0, np.zeros(len(self.atoms)))

    def mul(self, a, b):
        return WeylValue(a.phase + b.phase - 0.5 * float(a.vec @ self.Sigma @ b.vec), a.vec + b.vec)

    def inv(self, a):
        return WeylValue(-a.phase, -a.vec)

    def sigma(self, u, v) -> float:
        return float(u @ self.Sigma @ v)

    def commutator(self, a, b):
        # A B A⁻¹ B⁻¹ = exp(-iσ(a, b)): the function parts cancel exactly
        return WeylValue(-self.sigma(a.vec, b.vec), np.zeros(len(self.atoms)))

    def norm(self, v) -> float:
        """‖E f‖ for the function with amplitude vector v."""
        return float(np.sqrt(max((v @ self.gram @ v).real, 0.0)))

    def distance(self, a, b) -> float:
        """‖E(Δf)‖ if the functions differ, else the wrapped phase difference."""
        dv = a.vec - b.vec
        scale = max(np.max(np.abs(a.vec), initial=0.0), np.max(np.abs(b.vec), initial=0.0), 1e-300)
        if np.max(np.abs(dv), initial=0.0) > 1e-12 * scale:
            return max(self.norm(dv), 1e-12 * scale)
        return phase_distance(a.phase, b.phase)

    def close(self, a, b, tol=1e-9) -> bool:
        return self.distance(a, b) <= tol

    def simplex_value(self, b: Simplex1) -> WeylValue:
        got = self._letters.get(b)
        if got is None:
            el = self.fc.value(b)
            got = WeylValue(el.phase, self.vector(el.func))
            self._letters[b] = got
        return got

    def letter_value(self, x: Letter):
        b = x.oriented
        v = self.simplex_value(b)
        if b.is_self_opposite() and x.sign < 0:
            return self.inv(v)
        return v

    def causal_defect(self, P=None) -> float:
        """Largest |σ| between letter values under disjoint elements."""
        P = P or self.P
        under = {}
        for x in letters_of(P):
            under.setdefault(x.support, []).append(self.simplex_value(x.oriented).vec)
        worst = 0.0
        for o1, o2 in perp_pairs(P):
            V1 = [v for s in P.below(o1) for v in under.get(s, ())]
            V2 = [v for s in P.below(o2) for v in under.get(s, ())]
            if V1 and V2:
                M = np.array(V1) @ self.Sigma @ np.array(V2).T
                worst = max(worst, float(np.max(np.abs(M))))
        return worst

    def certify_causal(self, P=None) -> bool:
        return self.causal_defect(P) <= self.zero_tol


# --------------------------------------------------------------- path frames


@dataclass
class PathFrame:
    pole: str
    paths: dict

    def path(self, a) -> Word:
        return self.paths[a]

    def to_json(self):
        return {"pole": self.pole, "paths": {a: format_word(w) for a, w in self.paths.items()}}


def frame_domain(P: CausalPoset) -> list:
    """Elements that can be faces of tangent simplices (those with a strict upper bound)."""
    return [e for e in P.elements if len(P.above(e)) > 1]


def _out_edges(P, allowed=None, order=1):
    edges = {}
    for x in signed_letters(P):
        if allowed is not None and not allowed(x):
            continue
        edges.setdefault(x.start, []).append(x)
    for v in edges:
        edges[v].sort(key=lambda x: (P.idx(x.support), P.idx(x.end), x.sign), reverse=order < 0)
    return edges


def _bfs_paths(P, pole, edges, targets=None):
    paths = {pole: Word()}
    queue = deque([pole])
    while queue:
        v = queue.popleft()
        for x in edges.get(v, ()):
            if x.end in paths:
                continue
            paths[x.end] = multiply(Word([x]), paths[v])
            queue.append(x.end)
            if targets is not None and all(t in paths for t in targets):
                return paths
    return paths


def build_path_frame(P: CausalPoset, pole, order=1) -> PathFrame:
    """Shortest tangent-letter paths from the pole to every frame element."""
    dom = frame_domain(P)
    if pole not in dom:
        raise NotConnected(f"{pole} is maximal and meets no tangent simplex")
    paths = _bfs_paths(P, pole, _out_edges(P, order=order))
    missing = [a for a in dom if a not in paths]
    if missing:
        raise NotConnected(f"no tangent path from {pole} to {missing[0]}")
    return PathFrame(pole, {a: paths[a] for a in dom})


def check_frame(P: CausalPoset, frame: PathFrame) -> bool:
    for a, w in frame.paths.items():
        if a == frame.pole:
            if w:
                return False
            continue
        if not is_path(w) or endpoints(w) != (frame.pole, a):
            return False
        if not all(is_tangent(P, x.oriented) for x in w):
            return False
    return True


def check_obstruction(P: CausalPoset, action: SymmetryAction, o, a, bound=None):
    """A path o -> a whose letters are all fixed by the joint stabilizer, or None."""
    joint = [g for g in action.stabilizer(o) if action.act(g, a) == a]
    fixed = lambda x: all(map_letter(action, g, x) == x for g in joint)
    paths = _bfs_paths(P, o, _out_edges(P, fixed), targets=[a])
    w = paths.get(a)
    if w is not None and bound is not None and len(w) > bound:
        return None
    return w


@dataclass
class PathFrameSystem:
    frames: dict
    action: SymmetryAction | None = None

    def __getitem__(self, o) -> PathFrame:
        return self.frames[o]


def map_word(action, g, w) -> Word:
    return Word(map_letter(action, g, x) for x in w)


def build_covariant_system(P: CausalPoset, action: SymmetryAction | None = None) -> PathFrameSystem:
    """Frames over every pole with s(P_a) = P_{s(a)}.

    For each pole orbit a representative a is chosen; for each orbit of
    S_a on targets a representative y gets a path with letters fixed by
    S_a ∩ S_y, which is then transported around.
    """
    action = action or SymmetryAction.trivial(P)
    dom = frame_domain(P)
    frames = {}
    for a in dom:
        if a in frames:
            continue
        Sa = action.stabilizer(a)
        paths = {}
        for y in dom:
            if y in paths:
                continue
            if y == a:
                paths[a] = Word()
                continue
            w = check_obstruction(P, action, a, y)
            if w is None:
                joint = [g for g in Sa if action.act(g, y) == y]
                raise NoInvariantFrame(
                    f"no path {a} -> {y} with letters fixed by the joint stabilizer",
                    {"pole": a, "target": y, "stabilizer": joint},
                )
            for s in Sa:
                paths.setdefault(action.act(s, y), map_word(action, s, w))
        for g in action.names:
            b = action.act(g, a)
            if b not in frames:
                frames[b] = PathFrame(b, {action.act(g, y): map_word(action, g, w)
                                          for y, w in paths.items()})
    return PathFrameSystem(frames, action)


def system_covariance_defects(system: PathFrameSystem) -> list:
    act = system.action
    bad = []
    if act is None:
        return bad
    for g in act.names:
        for a, fr in system.frames.items():
            img = system.frames[act.act(g, a)]
            for y, w in fr.paths.items():
                if map_word(act, g, w) != img.paths[act.act(g, y)]:
                    bad.append({"group": g, "pole": a, "target": y})
    return bad


# --------------------------------------------------------------- connections


@dataclass
class Connection1Cochain:
    """Values on oriented tangent simplices; nerve simplices are the identity."""

    backend: Backend
    values: dict

    def value(self, b: Simplex1):
        v = self.values.get(b)
        return self.backend.identity() if v is None else v

    def letter_value(self, x: Letter):
        v = self.value(x.oriented)
        if x.oriented.is_self_opposite() and x.sign < 0:
            return self.backend.inv(v)
        return v

    def holonomy(self, w):
        be = self.backend
        out = be.identity()
        for x in w:
            out = be.mul(out, self.letter_value(x))
        return out

    def inverse_defect(self) -> float:
        be = self.backend
        worst = 0.0
        for b, v in self.values.items():
            worst = max(worst, be.distance(be.mul(self.value(b.opposite()), v), be.identity()))
        return worst


def oriented_tangent(P: CausalPoset):
    return [x.oriented for x in signed_letters(P) if not (x.simplex.is_self_opposite() and x.sign < 0)]


def connection_from_backend(backend: Backend, P: CausalPoset) -> Connection1Cochain:
    return Connection1Cochain(backend, {b: backend.letter_value(make_letter(b)) if not b.is_self_opposite()
                                        else backend.letter_value(Letter(b, 1))
                                        for b in oriented_tangent(P)})


def connection_from_rep(backend: Backend, frame: PathFrame, P: CausalPoset) -> Connection1Cochain:
    """u(b) = w(p̄_{∂₀b} b p_{∂₁b}) with w the backend holonomy."""
    vals = {}
    for b in oriented_tangent(P):
        x = Letter(b, 1) if b.is_self_opposite() else make_letter(b)
        loop = multiply(inverse(frame.paths[b.d0]), Word([x]), frame.paths[b.d1])
        vals[b] = backend.holonomy(loop)
    return Connection1Cochain(backend, vals)


@dataclass
class ConnectionSystem:
    backend: Backend
    per_base: dict
    action: SymmetryAction | None = None

    def __getitem__(self, o) -> Connection1Cochain:
        return self.per_base[o]


def build_connection_system(backend: Backend, system: PathFrameSystem, P: CausalPoset):
    return ConnectionSystem(
        backend, {o: connection_from_rep(backend, fr, P) for o, fr in system.frames.items()},
        system.action,
    )


def constant_system(conn: Connection1Cochain, P: CausalPoset, action=None) -> ConnectionSystem:
    return ConnectionSystem(conn.backend, {o: conn for o in frame_domain(P)}, action)


def transport_value(backend, action, g, v, gamma=None):
    """Ad_Γ for the backend: Weyl values move their atoms, matrices conjugate."""
    if isinstance(backend, WeylBackend):
        m = action.geometric(g)
        f = backend.function(v.vec).transport(m)
        return WeylValue(v.phase, backend.vector(f))
    if gamma is None:
        if all(action.act(g, e) == e for e in action.poset.elements):
            return v
        raise ValueError(f"backend has no unitary for group element {g}")
    G = gamma[g]
    return G @ v @ G.conj().T


def check_system(sys: ConnectionSystem, P: CausalPoset, fibre_cap=2, tol=1e-6, gamma=None) -> dict:
    """Loop causality across bases and covariance of the per-base connections."""
    from .net import FibreCache

    be = sys.backend
    fib = FibreCache(P, fibre_cap)
    causal_worst, causal_bad, checked = 0.0, [], 0
    cache = {}

    def hol(w):
        base = w[-1].start
        key = (base, w)
        if key not in cache:
            cache[key] = sys.per_base[base].holonomy(w)
        return cache[key]

    for o1, o2 in perp_pairs(P):
        for p in fib[o1].generators:
            for q in fib[o2].generators:
                c = be.commutator(hol(p), hol(q))
                dev = be.distance(c, be.identity())
                checked += 1
                if dev > causal_worst:
                    causal_worst = dev
                if dev > tol and len(causal_bad) < 10:
                    causal_bad.append({"p": format_word(p), "q": format_word(q), "deviation": dev})
    cov_worst, cov_bad = 0.0, []
    act = sys.action
    if act is not None:
        gamma = gamma if gamma is not None else getattr(be, "gamma", None)
        for g in act.names:
            for o, conn in sys.per_base.items():
                target = sys.per_base[act.act(g, o)]
                for b, v in conn.values.items():
                    img = map_letter(act, g, Letter(b, 1) if b.is_self_opposite() else make_letter(b))
                    w = target.letter_value(img)
                    dev = be.distance(transport_value(be, act, g, v, gamma), w)
                    cov_worst = max(cov_worst, dev)
                    if dev > tol and len(cov_bad) < 10:
                        cov_bad.append({"group": g, "base": o, "simplex": str(b), "deviation": dev})
    return {
        "causalChecks": checked,
        "causalWorst": causal_worst,
        "causalViolations": causal_bad,
        "covarianceWorst": cov_worst,
        "covarianceViolations": cov_bad,
        "ok": not causal_bad and not cov_bad,
    }


# -------------------------------------------------------------------- gauge


@dataclass
class GaugeTransformation:
    """g_a(o) for every base a and element o."""

    backend: Backend
    fields: dict

    def at(self, a, o):
        return self.fields.get(a, {}).get(o, self.backend.identity())

    def compose(self, other: "GaugeTransformation") -> "GaugeTransformation":
        be = self.backend
        out = {}
        for a in set(self.fields) | set(other.fields):
            els = set(self.fields.get(a, {})) | set(other.fields.get(a, {}))
            out[a] = {o: be.mul(self.at(a, o), other.at(a, o)) for o in els}
        return GaugeTransformation(be, out)


def apply_gauge(sys: ConnectionSystem, g: GaugeTransformation) -> ConnectionSystem:
    be = sys.backend
    per = {}
    for a, conn in sys.per_base.items():
        vals = {
            b: be.mul(be.mul(g.at(a, b.d0), v), be.inv(g.at(a, b.d1)))
            for b, v in conn.values.items()
        }
        per[a] = Connection1Cochain(be, vals)
    return ConnectionSystem(be, per, sys.action)


def frame_change_gauge(backend: Backend, P_frame: PathFrame, Q_frame: PathFrame) -> dict:
    """g(a) = w(q̄_a p_a), which carries u_P to u_Q."""
    return {a: backend.holonomy(multiply(inverse(Q_frame.paths[a]), P_frame.paths[a]))
            for a in P_frame.paths}


def gauge_group_generators(gauges, o, P: CausalPoset) -> list:
    """The values g_a(a) for a <= o over a collection of gauge transformations."""
    out = []
    for g in gauges:
        for a in P.below(o):
            if a in g.fields:
                out.append((a, g.at(a, a)))
    return out


def system_loop_values(sys: ConnectionSystem, base, loops):
    return [sys.per_base[base].holonomy(p) for p in loops]
