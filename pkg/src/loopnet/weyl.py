"""Free scalar field numerics: hyperboloid transform, symplectic form, Weyl elements.

Conventions: dΩ = d³p / ω(p) with ω = sqrt(|p|² + m²); the Minkowski pairing is
p·y = ω y⁰ - p⃗·y⃗; σ(f, g) = 2 Im ⟨E f, E g⟩ and the Weyl commutator of
exp(iΦ(f)) and exp(iΦ(g)) is the phase exp(-iσ(f, g)).

For atoms of scale R the Fourier transform factorizes into a time profile
fTime(R, p0) and a radial space profile fSpace(R, |p|).  The inner product of
two atoms then reduces to one radial integral with a sinc kernel for the
spatial offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

from .causet import DoubleCone
from .cochain import Cochain, TestFunction, ZERO, bump
from .errors import QuadratureNotConverged

PANEL_ORDER = 16


@dataclass(frozen=True)
class QuadratureConfig:
    cutoff_factor: float = 40.0  # radial cutoff is cutoff_factor / smallest scale
    radial_nodes: int = 4096
    profile_nodes: int = 256
    mc_log2: int = 18  # 2**18 ≈ 2.6e5 Sobol points per corona integral
    seed: int = 0xC0FFEE
    rel_tol: float = 1e-8
    mc_rel_tol: float = 1e-2
    check: bool = True

    def doubled(self):
        return QuadratureConfig(self.cutoff_factor, 2 * self.radial_nodes, 2 * self.profile_nodes,
                                self.mc_log2 + 1, self.seed, self.rel_tol, self.mc_rel_tol, False)

    def to_json(self):
        return {
            "cutoffFactor": self.cutoff_factor,
            "radialNodes": self.radial_nodes,
            "profileNodes": self.profile_nodes,
            "mcSamples": 2**self.mc_log2,
            "seed": self.seed,
            "relTol": self.rel_tol,
            "mcRelTol": self.mc_rel_tol,
        }


@lru_cache(maxsize=None)
def _gauss(n):
    return leggauss(n)


def gl_nodes(a, b, n):
    x, w = _gauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def composite_nodes(a, b, n):
    """Composite Gauss-Legendre rule with about n nodes in equal panels."""
    panels = max(1, n // PANEL_ORDER)
    x, w = _gauss(PANEL_ORDER)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w + 0 * nodes
    return nodes.ravel(), weights.ravel()


def _profile_nodes(base, k_max):
    # resolve cos(k s) on [0, 1]: enough nodes for the largest frequency
    return max(base, PANEL_ORDER * int(math.ceil((k_max / math.pi + 4) / 2)))


def ftime(R, p0, nodes=256):
    """∫ e^{i p0 t} h(2t/R) dt = R ∫_0^1 cos(p0 R s / 2) h(s) ds."""
    R = float(R)
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    n = _profile_nodes(nodes, float(np.max(np.abs(p0))) * R / 2 if p0.size else 0.0)
    s, w = composite_nodes(0.0, 1.0, n)
    hs = bump(s) * w
    out = np.empty(p0.shape)
    for i in range(0, p0.size, 2048):
        out[i : i + 2048] = R * (np.cos(np.outer(p0[i : i + 2048], s) * (R / 2)) @ hs)
    return out


def fspace(R, q, nodes=256):
    """(4π/q) ∫_0^{R/2} r sin(q r) h(4r²/R²) dr, with the q -> 0 limit."""
    R = float(R)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    n = _profile_nodes(nodes, float(np.max(q)) * R / 2 if q.size else 0.0)
    r, w = composite_nodes(0.0, R / 2, n)
    g = r * bump(4 * r**2 / R**2) * w
    out = np.empty(q.shape)
    for i in range(0, q.size, 2048):
        qq = q[i : i + 2048]
        small = qq < 1e-8
        safe = np.where(small, 1.0, qq)
        val = 4 * np.pi / safe * (np.sin(np.outer(safe, r)) @ g)
        val[small] = 4 * np.pi * np.sum(r * g)
        out[i : i + 2048] = val
    return out


class HyperboloidProfile:
    """Cached radial transforms and atom-pair kernels for a given mass."""

    def __init__(self, mass=1.0, config: QuadratureConfig | None = None):
        if mass < 0:
            raise ValueError("mass must be non-negative")
        self.mass = float(mass)
        self.config = config or QuadratureConfig()
        self._profiles = {}
        self._kernels = {}
        self.convergence = []  # (what, relative change)

    def omega(self, q):
        return np.sqrt(np.asarray(q, dtype=float) ** 2 + self.mass**2)

    def atom_hat(self, R, q, nodes=None):
        """fTime(R, ω(q)) · fSpace(R, q) for radial momenta q."""
        nodes = nodes or self.config.profile_nodes
        return ftime(R, self.omega(q), nodes) * fspace(R, q, nodes)

    def _radial(self, cutoff, nodes, pnodes, R):
        key = (cutoff, nodes, pnodes, R)
        got = self._profiles.get(key)
        if got is None:
            q, w = composite_nodes(0.0, cutoff, nodes)
            got = (q, w, self.atom_hat(R, q, pnodes))
            self._profiles[key] = got
        return got

    def _kernel_at(self, dt, d, R1, R2, nodes, pnodes):
        cutoff = self.config.cutoff_factor / float(min(R1, R2))
        q, w, F1 = self._radial(cutoff, nodes, pnodes, R1)
        F2 = self._radial(cutoff, nodes, pnodes, R2)[2]
        om = self.omega(q)
        integrand = w * q**2 / om * np.exp(1j * om * dt) * np.sinc(q * d / np.pi) * F1 * F2
        return complex(4 * np.pi / (2 * np.pi) ** 4 * np.sum(integrand))

    def kernel(self, delta, R1, R2) -> complex:
        """⟨E a1, E a2⟩ for unit atoms of scales R1, R2 with a2's center minus a1's = delta."""
        dt = Fraction(delta[0])
        d2 = sum(Fraction(v) ** 2 for v in delta[1:])
        key = (dt, d2, Fraction(R1), Fraction(R2))
        got = self._kernels.get(key)
        if got is not None:
            return got
        c = self.config
        d = math.sqrt(d2)
        val = self._kernel_at(float(dt), d, R1, R2, c.radial_nodes, c.profile_nodes)
        if c.check:
            fine = self._kernel_at(float(dt), d, R1, R2, 2 * c.radial_nodes, 2 * c.profile_nodes)
            scale = math.sqrt(abs(self._diag(R1)) * abs(self._diag(R2)))
            change = abs(fine - val) / scale
            self.convergence.append(("kernel", change))
            if change > c.rel_tol:
                raise QuadratureNotConverged(
                    f"atom kernel changed by {change:.2e} under node doubling"
                )
        self._kernels[key] = val
        return val

    def _diag(self, R):
        key = ("diag", Fraction(R))
        got = self._kernels.get(key)
        if got is None:
            c = self.config
            got = self._kernel_at(0.0, 0.0, R, R, c.radial_nodes, c.profile_nodes)
            self._kernels[key] = got
        return got

    def convergence_ok(self) -> bool:
        return all(v <= self.config.rel_tol for _, v in self.convergence)


# ------------------------------------------------------------ transforms


def em_transform(f: TestFunction, prof: HyperboloidProfile, momenta=None):
    """E_m f at spatial momenta (N, 3); defaults to the radial grid along p_x."""
    c = prof.config
    if momenta is None:
        rmin = min((float(a.scale) for a in f.atoms), default=1.0)
        q, _ = composite_nodes(0.0, c.cutoff_factor / rmin, c.radial_nodes)
        momenta = np.stack([q, 0 * q, 0 * q], axis=1)
    momenta = np.atleast_2d(np.asarray(momenta, dtype=float))
    qn = np.linalg.norm(momenta, axis=1)
    om = prof.omega(qn)
    out = np.zeros(len(momenta), dtype=complex)
    for a in f.atoms:
        y = np.array([float(v) for v in a.center])
        phase = np.exp(1j * (om * y[0] - momenta @ y[1:]))
        out += a.amplitude * phase * prof.atom_hat(a.scale, qn)
    out /= (2 * np.pi) ** 2
    if c.check and f.atoms:
        out2 = np.zeros(len(momenta), dtype=complex)
        for a in f.atoms:
            y = np.array([float(v) for v in a.center])
            phase = np.exp(1j * (om * y[0] - momenta @ y[1:]))
            out2 += a.amplitude * phase * prof.atom_hat(a.scale, qn, 2 * c.profile_nodes)
        out2 /= (2 * np.pi) ** 2
        scale = max(np.max(np.abs(out2)), 1e-300)
        change = float(np.max(np.abs(out2 - out)) / scale)
        prof.convergence.append(("transform", change))
        if change > c.rel_tol:
            raise QuadratureNotConverged(f"transform changed by {change:.2e} under node doubling")
    return momenta, out


def hyperboloid_inner(f: TestFunction, g: TestFunction, prof: HyperboloidProfile) -> complex:
    total = 0j
    for a in f.atoms:
        for b in g.atoms:
            delta = tuple(y - x for x, y in zip(a.center, b.center))
            total += a.amplitude * b.amplitude * prof.kernel(delta, a.scale, b.scale)
    return total


def sigma(f: TestFunction, g: TestFunction, prof: HyperboloidProfile) -> float:
    return 2.0 * hyperboloid_inner(f, g, prof).imag


def sigma_matrix(atoms1, atoms2, prof: HyperboloidProfile) -> np.ndarray:
    """σ between unit-amplitude atoms: entry (i, j) for atoms1[i], atoms2[j]."""
    M = np.zeros((len(atoms1), len(atoms2)))
    for i, (c1, R1) in enumerate(atoms1):
        for j, (c2, R2) in enumerate(atoms2):
            delta = tuple(y - x for x, y in zip(c1, c2))
            M[i, j] = 2.0 * prof.kernel(delta, R1, R2).imag
    return M


# --------------------------------------------------------- Weyl elements


@dataclass(frozen=True)
class WeylElement:
    """exp(i phase) · exp(iΦ(func))."""

    phase: float = 0.0
    func: TestFunction = ZERO

    def inverse(self) -> "WeylElement":
        return WeylElement(-self.phase, -self.func)

    def is_identity(self, tol=0.0) -> bool:
        return not self.func and abs(_wrap(self.phase)) <= tol

    def to_json(self):
        return {"phase": self.phase, "function": self.func.to_json()}


IDENTITY = WeylElement()


def _wrap(phi):
    return math.remainder(phi, 2 * math.pi)


def weyl_multiply(A: WeylElement, B: WeylElement, prof: HyperboloidProfile) -> WeylElement:
    if not A.func or not B.func:
        return WeylElement(A.phase + B.phase, A.func + B.func)
    return WeylElement(A.phase + B.phase - sigma(A.func, B.func, prof) / 2, A.func + B.func)


def weyl_commutator(A, B, prof) -> WeylElement:
    """A B A⁻¹ B⁻¹."""
    out = weyl_multiply(A, B, prof)
    out = weyl_multiply(out, A.inverse(), prof)
    return weyl_multiply(out, B.inverse(), prof)


def phase_distance(a: float, b: float) -> float:
    return abs(_wrap(a - b))


# ---------------------------------------------------------- corona integrals


@lru_cache(maxsize=8)
def _sobol(log2, seed):
    return qmc.Sobol(d=4, scramble=True, seed=seed).random_base2(log2)


def _inside(reg: DoubleCone, pts):
    c = np.array([float(v) for v in reg.center])
    d = pts - c
    return np.sqrt(np.sum(d[:, 1:] ** 2, axis=1)) + np.abs(d[:, 0]) < float(reg.radius)


def corona_integral(support: DoubleCone, faces, f_ev: TestFunction, config=None,
                    linear_maps=(), log2=None) -> float:
    """Seeded quasi-Monte Carlo estimate of ∫ over support minus faces of |f_ev|.

    The sample is symmetrized under the given linear maps about the box
    center so that rotated configurations get identical estimates.
    """
    if not f_ev:
        return 0.0
    if any(face == support for face in faces):
        return 0.0
    config = config or QuadratureConfig()
    log2 = config.mc_log2 if log2 is None else log2
    maps = [np.eye(4)]
    for m in linear_maps:
        m = np.asarray(m, dtype=float)
        if not any(np.array_equal(m, u) for u in maps):
            maps.append(m)
    # the symmetrized copies share the evaluation budget
    log2 = max(log2 - int(math.floor(math.log2(len(maps)))), 4)
    lo = np.min([[float(v) - float(a.scale) / 2 for v in a.center] for a in f_ev.atoms], axis=0)
    hi = np.max([[float(v) + float(a.scale) / 2 for v in a.center] for a in f_ev.atoms], axis=0)
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    half[1:] = np.max(half[1:])
    base = (2 * _sobol(log2, config.seed) - 1) * half
    total = 0.0
    for m in maps:
        pts = mid + base @ m.T
        keep = _inside(support, pts)
        for face in faces:
            keep &= ~_inside(face, pts)
        total += float(np.sum(np.abs(f_ev.evaluate(pts[keep]))))
    vol = float(np.prod(2 * half))
    return vol * total / (len(maps) * len(base))


def corona_check(support, faces, f_ev, config=None, linear_maps=()):
    """Estimate and relative change when the sample size is doubled."""
    config = config or QuadratureConfig()
    v = corona_integral(support, faces, f_ev, config, linear_maps)
    v2 = corona_integral(support, faces, f_ev, config, linear_maps, config.mc_log2 + 1)
    change = abs(v2 - v) / max(abs(v2), 1e-300) if v2 else abs(v)
    return v, v2, change


# ------------------------------------------------------- field connection


class FieldConnection:
    """b -> exp(i c_b Φ(f^odd_b)) with c_b the corona integral of |f^ev_b|.

    ``f`` is a 1-cochain (typically δ of an invariant 0-cochain) on a poset of
    double cones.  ``linear_maps`` symmetrize the corona sampling.
    """

    def __init__(self, f: Cochain, prof: HyperboloidProfile, linear_maps=()):
        self.f = f
        self.P = f.poset
        self.prof = prof
        self.linear_maps = tuple(np.asarray(m, dtype=float) for m in linear_maps)
        self._exact_maps = [
            [[Fraction(v).limit_denominator(10**6) for v in row] for row in m]
            for m in self.linear_maps
        ]
        self._coef = {}

    def parts(self, b):
        fb, fo = self.f[b], self.f[b.opposite()]
        return (fb + fo) * 0.5, (fb - fo) * 0.5

    def _key(self, b, f_ev):
        ref = f_ev.atoms[0].center
        regs = [self.P.region(e) for e in (b.support, b.d0, b.d1)]
        geo = tuple((tuple(x - y for x, y in zip(r.center, ref)), r.radius) for r in regs)
        atoms = tuple(
            (a.amplitude, tuple(x - y for x, y in zip(a.center, ref)), a.scale) for a in f_ev.atoms
        )
        ident = [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
        best = None
        for M in [ident] + self._exact_maps:
            mv = lambda v: tuple(sum(r * x for r, x in zip(row, v)) for row in M)
            cand = (
                (mv(geo[0][0]), geo[0][1]),
                tuple(sorted({(mv(c), r) for c, r in geo[1:]})),
                tuple(sorted((a, mv(c), R) for a, c, R in atoms)),
            )
            if best is None or cand < best:
                best = cand
        return best

    def coefficient(self, b) -> float:
        f_ev, _ = self.parts(b)
        if not f_ev or b.d0 == b.support or b.d1 == b.support:
            return 0.0
        key = self._key(b, f_ev)
        got = self._coef.get(key)
        if got is None:
            got = corona_integral(
                self.P.region(b.support),
                [self.P.region(b.d0), self.P.region(b.d1)],
                f_ev,
                self.prof.config,
                self.linear_maps,
            )
            self._coef[key] = got
        return got

    def value(self, b) -> WeylElement:
        c = self.coefficient(b)
        if c == 0.0:
            return IDENTITY
        _, f_odd = self.parts(b)
        return WeylElement(0.0, f_odd * c)


# ------------------------------------------------------------- certificates


def _frame(y3):
    n = np.linalg.norm(y3)
    if n == 0:
        return np.eye(3)
    e1 = y3 / n
    t = np.array([0.0, 1.0, 0.0]) if abs(e1[0]) > 0.9 else np.array([1.0, 0.0, 0.0])
    e2 = np.cross(e1, t)
    e2 /= np.linalg.norm(e2)
    return np.stack([e1, e2, np.cross(e1, e2)])


def factorized_norm2(f: TestFunction, y, prof: HyperboloidProfile, nphi=None) -> float:
    """∫ |E f|² |e^{ip·y} - 1|² d³p/ω by radial x polar x azimuthal quadrature.

    The polar axis is aligned with the spatial part of y.
    """
    c = prof.config
    y = np.array([float(v) for v in y])
    rmin = min(float(a.scale) for a in f.atoms)
    cutoff = c.cutoff_factor / rmin
    q, wq = composite_nodes(0.0, cutoff, c.radial_nodes)
    ys = float(np.linalg.norm(y[1:]))
    nmu = PANEL_ORDER * max(2, int(math.ceil((cutoff * ys / math.pi + 8) / PANEL_ORDER)))
    mu, wmu = composite_nodes(-1.0, 1.0, nmu)
    if nphi is None:
        nphi = 1 if len(f.atoms) == 1 else 32
    phi = 2 * np.pi * np.arange(nphi) / nphi
    wphi = np.full(nphi, 2 * np.pi / nphi)
    R = _frame(y[1:])
    sin = np.sqrt(1 - mu**2)
    dirs = np.stack(
        [np.repeat(mu, nphi), np.outer(sin, np.cos(phi)).ravel(), np.outer(sin, np.sin(phi)).ravel()],
        axis=1,
    ) @ R
    wdir = np.outer(wmu, wphi).ravel()
    total = 0.0
    for i in range(0, len(q), 256):
        qq, ww = q[i : i + 256], wq[i : i + 256]
        mom = (qq[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        _, E = em_transform(f, prof, mom)
        om = prof.omega(np.linalg.norm(mom, axis=1))
        ph = om * y[0] - mom @ y[1:]
        vals = np.abs(E) ** 2 * np.abs(np.exp(1j * ph) - 1) ** 2
        w = (ww[:, None] * qq[:, None] ** 2 * wdir[None, :]).ravel()
        total += float(np.sum(w * vals / om))
    return total


@dataclass
class NontrivialReport:
    simplex: object
    translation: tuple
    direct: float
    factorized: float
    rel_err: float

    @property
    def ok(self):
        return self.direct > 0 and self.rel_err < 1e-4

    def to_json(self):
        return {
            "simplex": str(self.simplex),
            "translation": [str(v) for v in self.translation],
            "direct": self.direct,
            "factorized": self.factorized,
            "relErr": self.rel_err,
            "ok": self.ok,
        }


def certify_nontrivial(f0: Cochain, b, prof: HyperboloidProfile) -> NontrivialReport:
    """‖E((δf)^odd_b)‖² directly and through the translated-face identity."""
    lo, hi = f0[b.d1], f0[b.d0]
    if len(lo.atoms) != len(hi.atoms) or not lo.atoms:
        raise ValueError(f"faces of {b} do not carry translated functions")
    y = tuple(u - v for u, v in zip(hi.atoms[0].center, lo.atoms[0].center))
    for a1, a2 in zip(lo.atoms, hi.atoms):
        moved = tuple(u + v for u, v in zip(a1.center, y))
        if moved != a2.center or a1.scale != a2.scale or a1.amplitude != a2.amplitude:
            raise ValueError(f"faces of {b} are not translates")
    odd = hi - lo
    if not odd:
        return NontrivialReport(b, y, 0.0, 0.0, 0.0)
    direct = hyperboloid_inner(odd, odd, prof).real
    fact = factorized_norm2(lo, y, prof)
    return NontrivialReport(b, y, direct, fact, abs(direct - fact) / abs(direct))


@dataclass
class NonflatWitness:
    simplex: object
    function_mismatch: float
    phase_mismatch: float
    coefficients: tuple

    def to_json(self):
        return {
            "simplex": str(self.simplex),
            "functionMismatch": self.function_mismatch,
            "phaseMismatch": self.phase_mismatch,
            "coefficients": list(self.coefficients),
        }


def cocycle_mismatch(fc: FieldConnection, c):
    """(‖E(F₀ + F₂ - F₁)‖, phase gap) for u(∂₀c) u(∂₂c) against u(∂₁c)."""
    u0, u1, u2 = fc.value(c.f0), fc.value(c.f1), fc.value(c.f2)
    lhs = weyl_multiply(u0, u2, fc.prof)
    diff = lhs.func - u1.func
    norm = math.sqrt(max(hyperboloid_inner(diff, diff, fc.prof).real, 0.0)) if diff else 0.0
    return norm, phase_distance(lhs.phase, u1.phase)


def certify_nonflat(fc: FieldConnection, supports=None, tol=1e-6, limit=None):
    """First 2-simplex (in enumeration order) whose cocycle identity fails by more than tol."""
    from .simplex import is_nerve2, iter_simplices2

    P = fc.P
    seen = 0
    for c in iter_simplices2(P, supports):
        if is_nerve2(P, c):
            continue
        seen += 1
        if limit is not None and seen > limit:
            break
        fn, ph = cocycle_mismatch(fc, c)
        if fn > tol or ph > tol:
            coefs = tuple(fc.coefficient(b) for b in c.faces())
            return NonflatWitness(c, fn, ph, coefs)
    return None


def free_field_connection(action, mass=1.0, amplitude=4.0, config=None):
    """Field connection built from δ of the invariant 0-cochain of the action.

    Returns (f0, profile, connection).  The corona sampling is symmetrized
    under the linear parts of the action's geometric realization.
    """
    from .cochain import build_invariant_0cochain, delta

    f0 = build_invariant_0cochain(action, amplitude=amplitude)
    prof = HyperboloidProfile(mass, config)
    maps = [action.geometric(g).linear() for g in action.names
            if hasattr(action.geometric(g), "linear")]
    return f0, prof, FieldConnection(delta(f0), prof, maps)
