"""Brute-force reference computations shared by the unit and acceptance tests."""

import numpy as np
from numpy.polynomial.legendre import leggauss

from loopnet.loopgrp import Word, inverse, is_loop, multiply, reduce, signed_letters

MOMENTA = np.array([[0, 0, 0], [1.3, -0.7, 2.1], [0, 0, 4], [-3, 2, 1], [2.5, 0, -1.5]], float)


def _panels(n, panels):
    s, w = leggauss(n // panels)
    e = np.linspace(-1, 1, panels + 1)
    x = np.concatenate([(b - a) / 2 * s + (a + b) / 2 for a, b in zip(e[:-1], e[1:])])
    return x, np.concatenate([(b - a) / 2 * w for a, b in zip(e[:-1], e[1:])])


def em_transform_4d(f, momenta, mass=1.0, n=64, panels=4):
    """(2π)^-2 ∫ e^{i(ω t - p·x)} f(t, x) d⁴x by tensor Gauss-Legendre over each atom's box.

    Uses only TestFunction.evaluate, so it shares no code with the radial
    factorization it is compared against.
    """
    momenta = np.atleast_2d(np.asarray(momenta, dtype=float))
    om = np.sqrt(np.sum(momenta**2, axis=1) + mass**2)
    s, w = _panels(n, panels)
    out = np.zeros(len(momenta), dtype=complex)
    for a in f.atoms:
        single = type(f)([a])
        c = np.array([float(v) for v in a.center])
        h = float(a.scale) / 2
        x, wx = c[None, :] + h * s[:, None], h * w
        X, Y, Z = np.meshgrid(x[:, 1], x[:, 2], x[:, 3], indexing="ij")
        W3 = (wx[:, None, None] * wx[None, :, None] * wx[None, None, :]).ravel()
        xyz = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
        sp = np.exp(-1j * xyz @ momenta.T)
        for t, wt in zip(x[:, 0], wx):
            vals = single.evaluate(np.column_stack([np.full(len(xyz), t), xyz])) * W3 * wt
            out += np.exp(1j * om * t) * (vals @ sp)
    return out / (2 * np.pi) ** 2


def fixpoint_reduce(w):
    """Delete the first adjacent inverse pair until none is left."""
    w = list(w)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i].simplex == w[i + 1].simplex and w[i].sign == -w[i + 1].sign:
                del w[i : i + 2]
                changed = True
                break
    return Word(w)


def partition_member(w):
    """Try every split of the reduced word into consecutive blocks."""
    r = reduce(w)
    n = len(r)
    if n == 0:
        return True
    for mask in range(1 << (n - 1)):
        cuts = [0] + [i + 1 for i in range(n - 1) if mask >> i & 1] + [n]
        if all(is_loop(r[a:b]) for a, b in zip(cuts, cuts[1:])):
            return True
    return False


def loop_rich_word(rng, P, fib, n):
    """Random word built mostly from fibre generators, cut to length n."""
    letters = signed_letters(P)
    parts = []
    while sum(map(len, parts)) < n:
        r = rng.random()
        if r < 0.6:
            o = rng.choice(P.elements)
            gens = fib[o].generators
            if gens:
                g = rng.choice(gens)
                parts.append(g if rng.random() < 0.5 else inverse(g))
                continue
        parts.append(Word([rng.choice(letters)]))
    w = multiply(*parts)
    return Word(w[:n])
