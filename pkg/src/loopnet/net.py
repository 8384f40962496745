"""The net of causal loops: fibres over elements and the net axioms.

The fibre over ``o`` is the loop group of the sub-poset below ``o``.  It is
represented by its reduced loops up to a length cap, one of each inverse pair.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .causet import CausalPoset, PosetMorphism, SymmetryAction
from .loopgrp import (
    Word,
    apply_morphism,
    format_word,
    in_loop_group,
    inverse,
    is_loop,
    is_reduced,
    multiply,
    reduce,
    signed_letters,
    support,
    word_key,
)
from .quotient import Certificate, QuotientEngine, verify_certificate


def default_cap(size: int) -> int:
    """Loop length cap for a fibre of the given element count."""
    return 4 if size <= 6 else 2


@dataclass
class Fibre:
    element: str
    generators: list
    cap: int
    truncated: bool = False
    keys: set = field(default_factory=set, repr=False)

    def __len__(self):
        return len(self.generators)

    def __contains__(self, w):
        return canonical_key(w) in self.keys

    def all_generators(self):
        """Generators together with their inverses."""
        for g in self.generators:
            yield g
            yield inverse(g)


def canonical_key(w):
    return min(word_key(w), word_key(inverse(w)))


def fibre_generators(P: CausalPoset, o, cap=4, max_count=None) -> Fibre:
    """All reduced loops of length <= cap supported below o, one per inverse pair."""
    out_edges = {}
    for x in signed_letters(P, P.below(o)):
        out_edges.setdefault(x.start, []).append(x)
    found = {}
    truncated = False

    def walk(base, path, here):
        nonlocal truncated
        if len(path) >= cap or truncated:
            return
        for x in out_edges.get(here, ()):
            if path and x.simplex == path[-1].simplex and x.sign == -path[-1].sign:
                continue
            path.append(x)
            if x.end == base:
                w = Word(reversed(path))
                k = canonical_key(w)
                if k not in found:
                    if max_count is not None and len(found) >= max_count:
                        truncated = True
                        path.pop()
                        return
                    found[k] = w if word_key(w) == k else inverse(w)
            walk(base, path, x.end)
            path.pop()

    for v in sorted(out_edges, key=P.idx):
        walk(v, [], v)
    gens = sorted(found.values(), key=lambda w: (len(w), word_key(w)))
    return Fibre(o, gens, cap, truncated, set(found))


class FibreCache:
    def __init__(self, P: CausalPoset, cap_policy=default_cap):
        self.P = P
        self.cap_policy = cap_policy if callable(cap_policy) else (lambda n: cap_policy)
        self._fibres = {}

    def cap(self, o):
        return self.cap_policy(len(self.P.below(o)))

    def __getitem__(self, o) -> Fibre:
        if o not in self._fibres:
            self._fibres[o] = fibre_generators(self.P, o, self.cap(o))
        return self._fibres[o]


# ------------------------------------------------------------------ isotony


def check_isotony(P: CausalPoset, cap_policy=default_cap, fibres=None) -> dict:
    """o <= a: every generator over o is a loop below a (and a generator there)."""
    fibres = fibres or FibreCache(P, cap_policy)
    pairs = failures = 0
    bad = []
    for o in P.elements:
        fo = fibres[o]
        for a in P.above(o):
            fa = fibres[a]
            pairs += 1
            for g in fo.generators:
                ok = is_loop(g) and all(P.le(s, a) for s in support(g))
                if ok and fo.cap <= fa.cap and not fa.truncated:
                    ok = g in fa
                if not ok:
                    failures += 1
                    if len(bad) < 10:
                        bad.append({"below": o, "above": a, "generator": format_word(g)})
    return {"pairs": pairs, "failures": failures, "examples": bad, "ok": failures == 0}


# ---------------------------------------------------------------- causality


def commutation_certificate(P: CausalPoset, g, h, witness) -> Certificate:
    """Certificate that g h = h g for loops g below witness[0], h below witness[1].

    reduce(g h ḡ h̄) = g h ḡ h̄; swapping the middle loops h, ḡ leaves g ḡ h h̄.
    """
    start = multiply(g, h, inverse(g), inverse(h))
    n, m = len(g), len(h)
    steps = [
        {"op": "swap", "at": [n, n + m, 2 * n + m], "witness": [witness[1], witness[0]]},
        {"op": "reduce"},
    ]
    return Certificate(start, steps)


def _valid_under(P, g, o):
    return is_reduced(g) and is_loop(g) and all(P.le(s, o) for s in support(g))


def perp_pairs(P: CausalPoset):
    n = len(P)
    return [
        (P.elements[i], P.elements[j])
        for i in range(n)
        for j in range(i + 1, n)
        if P.perp[i, j]
    ]


def check_causality(P: CausalPoset, cap_policy=default_cap, fibres=None, replay=200,
                    seed=0, engine=None) -> dict:
    """Every generator over o commutes with every generator over a when o perp a.

    For each disjoint pair the swap certificate has the same shape for all
    generator pairs, so it is valid for the whole family once each generator
    is checked to be a reduced loop below its element.  A seeded sample of
    pairs is additionally run through the breadth-first search and replayed.
    """
    fibres = fibres or FibreCache(P, cap_policy)
    engine = engine or QuotientEngine(P, depth=2, width=5000)
    rng = random.Random(seed)
    valid = {}
    report = {"pairs": 0, "generatorPairs": 0, "failures": [], "replayed": 0, "families": []}
    candidates = []
    for o, a in perp_pairs(P):
        fo, fa = fibres[o], fibres[a]
        for e, f in ((o, fo), (a, fa)):
            if e not in valid:
                valid[e] = all(_valid_under(P, g, e) for g in f.generators)
        report["pairs"] += 1
        count = len(fo) * len(fa)
        report["generatorPairs"] += count
        ok = valid[o] and valid[a] and P.is_perp(o, a)
        report["families"].append({"left": o, "right": a, "count": count, "ok": ok,
                                   "witness": [o, a], "depth": 1})
        if not ok:
            report["failures"].append({"left": o, "right": a})
        if count:
            candidates.append((o, a, count))
    total = sum(c for _, _, c in candidates)
    for _ in range(replay if total else 0):
        r = rng.randrange(total)
        for o, a, c in candidates:
            if r < c:
                break
            r -= c
        fo, fa = fibres[o], fibres[a]
        g = fo.generators[r // len(fa)]
        h = fa.generators[r % len(fa)]
        verify_certificate(P, commutation_certificate(P, g, h, (o, a)))
        verdict = engine.equal(multiply(g, h), multiply(h, g))
        if not verdict or len(verdict.certificate) != 1:
            report["failures"].append(
                {"left": o, "right": a, "g": format_word(g), "h": format_word(h),
                 "verdict": verdict.status}
            )
        else:
            verify_certificate(P, verdict.certificate)
        report["replayed"] += 1
    report["ok"] = not report["failures"]
    return report


# ---------------------------------------------------------------- symmetry


def action_morphism(action: SymmetryAction, g) -> PosetMorphism:
    return PosetMorphism(action.poset, action.poset, action.perms[g])


def symmetry_on_net(action: SymmetryAction, cap_policy=default_cap, fibres=None) -> dict:
    """Each group element maps the fibre over o bijectively onto the fibre over s(o)."""
    P = action.poset
    fibres = fibres or FibreCache(P, cap_policy)
    checked = 0
    bad = []
    for g in action.names:
        psi = action_morphism(action, g)
        for o in P.elements:
            src, dst = fibres[o], fibres[action.act(g, o)]
            images = {canonical_key(apply_morphism(w, psi)) for w in src.generators}
            checked += 1
            if images != dst.keys:
                bad.append({"group": g, "element": o, "source": len(src), "target": len(dst),
                            "images": len(images)})
    return {"checked": checked, "failures": bad, "ok": not bad, "order": action.order}


# ------------------------------------------------------------- CL sampler


def _random_word(rng, letters, out_edges, max_len):
    n = rng.randint(0, max_len)
    if rng.random() < 0.5:
        w = [rng.choice(letters) for _ in range(n)]
        return reduce(Word(w))
    path = []
    here = rng.choice(sorted(out_edges))
    for _ in range(n):
        opts = [x for x in out_edges.get(here, ())
                if not (path and x.simplex == path[-1].simplex and x.sign == -path[-1].sign)]
        if not opts:
            break
        x = rng.choice(opts)
        path.append(x)
        here = x.end
    return Word(reversed(path))


def _commutator(q, p):
    return multiply(q, p, inverse(q), inverse(p))


def rewrite_in_CL(P: CausalPoset, terms):
    """Re-express prod w [q, p] w̄ with loop-group conjugators, or return None.

    Conjugators are freely reduced, adjacent mutually inverse terms are
    cancelled, and every surviving conjugator must lie in the loop group.
    """
    norm = [(reduce(w), q, p) for w, q, p in terms]
    stack = []
    for t in norm:
        if stack:
            w0, q0, p0 = stack[-1]
            if w0 == t[0] and reduce(_commutator(q0, p0) + _commutator(t[1], t[2])) == ():
                stack.pop()
                continue
        stack.append(t)
    for w, q, p in stack:
        if not in_loop_group(w):
            return None
    return stack


def check_lemma_CL(P: CausalPoset, samples=100, seed=0, cap=2, max_conjugator=4,
                   max_terms=2, max_tries=200000) -> dict:
    """Sample products of conjugated causal commutators lying in the loop group.

    Each accepted sample is rewritten with conjugators from the loop group and
    the rewrite is checked to reduce to the same word.
    """
    rng = random.Random(seed)
    fibres = FibreCache(P, cap)
    pairs = [(o, a) for o, a in perp_pairs(P) if len(fibres[o]) and len(fibres[a])]
    letters = signed_letters(P)
    out_edges = {}
    for x in letters:
        out_edges.setdefault(x.start, []).append(x)
    results, tries = [], 0
    while len(results) < samples and tries < max_tries:
        tries += 1
        terms = []
        for _ in range(rng.randint(1, max_terms)):
            o, a = rng.choice(pairs)
            q = rng.choice(fibres[o].generators)
            p = rng.choice(fibres[a].generators)
            if rng.random() < 0.5:
                q, p = p, q
            terms.append((_random_word(rng, letters, out_edges, max_conjugator), q, p))
        C = reduce(multiply(*[multiply(w, _commutator(q, p), inverse(w)) for w, q, p in terms]))
        if not in_loop_group(C):
            continue
        rewritten = rewrite_in_CL(P, terms)
        ok = rewritten is not None and reduce(
            multiply(*[multiply(w, _commutator(q, p), inverse(w)) for w, q, p in rewritten])
        ) == C
        results.append({"word": format_word(C), "terms": len(terms), "ok": ok})
    passed = sum(r["ok"] for r in results)
    return {"samples": len(results), "passed": passed, "tries": tries,
            "ok": len(results) == samples and passed == samples, "results": results}
