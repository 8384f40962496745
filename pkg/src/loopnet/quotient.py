"""Deciding equality in the free group modulo causal commutators.

Two words are equal in the quotient when ``reduce(a · b⁻¹)`` can be driven to
the empty word by swapping adjacent loop subwords supported on disjoint
regions (plus free reduction and, if needed, insertion of ``z z̄`` pairs).
The search is a breadth-first search with depth and width budgets; a found
sequence of moves is returned as a certificate that can be replayed.
Inequality is shown by a separating homomorphism that kills every causal
commutator: the abelianization or a verified representation backend.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .causet import CausalPoset
from .errors import CertificateInvalid
from .loopgrp import (
    Letter,
    Word,
    abelianize,
    format_word,
    inverse,
    is_loop,
    multiply,
    reduce,
    support,
)

EQUAL, UNEQUAL, UNKNOWN = "Equal", "Unequal", "Unknown"


@dataclass
class Certificate:
    """Moves that take ``start`` to the empty word."""

    start: Word
    steps: list = field(default_factory=list)

    def to_json(self):
        return certificate_to_json(self)

    def __len__(self):
        return sum(1 for s in self.steps if s["op"] != "reduce")


@dataclass
class Verdict:
    status: str
    certificate: Certificate | None = None
    witness: dict | None = None
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return self.status == EQUAL

    def to_json(self):
        out = {"verdict": self.status, "stats": self.stats}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.witness is not None:
            out["witness"] = self.witness
        return out


# ------------------------------------------------------------------ moves


def _loop_table(P: CausalPoset, w):
    """For every loop subword w[i:j]: bitmask of elements dominating its support."""
    n = len(w)
    table = {}
    full = (1 << len(P)) - 1
    for i in range(n):
        dom = full
        for j in range(i + 1, n + 1):
            if j > i + 1 and w[j - 2].start != w[j - 1].end:
                break
            dom &= P.up_mask(w[j - 1].support)
            if w[j - 1].start == w[i].end:
                table[(i, j)] = dom
    return table


def _perp_of(P: CausalPoset, mask, cache):
    got = cache.get(mask)
    if got is None:
        got = 0
        for e in P.from_mask(mask):
            got |= P.perp_mask(e)
        cache[mask] = got
    return got


def _witness(P, d1, d2, cache):
    for e in P.from_mask(d1):
        hit = P.perp_mask(e) & d2
        if hit:
            return e, P.from_mask(hit & -hit)[0]
    return None


def swap_moves(P: CausalPoset, w, cache=None):
    """All (i, j, k, witness) swapping adjacent disjoint loops w[i:j], w[j:k]."""
    cache = {} if cache is None else cache
    table = _loop_table(P, w)
    by_start = {}
    for (i, j), dom in table.items():
        by_start.setdefault(i, []).append((j, dom))
    for (i, j), d1 in table.items():
        pd1 = _perp_of(P, d1, cache)
        for k, d2 in by_start.get(j, ()):
            if pd1 & d2:
                yield i, j, k, _witness(P, d1, d2, cache)


def apply_swap(w, i, j, k):
    return Word(tuple(w[:i]) + tuple(w[j:k]) + tuple(w[i:j]) + tuple(w[k:]))


def apply_insert(w, pos, letter):
    return Word(tuple(w[:pos]) + (letter, letter.inverse()) + tuple(w[pos:]))


# ----------------------------------------------------------------- replay


def verify_certificate(P: CausalPoset, cert: Certificate) -> bool:
    """Replay a certificate; raises CertificateInvalid on a bad step."""
    w = Word(cert.start)
    for step in cert.steps:
        op = step["op"]
        if op == "reduce":
            w = reduce(w)
        elif op == "swap":
            i, j, k = step["at"]
            u, v = w[i:j], w[j:k]
            if not (0 <= i < j < k <= len(w)) or not is_loop(u) or not is_loop(v):
                raise CertificateInvalid(f"swap at {step['at']} is not of two loops")
            o1, o2 = step["witness"]
            if not (all(P.le(s, o1) for s in support(u)) and all(P.le(s, o2) for s in support(v))):
                raise CertificateInvalid("witness does not dominate the supports")
            if not P.is_perp(o1, o2):
                raise CertificateInvalid(f"{o1} and {o2} are not disjoint")
            w = apply_swap(w, i, j, k)
        elif op == "insert":
            x = step["letter"]
            w = apply_insert(w, step["at"], Letter(x.simplex, x.sign))
        else:
            raise CertificateInvalid(f"unknown step {op!r}")
    if len(reduce(w)) != 0:
        raise CertificateInvalid("replay does not end at the empty word")
    return True


def reverse_certificate(cert: Certificate) -> Certificate:
    """Certificate for the inverse start word, mirroring each move."""
    w = Word(cert.start)
    out = []
    for step in cert.steps:
        n = len(w)
        if step["op"] == "reduce":
            out.append(step)
            w = reduce(w)
        elif step["op"] == "swap":
            i, j, k = step["at"]
            o1, o2 = step["witness"]
            out.append({"op": "swap", "at": [n - k, n - j, n - i], "witness": [o2, o1]})
            w = apply_swap(w, i, j, k)
        else:
            out.append({"op": "insert", "at": n - step["at"], "letter": step["letter"]})
            w = apply_insert(w, step["at"], step["letter"])
    return Certificate(inverse(cert.start), out)


# ------------------------------------------------------------- separators


def abelian_separator(a, b):
    da, db = abelianize(a), abelianize(b)
    if da == db:
        return None
    diff = {str(k): da.get(k, 0) - db.get(k, 0) for k in set(da) | set(db)}
    return {"separator": "abelianization", "difference": {k: v for k, v in sorted(diff.items()) if v}}


class QuotientEngine:
    """Three-valued equality in F(K) modulo causal commutators."""

    def __init__(self, P: CausalPoset, backends=(), depth=6, width=20000, max_length=40,
                 insert_letters=8):
        self.P = P
        self.backends = list(backends)
        self.depth = depth
        self.width = width
        self.max_length = max_length
        self.insert_letters = insert_letters
        self._certified = {}
        self._cache = {}

    def _usable(self, backend):
        key = id(backend)
        if key not in self._certified:
            self._certified[key] = bool(backend.certify_causal(self.P))
        return self._certified[key]

    def separate(self, a, b):
        wit = abelian_separator(a, b)
        if wit is not None:
            return wit
        for be in self.backends:
            if not self._usable(be):
                continue
            wit = be.separates(a, b)
            if wit is not None:
                return wit
        return None

    def search(self, start, depth=None, width=None):
        """BFS from ``start`` to the empty word; returns a Certificate or None and stats."""
        depth = self.depth if depth is None else depth
        width = self.width if width is None else width
        s0 = reduce(start)
        stats = {"states": 1, "depth": 0, "exhausted": False}
        if not s0:
            return Certificate(Word(start), [{"op": "reduce"}] if start else []), stats
        parent = {s0: None}
        level = deque([s0])
        for d in range(1, depth + 1):
            stats["depth"] = d
            nxt = deque()
            for w in level:
                for child, steps in self._children(w, allow_insert=d < depth):
                    if child in parent:
                        continue
                    parent[child] = (w, steps)
                    stats["states"] += 1
                    if not child:
                        return self._unwind(start, s0, child, parent), stats
                    if len(parent) >= width:
                        stats["exhausted"] = True
                        return None, stats
                    nxt.append(child)
            if not nxt:
                break
            level = nxt
        stats["exhausted"] = bool(level)
        return None, stats

    def _children(self, w, allow_insert):
        P = self.P
        for i, j, k, wit in swap_moves(P, w, self._cache):
            child = reduce(apply_swap(w, i, j, k))
            if len(child) <= self.max_length:
                yield child, [
                    {"op": "swap", "at": [i, j, k], "witness": list(wit)},
                    {"op": "reduce"},
                ]
        if not allow_insert or len(w) + 2 > self.max_length:
            return
        alphabet = []
        for x in w:
            for y in (x, x.inverse()):
                if y not in alphabet:
                    alphabet.append(y)
        for z in alphabet[: self.insert_letters]:
            for pos in range(len(w) + 1):
                u = apply_insert(w, pos, z)
                for i, j, k, wit in swap_moves(P, u, self._cache):
                    if not (i <= pos + 1 and k >= pos + 1 and (j in (pos, pos + 1, pos + 2))):
                        continue
                    child = reduce(apply_swap(u, i, j, k))
                    if len(child) <= self.max_length:
                        yield child, [
                            {"op": "insert", "at": pos, "letter": z},
                            {"op": "swap", "at": [i, j, k], "witness": list(wit)},
                            {"op": "reduce"},
                        ]

    @staticmethod
    def _unwind(start, s0, goal, parent):
        chain = []
        w = goal
        while parent[w] is not None:
            prev, steps = parent[w]
            chain.append(steps)
            w = prev
        steps = [] if Word(start) == s0 else [{"op": "reduce"}]
        for s in reversed(chain):
            steps.extend(s)
        return Certificate(Word(start), steps)

    def equal(self, a, b, depth=None, width=None) -> Verdict:
        start = multiply(a, inverse(b))
        if not reduce(start):
            steps = [] if not start else [{"op": "reduce"}]
            return Verdict(EQUAL, Certificate(start, steps), stats={"states": 1, "depth": 0})
        wit = self.separate(a, b)
        if wit is not None:
            return Verdict(UNEQUAL, witness=wit)
        cert, stats = self.search(start, depth, width)
        if cert is not None:
            return Verdict(EQUAL, cert, stats=stats)
        return Verdict(UNKNOWN, stats=stats)


def quotient_equal(P: CausalPoset, a, b, depth=6, width=20000, backends=()) -> Verdict:
    return QuotientEngine(P, backends, depth=depth, width=width).equal(a, b)


def certificate_to_json(cert: Certificate):
    out = []
    for s in cert.steps:
        s = dict(s)
        if "letter" in s:
            s["letter"] = str(s["letter"])
        out.append(s)
    return {"start": format_word(cert.start), "steps": out, "end": "1"}
