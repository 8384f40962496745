"""Words in the free group on tangent 1-simplices, paths and loops.

A letter is a canonical tangent simplex together with a sign.  Of each
opposite pair ``b, b̄`` the lexicographically smaller one (by element ids) is
canonical and ``b̄`` is written as its inverse.  Self-opposite simplices
``(s; v, v)`` get a formal inverse with sign -1.

Words are written like composition of maps: the rightmost letter is traversed
first, so ``w = b2 b1`` runs along ``b1`` and then ``b2``.
"""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable, NamedTuple

from .causet import CausalPoset, PosetMorphism
from .errors import InvalidSimplex, NotAPath, NotTangent
from .simplex import Simplex1, is_tangent


class Letter(NamedTuple):
    simplex: Simplex1
    sign: int = 1

    @property
    def oriented(self) -> Simplex1:
        return self.simplex if self.sign > 0 else self.simplex.opposite()

    @property
    def start(self):
        return self.oriented.d1

    @property
    def end(self):
        return self.oriented.d0

    @property
    def support(self):
        return self.simplex.support

    def inverse(self) -> "Letter":
        return Letter(self.simplex, -self.sign)

    def __str__(self):
        s = self.oriented
        if self.simplex.is_self_opposite() and self.sign < 0:
            return f"~{s}"
        return str(s)


def make_letter(b, poset: CausalPoset | None = None, inverse: bool = False) -> Letter:
    b = Simplex1(*b)
    if poset is not None:
        for e in b:
            poset.idx(e)
        if not (poset.le(b.d0, b.support) and poset.le(b.d1, b.support)):
            raise InvalidSimplex(f"{b} is not a simplex")
        if not is_tangent(poset, b):
            raise NotTangent(f"{b} is not tangent")
    op = b.opposite()
    if op < b:
        letter = Letter(op, -1)
    else:
        letter = Letter(b, 1)
    return letter.inverse() if inverse else letter


class Word(tuple):
    """Immutable tuple of letters; index 0 is the letter traversed last."""

    def __new__(cls, letters: Iterable[Letter] = ()):
        return super().__new__(cls, letters)

    def __mul__(self, other):
        return Word(tuple(self) + tuple(other))

    def __add__(self, other):
        return Word(tuple(self) + tuple(other))

    def __getitem__(self, k):
        out = super().__getitem__(k)
        return Word(out) if isinstance(k, slice) else out

    def inverse(self) -> "Word":
        return inverse(self)

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return f"Word({format_word(self)!r})"


EMPTY = Word()


def inverse(w) -> Word:
    return Word(x.inverse() for x in reversed(w))


def multiply(*words) -> Word:
    out = []
    for w in words:
        out.extend(w)
    return Word(out)


def reduce(w) -> Word:
    stack = []
    for x in w:
        if stack and stack[-1].simplex == x.simplex and stack[-1].sign == -x.sign:
            stack.pop()
        else:
            stack.append(x)
    return Word(stack)


def is_reduced(w) -> bool:
    return all(
        not (a.simplex == b.simplex and a.sign == -b.sign) for a, b in zip(w, w[1:])
    )


def support(w) -> set:
    return {x.support for x in reduce(w)}


def is_path(w) -> bool:
    """Consecutive letters join up: each letter starts where the next-right one ends."""
    return all(a.start == b.end for a, b in zip(w, w[1:]))


def endpoints(w):
    """(start, end) of a nonempty path."""
    if not w:
        raise NotAPath("the empty word has no endpoints")
    if not is_path(w):
        raise NotAPath(f"{format_word(w)} is not a path")
    return w[-1].start, w[0].end


def is_loop(w, at=None) -> bool:
    if not w or not is_path(w):
        return False
    s, e = w[-1].start, w[0].end
    return s == e and (at is None or s == at)


def compose_paths(p2, p1) -> Word:
    """Traverse p1, then p2."""
    if p1 and p2 and p2[-1].start != p1[0].end:
        raise NotAPath("paths do not join")
    return multiply(p2, p1)


def loop_blocks(w):
    """Split reduce(w) into consecutive loops, or None if impossible.

    Loops at different basepoints cannot cancel against each other, so a word
    lies in the loop group exactly when its reduced form splits this way.
    """
    r = reduce(w)
    n = len(r)
    back = [None] * (n + 1)
    back[0] = -1
    for i in range(n):
        if back[i] is None:
            continue
        for j in range(i + 1, n + 1):
            if j > i + 1 and r[j - 2].start != r[j - 1].end:
                break
            if r[j - 1].start == r[i].end and back[j] is None:
                back[j] = i
    if back[n] is None:
        return None
    blocks, j = [], n
    while j > 0:
        i = back[j]
        blocks.append(r[i:j])
        j = i
    return blocks[::-1]


def in_loop_group(w) -> bool:
    return loop_blocks(w) is not None


def perp_witness(w1, w2, P: CausalPoset):
    """(o1, o2) with |w1| <= o1, |w2| <= o2 and o1 perp o2, else None."""
    return P.perp_witness(support(w1), support(w2))


def word_perp(w1, w2, P: CausalPoset) -> bool:
    return perp_witness(w1, w2, P) is not None


def abelianize(w) -> dict:
    c = Counter()
    for x in w:
        c[x.simplex] += x.sign
    return {k: v for k, v in c.items() if v}


def apply_morphism(w, psi: PosetMorphism) -> Word:
    out = []
    for x in w:
        b = x.oriented
        img = Simplex1(psi(b.support), psi(b.d0), psi(b.d1))
        if b.is_self_opposite():
            out.append(Letter(img, x.sign))
        else:
            out.append(make_letter(img, psi.target))
    return Word(out)


def word_key(w):
    return tuple((x.simplex, x.sign) for x in w)


# ------------------------------------------------------------ text format

_SIMPLEX = re.compile(r"(~?)\(\s*([^;,()\s]+)\s*;\s*([^;,()\s]+)\s*,\s*([^;,()\s]+)\s*\)")


def format_word(w) -> str:
    return " ".join(str(x) for x in w) if w else "1"


def parse_word(text: str, poset: CausalPoset | None = None) -> Word:
    """Parse letters like ``(o;y,x)``; a leading ``~`` inverts the letter."""
    text = text.strip()
    if text in ("", "1"):
        return EMPTY
    letters, pos = [], 0
    for m in _SIMPLEX.finditer(text):
        if text[pos : m.start()].strip(" *\t\n"):
            raise ValueError(f"cannot parse {text[pos:m.start()]!r}")
        inv, s, d0, d1 = m.groups()
        letters.append(make_letter((s, d0, d1), poset, inverse=bool(inv)))
        pos = m.end()
    if text[pos:].strip(" *\t\n"):
        raise ValueError(f"cannot parse {text[pos:]!r}")
    return Word(letters)


def letters_of(P: CausalPoset, supports=None) -> list:
    """Canonical letters (sign +1) of all tangent simplices, optionally by support."""
    out = []
    for s in supports if supports is not None else P.elements:
        low = P.below(s, strict=True)
        for d0 in low:
            for d1 in low:
                b = Simplex1(s, d0, d1)
                if b <= b.opposite():
                    out.append(Letter(b, 1))
    return out


def signed_letters(P: CausalPoset, supports=None) -> list:
    out = []
    for x in letters_of(P, supports):
        out.append(x)
        out.append(x.inverse())
    return out
