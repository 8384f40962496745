"""Small named posets and symmetry actions used by the tests and demos."""

from __future__ import annotations

from fractions import Fraction

from .causet import (
    AffineMap,
    CircleRotation,
    DoubleCone,
    SymmetryAction,
    build_causal_set_poset,
    build_circle,
    build_minkowski_lattice,
    from_relations,
    sprinkle,
)


def diamond():
    """x, y below both o and ohat, with x perp y."""
    return from_relations(
        ["x", "y", "o", "ohat"],
        [("x", "o"), ("y", "o"), ("x", "ohat"), ("y", "ohat")],
        [("x", "y")],
    )


def diamond_swap():
    """Diamond with the Z2 action exchanging o and ohat."""
    P = diamond()
    swap = {"x": "x", "y": "y", "o": "ohat", "ohat": "o"}
    return P, SymmetryAction.generate(P, {"s": swap})


def two_towers():
    """Two disjoint towers x_i, y_i < o_ia, o_ib < O_i under a common top T."""
    els, leq = [], []
    for i in (1, 2):
        x, y, a, b, O = f"x{i}", f"y{i}", f"o{i}a", f"o{i}b", f"O{i}"
        els += [x, y, a, b, O]
        leq += [(x, a), (y, a), (x, b), (y, b), (a, O), (b, O), (O, "T")]
    els.append("T")
    return from_relations(els, leq, [("O1", "O2")], close_perp=True)


# Minkowski fixture geometry: four towers on the spatial axes, a short
# time-axis ladder inside a central cone, four bridges and a top.
TOWER_DISTANCE = 8
TOWER_TEMPLATE = (  # (name, time offset, offset along the axis, radius)
    ("x", -1, Fraction(0), Fraction(1)),
    ("y", 1, Fraction(0), Fraction(1)),
    ("oa", 0, Fraction(-1, 2), Fraction(5, 2)),
    ("ob", 0, Fraction(1, 2), Fraction(3)),
    ("O", 0, Fraction(0), Fraction(7, 2)),
)
_AXES = ((1, 0), (0, 1), (-1, 0), (0, -1))
ROTATION = AffineMap(((1, 0, 0, 0), (0, 0, -1, 0), (0, 1, 0, 0), (0, 0, 0, 1)))
TIME_SHIFT = AffineMap.translation((1, 0, 0, 0))


def minkowski_cones():
    ids, cones = [], []
    for i, (ex, ey) in enumerate(_AXES):
        for name, dt, off, r in TOWER_TEMPLATE:
            d = TOWER_DISTANCE + off
            ids.append(f"{name}{i}")
            cones.append(DoubleCone((dt, d * ex, d * ey, 0), r))
    ids.append("C")
    cones.append(DoubleCone((0, 0, 0, 0), Fraction(5, 2)))
    for k in (-1, 0, 1):
        ids.append(f"a{k}")
        cones.append(DoubleCone((k, 0, 0, 0), Fraction(1, 2)))
    for k in (-1, 0):
        ids.append(f"s{k}")
        cones.append(DoubleCone((Fraction(2 * k + 1, 2), 0, 0, 0), 1))
    for i in range(4):
        (ax, ay), (bx, by) = _AXES[i], _AXES[(i + 1) % 4]
        h = TOWER_DISTANCE // 2
        ids.append(f"B{i}")
        cones.append(DoubleCone((0, h * (ax + bx), h * (ay + by), 0), 11))
    ids.append("T")
    cones.append(DoubleCone((0, 0, 0, 0), 17))
    return ids, cones


def minkowski():
    ids, cones = minkowski_cones()
    return build_minkowski_lattice(cones, ids)


def minkowski_with_rotations():
    """Minkowski fixture with the C4 group of quarter turns about the time axis."""
    P = minkowski()
    return P, SymmetryAction.from_geometry(P, {"r": ROTATION})


def minkowski_components():
    """Pairwise disjoint elements covering every disjoint pair of the fixture."""
    return ["O0", "O1", "O2", "O3", "C"]


def witness_loops():
    """Two loops in the fibre over O0 whose Weyl holonomies do not commute."""
    from .loopgrp import make_letter, Word

    p = Word([make_letter(("ob0", "x0", "y0")), make_letter(("oa0", "y0", "x0"))])
    q = Word(
        [
            make_letter(("O0", "x0", "ob0")),
            make_letter(("O0", "ob0", "oa0")),
            make_letter(("O0", "oa0", "x0")),
        ]
    )
    return p, q


def circle(n=12, lengths=(1, 2, 3)):
    return build_circle(n, lengths)


def circle_with_rotations(n=12, lengths=(1, 2, 3)):
    P = build_circle(n, lengths)
    return P, SymmetryAction.from_geometry(P, {"r": CircleRotation(1, n)})


def causal_set(seed=7, count=6, max_subset_size=2):
    return build_causal_set_poset(sprinkle(count, seed), max_subset_size)


def mismatched_realization():
    """Two small cones inside a big one, with the swap realized by a translation.

    The permutation is an honest automorphism but its geometric realization
    moves the big cone's center, so no atom at that center is invariant.
    """
    P = build_minkowski_lattice(
        [((0, -3, 0, 0), 1), ((0, 3, 0, 0), 1), ((0, 0, 0, 0), 5)], ["u", "v", "w"]
    )
    swap = {"u": "v", "v": "u", "w": "w"}
    return P, SymmetryAction.generate(P, {"s": swap}, {"s": AffineMap.translation((0, 6, 0, 0))})
