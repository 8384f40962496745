"""
A free-field connection on double cones
=======================================

Puts the rotation-invariant field connection on the Minkowski fixture and
shows two loops over the same cone whose holonomies fail to commute.
"""

from loopnet import fixtures
from loopnet.connection import WeylBackend
from loopnet.loopgrp import format_word, multiply
from loopnet.quotient import QuotientEngine
from loopnet.weyl import free_field_connection

P, act = fixtures.minkowski_with_rotations()
print(P, "with a symmetry group of order", act.order)

# δ of an invariant bump cochain, weighted by corona volumes
f0, prof, fc = free_field_connection(act)
weyl = WeylBackend(fc)
print("causal defect of the letter values:", weyl.causal_defect())

p, q = fixtures.witness_loops()
print("p =", format_word(p))
print("q =", format_word(q))
c = weyl.commutator(weyl.holonomy(p), weyl.holonomy(q))
print("commutator phase:", c.phase)

# the phase separates pq from qp, so the loop group over O0 is not Abelian
v = QuotientEngine(P, [weyl]).equal(multiply(p, q), multiply(q, p))
print(v.status, v.witness)
