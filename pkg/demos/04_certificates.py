"""
Certifying non-triviality and non-flatness
==========================================

The odd part of δf on a simplex whose faces are translates has a norm that
can be computed two ways.  A 2-simplex off the nerve breaks the cocycle
identity.
"""

from loopnet import fixtures
from loopnet.simplex import Simplex1
from loopnet.weyl import certify_nonflat, certify_nontrivial, free_field_connection

P, act = fixtures.minkowski_with_rotations()
f0, prof, fc = free_field_connection(act)

rep = certify_nontrivial(f0, Simplex1("B0", "x1", "x0"), prof)
print("direct", rep.direct, "factorized", rep.factorized, "rel err", rep.rel_err)

# faces at the same point: the odd part vanishes
print(certify_nontrivial(f0, Simplex1("O0", "x0", "x0"), prof).direct)

w = certify_nonflat(fc)
print(w.to_json())
