"""
Loops over two towers
=====================

Builds the two-tower poset, looks at its simplices and loop words, and
checks that loops over disjoint towers commute in the quotient group.
"""

from loopnet import fixtures
from loopnet.loopgrp import format_word, in_loop_group, multiply, parse_word
from loopnet.net import FibreCache, check_causality
from loopnet.quotient import QuotientEngine
from loopnet.simplex import simplex_counts

P = fixtures.two_towers()
print(P, simplex_counts(P))

# words are read right to left: the rightmost letter is traversed first
w = parse_word("(o1a;y1,x1)(o1b;x1,y1)", P)
print(format_word(w), "is in the loop group:", in_loop_group(w))

# reduced loops up to length 4 over each tower top
fib = FibreCache(P)
p, q = fib["O1"].generators[3], fib["O2"].generators[7]
print(len(fib["O1"]), "generators over O1; e.g.", format_word(p))

# O1 and O2 are disjoint, so pq and qp agree, with a replayable certificate
v = QuotientEngine(P).equal(multiply(p, q), multiply(q, p))
print(v.status, v.certificate.to_json()["steps"])

# two loops over the same tower: no certificate and no separator, so Unknown
p2 = fib["O1"].generators[5]
print(QuotientEngine(P, depth=3, width=2000).equal(multiply(p, p2), multiply(p2, p)).status)

rep = check_causality(P, replay=20)
print("causality:", rep["ok"], rep["generatorPairs"], "generator pairs")
