"""
Path frames, obstructions and gauge changes
===========================================
"""

import numpy as np

from loopnet import fixtures
from loopnet.connection import (
    ConnectionSystem,
    GaugeTransformation,
    MatrixBackend,
    apply_gauge,
    build_covariant_system,
    build_path_frame,
    connection_from_rep,
    frame_change_gauge,
)
from loopnet.errors import NoInvariantFrame
from loopnet.loopgrp import format_word

P, act = fixtures.minkowski_with_rotations()
system = build_covariant_system(P, act)
print(len(system.frames), "covariant frames; from x0 to y1:", format_word(system["x0"].path("y1")))

# swapping o and ohat fixes x and y, and every x -> y path uses a moved letter
D, swap = fixtures.diamond_swap()
try:
    build_covariant_system(D, swap)
except NoInvariantFrame as exc:
    print("obstructed:", exc.witness)

# two frames over the same pole differ by a gauge transformation
T = fixtures.two_towers()
be = MatrixBackend.covariant(T, None, ["O1", "O2"], dim=2, seed=3)
F, G = build_path_frame(T, "x1", 1), build_path_frame(T, "x1", -1)
uF, uG = connection_from_rep(be, F, T), connection_from_rep(be, G, T)
g = GaugeTransformation(be, {"x1": frame_change_gauge(be, F, G)})
moved = apply_gauge(ConnectionSystem(be, {"x1": uF}), g)["x1"]
print("max |u^g - u'|:", max(np.abs(moved.value(b) - uG.value(b)).max() for b in uG.values))
