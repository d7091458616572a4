"""Reference values the verifier compares against."""

from __future__ import annotations

from .varieties import BettiTable

# g -> (Y description, index, d(Y), F description, d(F), pi(F))
SURFACE_TABLE = {
    7: ("P4", 5, 1, "linkage of a Veronese surface in P4", 8, 6),
    8: ("quadric in P5", 4, 2, "linkage of a Veronese surface in P5", 8, 4),
    9: ("intersection of two quadrics in P6", 3, 4, "Veronese surface in P5", 4, 0),
    10: ("linear section of G(1,4)", 3, 5, "sextic del Pezzo surface in P6", 6, 1),
}

# number of lines through a general point
LINES_THROUGH_POINT = {7: 5, 8: 4, 9: 4, 10: 3}

_BETTI_TEXT = {
    7: """
   0 1 2 3
0: 1 . . .
1: . . . .
2: . 1 . .
3: . 4 5 1
""",
    8: """
   0 1 2 3
0: 1 . . .
1: . 2 . .
2: . 4 9 4
""",
    9: """
    0  1  2  3  4
0:  1  1  .  .  .
1:  .  6 14 11  3
""",
    10: """
    0  1  2  3  4
0:  1  1  .  .  .
1:  .  9 25 25  9
2:  .  .  .  1  1
""",
}

BETTI_DISPLAYS = {g: BettiTable.from_text(t) for g, t in _BETTI_TEXT.items()}

# dimension of the degree 2i-3 double-point system (g + 3)
DOUBLE_POINT_DIMENSION = {7: 10}


def surface_row(g: int) -> dict:
    y, i, dY, f, dF, pi = SURFACE_TABLE[g]
    return {"Y": y, "index": i, "dY": dY, "F": f, "dF": dF, "pi": pi}
