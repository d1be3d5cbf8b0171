"""Named Bell functionals for the KS18 and Yu-Oh correlations.

KS18 functionals share one letter pattern over the 18 x 18 joint block (the
block is symmetric, so orientation does not matter) and a single marginal
letter on both sides.  Yu-Oh matrices are stored as displayed: header row
holds Alice's marginals, first column Bob's, entry (row y, column x) is the
coefficient of P(A_x = B_y = 1).
"""

from __future__ import annotations

from fractions import Fraction as F

from .polytope import BellFunctional

KS18_PATTERN = """
f a a d d c c d d c c e b c b b b c
a f a c d d d d c b b c c e c b b c
a a f d c d d c d b b c b c b c c e
d c d f a a d d c c b b c c e c b b
d d c a f a d c d c b b b b c e c c
c d d a a f c d d e c c b b c c b b
c d d d d c f a a c e c c b b b c b
d d c d c d a f a b c b c b b c e c
d c d c d d a a f b c b e c c b c b
c b b c c e c b b f a a d d c c d d
c b b b b c e c c a f a c d d d c d
e c c b b c c b b a a f d c d d d c
b c b c b b c c e d c d f a a d c d
c e c c b b b b c d d c a f a d d c
b c b e c c b b c c d d a a f c d d
b b c c e c b c b c d d d d c f a a
b b c b c b c e c d c d c d d a f a
c c e b c b b c b d d c d c d a a f
"""

KS18_LETTERS = ("a", "b", "c", "d", "e", "f", "g")

# letter values; g is the common marginal coefficient
_KS18_VALUES = {
    "ks18_graph": dict(a=F(-1, 2), b=F(-1, 2), c=0, d=0, e=F(-1, 2), f=1, g=0),
    "ks18_v": dict(a=F(-12, 9), b=F(-32, 9), c=F(19, 9), d=F(-1, 9), e=F(-21, 9), f=F(8, 9), g=-1),
    "ks18_eta": dict(a=-1, b=-3, c=3, d=0, e=-3, f=2, g=-4),
    "ks18_tight": dict(a=-2, b=-2, c=1, d=0, e=-2, f=0, g=0),
}

_KS18_BOUNDS = {"ks18_graph": 4, "ks18_v": 12, "ks18_eta": 0, "ks18_tight": 8}


def ks18_pattern() -> list[list[str]]:
    return [line.split() for line in KS18_PATTERN.strip().splitlines()]


def ks18_functional(values: dict, bound=None, name: str = "") -> BellFunctional:
    pat = ks18_pattern()
    joint = [[F(values[ch]) for ch in row] for row in pat]
    marg = [F(values["g"])] * len(pat)
    return BellFunctional(len(pat), joint, marg, marg, bound, name)


_YUOH_GRAPH_ROWS = """
6 -3 -3 -3 -3 0 0 0 0 0 0 0 0
-3 6 -3 0 0 -3 -3 0 0 0 0 0 0
-3 -3 6 0 0 0 0 -3 -3 0 0 0 0
-3 0 0 6 -3 0 0 0 0 0 0 -3 -3
-3 0 0 -3 6 0 0 0 0 -3 -3 0 0
0 -3 0 0 0 6 -3 0 0 0 -3 0 -3
0 -3 0 0 0 -3 6 0 0 -3 0 -3 0
0 0 -3 0 0 0 0 6 -3 0 -3 -3 0
0 0 -3 0 0 0 0 -3 6 -3 0 0 -3
0 0 0 0 -3 0 -3 0 -3 4 0 0 0
0 0 0 0 -3 -3 0 -3 0 0 4 0 0
0 0 0 -3 0 0 -3 -3 0 0 0 4 0
0 0 0 -3 0 -3 0 0 -3 0 0 0 4
"""

_YUOH_V_ROWS = """
0 0 0 -1 -1 1 1 1 1 0 0 0 0
0 0 0 1 1 -1 -1 1 1 0 0 0 0
0 0 0 1 1 1 1 -1 -1 0 0 0 0
-1 1 1 0 0 0 0 0 0 2 2 -2 -2
-1 1 1 0 0 0 0 0 0 -2 -2 2 2
1 -1 1 0 0 0 0 0 0 2 -2 2 -2
1 -1 1 0 0 0 0 0 0 -2 2 -2 2
1 1 -1 0 0 0 0 0 0 2 -2 -2 2
1 1 -1 0 0 0 0 0 0 -2 2 2 -2
0 0 0 2 -2 2 -2 2 -2 0 -3 -3 -3
0 0 0 2 -2 -2 2 -2 2 -3 0 -3 -3
0 0 0 -2 2 2 -2 -2 2 -3 -3 0 -3
0 0 0 -2 2 -2 2 2 -2 -3 -3 -3 0
"""

_YUOH_ETA_ROWS = """
0 0 0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 3 0 0 -2 -2 6 6 -8 -8
0 0 0 3 0 0 0 -2 -2 -3 -3 6 6
0 0 0 -2 -2 0 3 0 0 6 -3 6 -3
0 0 0 -2 -2 3 0 0 0 -3 6 -3 6
0 0 0 0 0 -2 -2 0 3 6 -3 -8 6
0 0 0 0 0 -2 -2 3 0 -3 6 6 -8
0 0 0 6 -3 6 -8 6 -3 2 -4 -4 -4
0 0 0 6 -8 -8 6 -3 6 -4 2 -4 -4
0 0 0 -3 6 6 -3 -8 6 -4 -4 2 -4
0 0 0 -3 6 -3 6 6 -3 -4 -4 -4 2
"""


def _rows(text: str) -> list[list[int]]:
    return [[int(v) for v in line.split()] for line in text.strip().splitlines()]


def _displayed(marg_a, marg_b, rows, scale=1) -> list[list]:
    out = [[None] + [F(v) * scale for v in marg_a]]
    for y, row in enumerate(rows):
        out.append([F(marg_b[y]) * scale] + [F(v) * scale for v in row])
    return out


def _yuoh(name: str) -> BellFunctional:
    if name == "yuoh_graph":
        z = [0] * 13
        return BellFunctional.from_paper_matrix(_displayed(z, z, _rows(_YUOH_GRAPH_ROWS), F(1, 2)), 11, name)
    if name == "yuoh_v_tight":
        marg = [-1] * 9 + [3] * 4
        return BellFunctional.from_paper_matrix(_displayed(marg, marg, _rows(_YUOH_V_ROWS)), 12, name)
    if name == "yuoh_eta_tight":
        marg = [0] * 3 + [-4] * 6 + [-2] * 4
        return BellFunctional.from_paper_matrix(_displayed(marg, marg, _rows(_YUOH_ETA_ROWS)), 4, name)
    raise KeyError(name)


def ch_functional() -> BellFunctional:
    """Clauser-Horne functional with local bound 0."""
    return BellFunctional(2, [[1, 1], [1, -1]], [-1, 0], [-1, 0], 0, "ch")


KS18_NAMES = ("ks18_graph", "ks18_v", "ks18_eta", "ks18_tight")
YUOH_NAMES = ("yuoh_graph", "yuoh_v_tight", "yuoh_eta_tight")
NAMES = KS18_NAMES + YUOH_NAMES + ("ch",)

# which ray set each named functional belongs to
SET_OF = {**{n: "ks18" for n in KS18_NAMES}, **{n: "yu-oh" for n in YUOH_NAMES}}


def get_functional(name: str) -> BellFunctional:
    """Built-in functional with its bound as published.

    Callers that need a guarantee should recompute the bound with
    ``local_bound_exact``; the test suite does.
    """
    key = name.lower().replace("-", "_")
    if key in _KS18_VALUES:
        return ks18_functional(_KS18_VALUES[key], _KS18_BOUNDS[key], key)
    if key in YUOH_NAMES:
        return _yuoh(key)
    if key == "ch":
        return ch_functional()
    raise KeyError(f"unknown functional {name!r}; known: {', '.join(NAMES)}")
