"""Slow, obviously-correct reference implementations used to freeze expected values.

Nothing here imports the package's algorithms; inputs are plain lists.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import sympy


def brute_local_bound(joint, marg_a, marg_b):
    """Max over all 2^(2m) deterministic strategies, in exact arithmetic."""
    m = len(marg_a)
    best = None
    for a in itertools.product((0, 1), repeat=m):
        for b in itertools.product((0, 1), repeat=m):
            v = sum(Fraction(joint[x][y]) for x in range(m) for y in range(m) if a[x] and b[y])
            v += sum(Fraction(marg_a[x]) for x in range(m) if a[x])
            v += sum(Fraction(marg_b[y]) for y in range(m) if b[y])
            if best is None or v > best:
                best = v
    return best


def brute_saturating(joint, marg_a, marg_b, bound):
    m = len(marg_a)
    out = []
    for a in itertools.product((0, 1), repeat=m):
        for b in itertools.product((0, 1), repeat=m):
            v = sum(Fraction(joint[x][y]) for x in range(m) for y in range(m) if a[x] and b[y])
            v += sum(Fraction(marg_a[x]) for x in range(m) if a[x])
            v += sum(Fraction(marg_b[y]) for y in range(m) if b[y])
            if v == bound:
                out.append((a, b))
    return out


def cg_point(a, b):
    m = len(a)
    return [a[x] * b[y] for x in range(m) for y in range(m)] + list(a) + list(b)


def sympy_affine_rank(points):
    """Rank of the homogeneous embedding [p, 1]."""
    if not points:
        return 0
    return sympy.Matrix([list(p) + [1] for p in points]).rank()


def brute_independence_number(n, edges):
    edges = {frozenset(e) for e in edges}
    for k in range(n, 0, -1):
        for s in itertools.combinations(range(n), k):
            if all(frozenset(p) not in edges for p in itertools.combinations(s, 2)):
                return k
    return 0


def binary_entropy(p):
    import math

    if p in (0, 1):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)
