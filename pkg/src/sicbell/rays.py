"""Ray catalogs, compatibility graphs and contextuality checks.

Rays are stored as unnormalised integer vectors.  Two rays are compatible
(adjacent in the compatibility graph) when their integer dot product is zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .exact import psd_check


class UnknownSetError(KeyError):
    pass


class NoIsomorphismError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Ray:
    components: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(int(c) for c in self.components))
        if not self.components:
            raise ValueError("a ray needs at least one component")
        if not any(self.components):
            raise ValueError("the zero vector is not a ray")

    @property
    def dim(self) -> int:
        return len(self.components)

    def dot(self, other: "Ray") -> int:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimensions {self.dim} and {other.dim}")
        return sum(a * b for a, b in zip(self.components, other.components))

    @property
    def norm2(self) -> int:
        return self.dot(self)

    def projector(self) -> list[list[Fraction]]:
        """Rank-one projector v v^T / |v|^2 with exact rational entries."""
        n2 = self.norm2
        v = self.components
        return [[Fraction(a * b, n2) for b in v] for a in v]

    def is_parallel(self, other: "Ray") -> bool:
        return self.dot(other) ** 2 == self.norm2 * other.norm2


@dataclass(frozen=True)
class RaySet:
    name: str
    dim: int
    rays: tuple[Ray, ...]

    def __post_init__(self):
        rays = tuple(r if isinstance(r, Ray) else Ray(r) for r in self.rays)
        object.__setattr__(self, "rays", rays)
        for r in rays:
            if r.dim != self.dim:
                raise DimensionMismatchError(f"ray {r.components} is not in dimension {self.dim}")
        for i, j in itertools.combinations(range(len(rays)), 2):
            if rays[i].is_parallel(rays[j]):
                raise ValueError(f"rays {i + 1} and {j + 1} are parallel")

    @property
    def n(self) -> int:
        return len(self.rays)

    def squared_overlap(self, i: int, j: int) -> Fraction:
        """|<v_i|v_j>|^2 for the normalised rays (0-based indices)."""
        a, b = self.rays[i], self.rays[j]
        return Fraction(a.dot(b) ** 2, a.norm2 * b.norm2)

    def permuted(self, order: Sequence[int]) -> "RaySet":
        """New ray set whose ray k is ray ``order[k]`` of this one."""
        return RaySet(self.name, self.dim, tuple(self.rays[i] for i in order))

    def scaled(self, factors: Sequence[int]) -> "RaySet":
        return RaySet(self.name, self.dim,
                      tuple(Ray(tuple(f * c for c in r.components)) for r, f in zip(self.rays, factors)))


@dataclass(frozen=True)
class CompatGraph:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            i, j = tuple(e)
            if i == j:
                raise ValueError("self-loops are not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge {e} out of range")
            norm.add(frozenset((i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def adjacent(self, i: int, j: int) -> bool:
        return frozenset((i, j)) in self.edges

    def neighbours(self, i: int) -> set[int]:
        return {j for e in self.edges if i in e for j in e if j != i}

    def adjacency(self) -> list[list[bool]]:
        adj = [[False] * self.n for _ in range(self.n)]
        for e in self.edges:
            i, j = tuple(e)
            adj[i][j] = adj[j][i] = True
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for e in self.edges:
            for v in e:
                deg[v] += 1
        return deg

    def non_edges(self) -> list[frozenset]:
        return [frozenset((i, j)) for i, j in itertools.combinations(range(self.n), 2)
                if frozenset((i, j)) not in self.edges]

    def complement(self) -> "CompatGraph":
        return CompatGraph(self.n, frozenset(self.non_edges()))

    def relabeled(self, perm: Sequence[int]) -> "CompatGraph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        return CompatGraph(self.n, frozenset(frozenset(perm[v] for v in e) for e in self.edges))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(e)) for e in self.edges)


@dataclass(frozen=True)
class KsAssignment:
    bits: tuple[int, ...]


@dataclass(frozen=True)
class SicCertificate:
    weights: tuple[Fraction, ...]
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        object.__setattr__(self, "y", Fraction(self.y))
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if not (0 <= self.y < 1):
            raise ValueError("y must lie in [0, 1)")


@dataclass
class SicReport:
    ok: bool
    max_independent_set: tuple[int, ...]
    max_independent_weight: Fraction
    independence_ok: bool
    operator_ok: bool
    # LDL pivots when PSD, otherwise a vector x with x^T (sum w P - 1) x < 0
    psd_witness: list[Fraction]

    def __bool__(self):
        return self.ok


# --------------------------------------------------------------------------- #
# Built-in catalogs.  Order fixes the labels v1..vn used by every coefficient
# matrix shipped with the package.

_YU_OH = [
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (0, 1, 1), (0, 1, -1), (1, 0, 1), (1, 0, -1), (1, 1, 0), (1, -1, 0),
    (1, 1, 1), (-1, 1, 1), (1, -1, 1), (1, 1, -1),
]

# 18 vectors of the nine-basis construction, each vector in exactly two bases.
_KS18 = [
    (0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0),
    (1, 1, 1, -1), (-1, 1, 1, 1), (1, 1, -1, 1),
    (1, -1, 1, -1), (1, 1, 1, 1), (1, -1, -1, 1),
    (1, 0, 0, -1), (1, 0, 0, 1), (0, 1, -1, 0),
    (1, 0, 1, 0), (0, 1, 0, -1), (1, 0, -1, 0),
    (1, 1, 0, 0), (1, -1, 0, 0), (0, 0, 1, 1),
]

# Labelled structure the catalogs must reproduce (1-based vertex labels).
KS18_BASES = [
    (1, 2, 16, 17), (4, 5, 11, 12), (7, 8, 14, 15),
    (1, 3, 13, 15), (2, 3, 10, 11), (4, 6, 17, 18),
    (5, 6, 13, 14), (7, 9, 16, 18), (8, 9, 10, 12),
]
KS18_EXTRA_EDGES = [(1, 12), (2, 14), (3, 18), (4, 15), (5, 16), (6, 10), (7, 11), (8, 17), (9, 13)]

YU_OH_EDGES = {
    "A": [(1, 2), (2, 3), (1, 3)],
    "B": [(4, 5), (6, 7), (8, 9)],
    # listed with v3v8 twice; the second one is v3v9
    "C": [(1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9)],
    "D": [(4, 12), (4, 13), (5, 10), (5, 11), (6, 11), (6, 13), (7, 10), (7, 12),
          (8, 11), (8, 12), (9, 10), (9, 13)],
}

CATALOG_NAMES = ("ks18", "yu-oh")


def _canon(name: str) -> str:
    key = name.lower().replace("_", "-")
    if key in ("yuoh", "yu-oh"):
        return "yu-oh"
    if key in ("ks18", "ks-18"):
        return "ks18"
    raise UnknownSetError(name)


def build_rayset(name: str) -> RaySet:
    key = _canon(name)
    if key == "yu-oh":
        return RaySet("yu-oh", 3, tuple(Ray(v) for v in _YU_OH))
    return RaySet("ks18", 4, tuple(Ray(v) for v in _KS18))


def expected_structure(name: str) -> CompatGraph:
    """The labelled compatibility graph the named catalog must realise."""
    key = _canon(name)
    edges = set()
    if key == "ks18":
        for basis in KS18_BASES:
            for u, v in itertools.combinations(basis, 2):
                edges.add(frozenset((u - 1, v - 1)))
        for u, v in KS18_EXTRA_EDGES:
            edges.add(frozenset((u - 1, v - 1)))
        return CompatGraph(18, frozenset(edges))
    for group in YU_OH_EDGES.values():
        for u, v in group:
            edges.add(frozenset((u - 1, v - 1)))
    return CompatGraph(13, frozenset(edges))


def compatibility_graph(rs: RaySet) -> CompatGraph:
    edges = frozenset(frozenset((i, j)) for i, j in itertools.combinations(range(rs.n), 2)
                      if rs.rays[i].dot(rs.rays[j]) == 0)
    return CompatGraph(rs.n, edges)


def graph_isomorphisms(g: CompatGraph, h: CompatGraph) -> Iterator[list[int]]:
    """All bijections ``p`` with ``{i,j}`` an edge of g iff ``{p[i],p[j]}`` an edge of h."""
    if g.n != h.n or len(g.edges) != len(h.edges):
        return
    n = g.n
    ag, ah = g.adjacency(), h.adjacency()
    dg, dh = g.degrees(), h.degrees()
    if sorted(dg) != sorted(dh):
        return
    # most constrained vertices first
    order = sorted(range(n), key=lambda v: -dg[v])
    image = [-1] * n
    used = [False] * n

    def extend(k):
        if k == n:
            yield list(image)
            return
        v = order[k]
        for t in range(n):
            if used[t] or dh[t] != dg[v]:
                continue
            if all(ag[v][order[j]] == ah[t][image[order[j]]] for j in range(k)):
                image[v] = t
                used[t] = True
                yield from extend(k + 1)
                used[t] = False
                image[v] = -1

    yield from extend(0)


def verify_labeling(g: CompatGraph, expected: CompatGraph) -> list[int]:
    """First vertex map sending ``g`` onto the labelled structure ``expected``.

    Raises NoIsomorphismError when the two graphs are not isomorphic.
    """
    for perm in graph_isomorphisms(g, expected):
        return perm
    raise NoIsomorphismError(f"no isomorphism between graphs on {g.n} and {expected.n} vertices")


def maximal_cliques_of_size(g: CompatGraph, d: int) -> list[tuple[int, ...]]:
    """All d-cliques of g (a d-clique is maximal when d is the dimension)."""
    adj = g.adjacency()
    out = []

    def grow(clique, candidates):
        if len(clique) == d:
            out.append(tuple(clique))
            return
        for idx, v in enumerate(candidates):
            grow(clique + [v], [u for u in candidates[idx + 1:] if adj[v][u]])

    grow([], list(range(g.n)))
    return out


def ks_assignments(g: CompatGraph, d: int) -> Iterator[KsAssignment]:
    """Every 0/1 assignment with no adjacent pair of ones and exactly one 1 per d-clique."""
    bases = maximal_cliques_of_size(g, d)
    if not bases:
        raise ValueError(f"graph has no clique of size {d}")
    adj = g.adjacency()
    n = g.n
    bits = [-1] * n
    bases_of = [[b for b in bases if v in b] for v in range(n)]

    def consistent(v):
        if bits[v] == 1 and any(adj[v][u] and bits[u] == 1 for u in range(n)):
            return False
        for b in bases_of[v]:
            vals = [bits[u] for u in b]
            if vals.count(1) > 1:
                return False
            if -1 not in vals and vals.count(1) != 1:
                return False
        return True

    def search(v):
        if v == n:
            yield KsAssignment(tuple(bits))
            return
        for val in (0, 1):
            bits[v] = val
            if consistent(v):
                yield from search(v + 1)
        bits[v] = -1

    yield from search(0)


def is_ks_assignment(g: CompatGraph, d: int, bits: Sequence[int]) -> bool:
    if len(bits) != g.n or any(b not in (0, 1) for b in bits):
        return False
    for e in g.edges:
        i, j = tuple(e)
        if bits[i] and bits[j]:
            return False
    return all(sum(bits[v] for v in b) == 1 for b in maximal_cliques_of_size(g, d))


def ks_colorable(g: CompatGraph, d: int) -> KsAssignment | None:
    return next(ks_assignments(g, d), None)


def independent_sets(g: CompatGraph) -> Iterator[tuple[int, ...]]:
    adj = g.adjacency()

    def grow(current, start):
        yield tuple(current)
        for v in range(start, g.n):
            if not any(adj[v][u] for u in current):
                current.append(v)
                yield from grow(current, v + 1)
                current.pop()

    yield from grow([], 0)


def max_weight_independent_set(g: CompatGraph, weights: Sequence[Fraction]) -> tuple[tuple[int, ...], Fraction]:
    best, best_w = (), Fraction(0)
    for s in independent_sets(g):
        w = sum((Fraction(weights[v]) for v in s), Fraction(0))
        if w > best_w:
            best, best_w = s, w
    return best, best_w


def independence_number(g: CompatGraph) -> int:
    return max(len(s) for s in independent_sets(g))


def weighted_projector_sum(rs: RaySet, weights: Sequence[Fraction]) -> list[list[Fraction]]:
    d = rs.dim
    total = [[Fraction(0)] * d for _ in range(d)]
    for r, w in zip(rs.rays, weights):
        P = r.projector()
        for i in range(d):
            for j in range(d):
                total[i][j] += Fraction(w) * P[i][j]
    return total


def check_sic_certificate(rs: RaySet, cert: SicCertificate) -> SicReport:
    if len(cert.weights) != rs.n:
        raise DimensionMismatchError(f"{len(cert.weights)} weights for {rs.n} rays")
    g = compatibility_graph(rs)
    best, best_w = max_weight_independent_set(g, cert.weights)
    independence_ok = best_w <= cert.y
    M = weighted_projector_sum(rs, cert.weights)
    for i in range(rs.dim):
        M[i][i] -= 1
    operator_ok, witness = psd_check(M)
    return SicReport(independence_ok and operator_ok, best, best_w, independence_ok, operator_ok, witness)


def find_uniform_certificate(rs: RaySet, max_denominator: int = 100) -> SicCertificate | None:
    """Search uniform weights w (rationals with bounded denominator) for a valid certificate.

    With uniform weights the independence condition reads alpha(G) * w <= y < 1
    and the operator condition w * sum(P_i) >= 1.
    """
    g = compatibility_graph(rs)
    alpha = independence_number(g)
    candidates = sorted({Fraction(p, q) for q in range(1, max_denominator + 1)
                         for p in range(1, q) if Fraction(p, q) * alpha < 1})
    for w in candidates:
        cert = SicCertificate((w,) * rs.n, w * alpha)
        if check_sic_certificate(rs, cert):
            return cert
    return None


def ray_classes(rs: RaySet) -> list[tuple[int, ...]]:
    """Class label per ray: its sorted absolute components after removing the common factor."""
    out = []
    for r in rs.rays:
        g = 0
        for c in r.components:
            g = math.gcd(g, abs(c))
        out.append(tuple(sorted(abs(c) // g for c in r.components)))
    return out


def find_class_certificate(rs: RaySet, max_denominator: int = 1000) -> SicCertificate | None:
    """Smallest-y certificate with one weight per ray class, found by LP and re-checked exactly.

    When every class is closed under signed coordinate permutations its projector
    sum is a multiple of the identity, so the operator condition becomes linear.
    Returns ``None`` when the LP has no y < 1 or the rounded weights fail the check.
    """
    import numpy as np
    from scipy.optimize import linprog

    labels = ray_classes(rs)
    kinds = sorted(set(labels))
    idx = [kinds.index(c) for c in labels]
    size = [idx.count(k) for k in range(len(kinds))]
    g = compatibility_graph(rs)
    rows = []
    for s in independent_sets(g):
        row = [0.0] * (len(kinds) + 1)
        for v in s:
            row[idx[v]] += 1
        row[-1] = -1.0
        rows.append(row)
    rows.append([-size[k] / rs.dim for k in range(len(kinds))] + [0.0])
    rhs = [0.0] * (len(rows) - 1) + [-1.0]
    c = [0.0] * len(kinds) + [1.0]
    res = linprog(c, A_ub=np.array(rows), b_ub=rhs, bounds=[(0, None)] * (len(kinds) + 1), method="highs")
    if res.status != 0 or res.x[-1] >= 1:
        return None
    per_kind = [Fraction(float(x)).limit_denominator(max_denominator) for x in res.x[:-1]]
    weights = tuple(per_kind[k] for k in idx)
    _, y = max_weight_independent_set(g, weights)
    if y >= 1:
        return None
    cert = SicCertificate(weights, y)
    return cert if check_sic_certificate(rs, cert) else None


# --------------------------------------------------------------------------- #
# Text format: header "dim d n" then one ray per line.

def dumps_rayset(rs: RaySet) -> str:
    lines = [f"dim {rs.dim} {rs.n}"]
    lines += [" ".join(str(c) for c in r.components) for r in rs.rays]
    return "\n".join(lines) + "\n"


def loads_rayset(text: str, name: str = "custom") -> RaySet:
    from .io import SchemaError

    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise SchemaError("empty ray file", line=1)
    head = lines[0].split()
    if len(head) != 3 or head[0] != "dim":
        raise SchemaError("header must read 'dim d n'", line=1)
    try:
        d, n = int(head[1]), int(head[2])
    except ValueError as exc:
        raise SchemaError("header must read 'dim d n'", line=1) from exc
    if len(lines) - 1 != n:
        raise SchemaError(f"expected {n} rays, found {len(lines) - 1}", line=len(lines))
    rays = []
    for k, ln in enumerate(lines[1:], start=2):
        try:
            comps = tuple(int(x) for x in ln.split())
        except ValueError as exc:
            raise SchemaError(f"non-integer component in {ln!r}", line=k) from exc
        if len(comps) != d:
            raise SchemaError(f"ray has {len(comps)} components, expected {d}", line=k)
        try:
            rays.append(Ray(comps))
        except ValueError as exc:
            raise SchemaError(str(exc), line=k) from exc
    try:
        return RaySet(name, d, tuple(rays))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
