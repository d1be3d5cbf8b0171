"""Automorphism groups and orbit partitions of compatibility graphs.

Automorphisms are found by individualisation and colour refinement; the
group order comes from a stabiliser chain.  Edge and non-edge orbits are the
orbits of the induced action on unordered pairs.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .polytope import BellFunctional, DimensionMismatchError
from .rays import CompatGraph

DEFAULT_LIMIT = 64


class GraphTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError("images must be a permutation of 0..n-1")

    def __call__(self, i: int) -> int:
        return self.images[i]

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other."""
        return Permutation(tuple(self.images[other.images[i]] for i in range(len(self.images))))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def one_based(self) -> list[int]:
        return [i + 1 for i in self.images]


def is_automorphism(g: CompatGraph, p: Permutation) -> bool:
    return all(frozenset(p(i) for i in e) in g.edges for e in g.edges)


# --------------------------------------------------------------------------- #
# Refinement

def _refine_pair(adj, ca: list, cb: list):
    """Refine two colourings in lockstep; None when they stop being compatible."""
    n = len(adj)
    while True:
        sa = [(ca[v], tuple(sorted(ca[u] for u in adj[v]))) for v in range(n)]
        sb = [(cb[v], tuple(sorted(cb[u] for u in adj[v]))) for v in range(n)]
        if Counter(sa) != Counter(sb):
            return None
        ids = {s: k for k, s in enumerate(sorted(set(sa)))}
        na = [ids[s] for s in sa]
        nb = [ids[s] for s in sb]
        if len(ids) == len(set(ca)):
            return na, nb
        ca, cb = na, nb


def _extend(adj, edges, src: list[int], dst: list[int]) -> Permutation | None:
    """An automorphism mapping src[k] -> dst[k] for all k, if one exists."""
    n = len(adj)
    ca = [0] * n
    cb = [0] * n
    for k, (u, v) in enumerate(zip(src, dst)):
        ca[u] = k + 1
        cb[v] = k + 1
    ref = _refine_pair(adj, ca, cb)
    if ref is None:
        return None
    ca, cb = ref
    classes = Counter(ca)
    if all(c == 1 for c in classes.values()):
        where = {c: v for v, c in enumerate(cb)}
        p = Permutation(tuple(where[ca[u]] for u in range(n)))
        return p if all(frozenset(p(i) for i in e) in edges for e in edges) else None
    # branch on the first vertex of the smallest non-singleton class
    target = min((c for c, k in classes.items() if k > 1), key=lambda c: (classes[c], c))
    u = next(v for v in range(n) if ca[v] == target)
    for w in (v for v in range(n) if cb[v] == target):
        found = _extend(adj, edges, src + [u], dst + [w])
        if found is not None:
            return found
    return None


@dataclass
class AutomorphismGroup:
    n: int
    generators: list[Permutation]
    order: int
    base: list[int] = field(default_factory=list)


def automorphisms(g: CompatGraph, limit: int = DEFAULT_LIMIT) -> AutomorphismGroup:
    """Strong generating set and exact order of Aut(g)."""
    if g.n > limit:
        raise GraphTooLargeError(f"{g.n} vertices exceeds the limit {limit}")
    n = g.n
    adj = [sorted(g.neighbours(v)) for v in range(n)]
    gens: list[Permutation] = []
    order = 1
    fixed: list[int] = []
    base = []
    for b in range(n):
        # orbit of b under the pointwise stabiliser of ``fixed``
        orbit = {b}
        level_gens: list[Permutation] = []
        for w in range(n):
            if w in orbit:
                continue
            p = _extend(adj, g.edges, fixed + [b], fixed + [w])
            if p is None:
                continue
            level_gens.append(p)
            # close the orbit under what we know so far
            frontier = [w]
            orbit.add(w)
            while frontier:
                x = frontier.pop()
                for q in level_gens:
                    y = q(x)
                    if y not in orbit:
                        orbit.add(y)
                        frontier.append(y)
        if len(orbit) > 1:
            base.append(b)
        order *= len(orbit)
        gens.extend(level_gens)
        fixed.append(b)
    return AutomorphismGroup(n, gens, order, base)


# --------------------------------------------------------------------------- #
# Orbits

def _orbits(items: list, act) -> list[list]:
    index = {x: i for i, x in enumerate(items)}
    parent = list(range(len(items)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, x in enumerate(items):
        for y in act(x):
            a, b = find(i), find(index[y])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list] = {}
    for i, x in enumerate(items):
        groups.setdefault(find(i), []).append(x)
    return sorted(groups.values(), key=lambda grp: items.index(grp[0]))


@dataclass
class OrbitPartition:
    n: int
    vertex_orbits: list[list[int]]
    edge_orbits: list[list[tuple[int, int]]]
    non_edge_orbits: list[list[tuple[int, int]]]
    vertex_names: list[str] = field(default_factory=list)
    edge_names: list[str] = field(default_factory=list)
    non_edge_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.vertex_names:
            self.vertex_names = [f"v{k + 1}" for k in range(len(self.vertex_orbits))]
        if not self.edge_names:
            self.edge_names = [f"E{k + 1}" for k in range(len(self.edge_orbits))]
        if not self.non_edge_names:
            self.non_edge_names = [f"N{k + 1}" for k in range(len(self.non_edge_orbits))]

    def vertex_letter(self, v: int) -> str:
        for name, orb in zip(self.vertex_names, self.vertex_orbits):
            if v in orb:
                return name
        raise KeyError(v)

    def diagonal_letter(self, v: int) -> str:
        return self.vertex_letter(v) * 2

    def pair_letter(self, x: int, y: int) -> str:
        key = (min(x, y), max(x, y))
        for name, orb in itertools.chain(zip(self.edge_names, self.edge_orbits),
                                         zip(self.non_edge_names, self.non_edge_orbits)):
            if key in orb:
                return name
        raise KeyError(key)

    def sizes(self) -> dict[str, list[int]]:
        return {"vertex": [len(o) for o in self.vertex_orbits],
                "edge": [len(o) for o in self.edge_orbits],
                "non_edge": [len(o) for o in self.non_edge_orbits]}

    def letters(self) -> list[str]:
        return (list(self.vertex_names) + [x * 2 for x in self.vertex_names]
                + list(self.edge_names) + list(self.non_edge_names))

    def renamed(self, vertex_names, edge_names, non_edge_names) -> "OrbitPartition":
        return OrbitPartition(self.n, self.vertex_orbits, self.edge_orbits, self.non_edge_orbits,
                              list(vertex_names), list(edge_names), list(non_edge_names))


def _pair(i, j):
    return (min(i, j), max(i, j))


def orbit_partition(g: CompatGraph, group: AutomorphismGroup | None = None,
                    limit: int = DEFAULT_LIMIT) -> OrbitPartition:
    group = group or automorphisms(g, limit)
    gens = group.generators
    n = g.n
    vertices = list(range(n))
    edges = sorted(_pair(*tuple(e)) for e in g.edges)
    non_edges = [p for p in itertools.combinations(range(n), 2) if frozenset(p) not in g.edges]
    vo = _orbits(vertices, lambda v: [p(v) for p in gens])
    eo = _orbits(edges, lambda e: [_pair(p(e[0]), p(e[1])) for p in gens])
    no = _orbits(non_edges, lambda e: [_pair(p(e[0]), p(e[1])) for p in gens])
    return OrbitPartition(n, vo, eo, no)


def line_graph(g: CompatGraph) -> tuple[CompatGraph, list[tuple[int, int]]]:
    """Line graph of g with the edge list giving its vertex labels."""
    edges = sorted(_pair(*tuple(e)) for e in g.edges)
    adj = set()
    for a, b in itertools.combinations(range(len(edges)), 2):
        if set(edges[a]) & set(edges[b]):
            adj.add(frozenset((a, b)))
    return CompatGraph(len(edges), frozenset(adj)), edges


def line_graph_orbits(g: CompatGraph, complement: bool = False, limit: int = 256) -> list[list[tuple[int, int]]]:
    """Pair orbits read off Aut(L(g)) (or Aut(L(complement of g))), as a cross-check."""
    base = g
    if complement:
        base = CompatGraph(g.n, frozenset(frozenset(p) for p in itertools.combinations(range(g.n), 2)
                                          if frozenset(p) not in g.edges))
    lg, labels = line_graph(base)
    part = orbit_partition(lg, automorphisms(lg, limit))
    return [[labels[i] for i in orb] for orb in part.vertex_orbits]


# --------------------------------------------------------------------------- #
# Published orbit names for the built-in labelled graphs (1-based representatives)

NAMED_REPRESENTATIVES = {
    "ks18": {
        "vertex": {"a": 1},
        "edge": {"A": (1, 2), "B": (1, 13), "C": (1, 12)},
        "non_edge": {"alpha": (1, 6), "beta": (1, 4), "gamma": (1, 10)},
    },
    "yu-oh": {
        "vertex": {"a": 1, "b": 4, "c": 10},
        "edge": {"A": (1, 2), "B": (4, 5), "C": (1, 4), "D": (4, 12)},
        "non_edge": {"alpha": (1, 6), "beta": (4, 6), "gamma": (10, 11), "delta": (4, 10), "epsilon": (1, 10)},
    },
}


def name_orbits(p: OrbitPartition, set_name: str) -> OrbitPartition:
    reps = NAMED_REPRESENTATIVES[set_name]

    def names(orbits, table, key):
        out = []
        for orb in orbits:
            hit = [nm for nm, r in table.items() if key(r) in orb]
            if len(hit) != 1:
                raise ValueError(f"orbit {orb[:3]}... does not match exactly one named representative")
            out.append(hit[0])
        return out

    vn = names(p.vertex_orbits, reps["vertex"], lambda r: r - 1)
    en = names(p.edge_orbits, reps["edge"], lambda r: (r[0] - 1, r[1] - 1))
    nn = names(p.non_edge_orbits, reps["non_edge"], lambda r: (r[0] - 1, r[1] - 1))
    return p.renamed(vn, en, nn)


# --------------------------------------------------------------------------- #
# Functionals

@dataclass
class OrbitCheck:
    ok: bool
    letters: dict[str, Fraction]
    # first offending cells and their conflicting values when not ok
    violation: tuple | None = None

    def describe(self) -> str:
        if self.ok:
            return ", ".join(f"{k}={v}" for k, v in self.letters.items())
        return str(self.violation)


def functional_respects_orbits(f: BellFunctional, p: OrbitPartition) -> OrbitCheck:
    """Letter values when the coefficients are constant on every orbit.

    Marginals of both parties share the vertex-orbit letter, the diagonal gets
    the doubled letter, and off-diagonal cells take their pair orbit's letter
    (which also forces the joint block to be symmetric).
    """
    if f.m != p.n:
        raise DimensionMismatchError(f"functional has m={f.m}, graph has n={p.n}")
    seen: dict[str, tuple[Fraction, str]] = {}

    def put(letter, value, where):
        if letter in seen and seen[letter][0] != value:
            return (letter, seen[letter], (value, where))
        seen.setdefault(letter, (value, where))
        return None

    cells = []
    for x in range(f.m):
        cells.append((p.vertex_letter(x), f.marg_a[x], f"marg_a[{x + 1}]"))
    for y in range(f.m):
        cells.append((p.vertex_letter(y), f.marg_b[y], f"marg_b[{y + 1}]"))
    for x in range(f.m):
        for y in range(f.m):
            letter = p.diagonal_letter(x) if x == y else p.pair_letter(x, y)
            cells.append((letter, f.joint[x][y], f"joint[{x + 1}][{y + 1}]"))
    for letter, value, where in cells:
        bad = put(letter, value, where)
        if bad:
            return OrbitCheck(False, {k: v for k, (v, _) in seen.items()}, bad)
    order = p.letters()
    return OrbitCheck(True, {k: seen[k][0] for k in order if k in seen})


def permute_behavior_coordinates(coords: Sequence, m: int, perm: Permutation) -> list:
    """CG coordinates after relabelling both parties' settings by ``perm``."""
    out = list(coords)
    for x in range(m):
        for y in range(m):
            out[perm(x) * m + perm(y)] = coords[x * m + y]
    for x in range(m):
        out[m * m + perm(x)] = coords[m * m + x]
        out[m * m + m + perm(x)] = coords[m * m + m + x]
    return out
