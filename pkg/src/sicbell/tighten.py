"""Templates of tied coefficients and the small-integer facet search."""

from __future__ import annotations

import itertools
import math
import os
import re
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .polytope import (BellFunctional, TightnessCertificate, cg_dimension, check_tightness, InconclusiveError, iter_saturating_blocks,
                       local_bound_exact, saturating_vertices, zero_component_probe_blocks)
from .symmetry import OrbitPartition

ZERO = "0"  # reserved letter: the cell is fixed to zero
_KEY = re.compile(r"^(joint\[(\d+)\]\[(\d+)\]|marg_a\[(\d+)\]|marg_b\[(\d+)\])$")


class BudgetExhaustedError(RuntimeError):
    def __init__(self, message: str, near_misses=()):
        super().__init__(message)
        self.near_misses = list(near_misses)


def _positions(m: int) -> list[tuple]:
    return ([("joint", x, y) for x in range(m) for y in range(m)]
            + [("a", x) for x in range(m)] + [("b", y) for y in range(m)])


def position_key(pos: tuple) -> str:
    if pos[0] == "joint":
        return f"joint[{pos[1] + 1}][{pos[2] + 1}]"
    return f"marg_{pos[0]}[{pos[1] + 1}]"


def parse_position_key(key: str) -> tuple:
    mt = _KEY.match(key)
    if not mt:
        raise ValueError(f"bad cell key {key!r}")
    if mt.group(2):
        return ("joint", int(mt.group(2)) - 1, int(mt.group(3)) - 1)
    if mt.group(4):
        return ("a", int(mt.group(4)) - 1)
    return ("b", int(mt.group(5)) - 1)


@dataclass(frozen=True)
class Template:
    """Every CG coefficient position mapped to a letter (or the fixed-zero letter)."""

    m: int
    cells: tuple[tuple[tuple, str], ...]
    letters: tuple[str, ...]
    # representative value of each letter, when the template came from numbers
    values: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(sorted(dict(self.cells).items(), key=lambda kv: _positions(self.m).index(kv[0]))))
        object.__setattr__(self, "letters", tuple(self.letters))
        got = [pos for pos, _ in self.cells]
        if sorted(got) != sorted(_positions(self.m)):
            raise ValueError("template must cover every coefficient position exactly once")
        used = {letter for _, letter in self.cells} - {ZERO}
        if used - set(self.letters):
            raise ValueError(f"cells use undeclared letters {sorted(used - set(self.letters))}")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError("duplicate letters")

    @classmethod
    def from_keys(cls, m: int, cells: Mapping[str, str], letters: Sequence[str]) -> "Template":
        return cls(m, tuple((parse_position_key(k), v) for k, v in cells.items()), tuple(letters))

    def cells_as_keys(self) -> dict[str, str]:
        return {position_key(pos): letter for pos, letter in self.cells}

    def cell_map(self) -> dict[tuple, str]:
        return dict(self.cells)

    def value_map(self) -> dict[str, Fraction]:
        return dict(self.values)

    def instantiate(self, assignment: Mapping[str, Fraction], name: str = "") -> BellFunctional:
        m = self.m
        cm = self.cell_map()

        def val(pos):
            letter = cm[pos]
            return Fraction(0) if letter == ZERO else Fraction(assignment[letter])

        joint = [[val(("joint", x, y)) for y in range(m)] for x in range(m)]
        return BellFunctional(m, joint, [val(("a", x)) for x in range(m)], [val(("b", y)) for y in range(m)],
                              None, name)

    def renamed(self, mapping: Mapping[str, str]) -> "Template":
        return Template(self.m, tuple((pos, mapping.get(l, l)) for pos, l in self.cells),
                        tuple(mapping.get(l, l) for l in self.letters),
                        tuple((mapping.get(l, l), v) for l, v in self.values))


def template_from_orbits(p: OrbitPartition, with_marginals: bool = True) -> Template:
    m = p.n
    cells = []
    letters: list[str] = []

    def use(letter):
        if letter not in letters:
            letters.append(letter)
        return letter

    for x in range(m):
        for y in range(m):
            cells.append((("joint", x, y), use(p.diagonal_letter(x) if x == y else p.pair_letter(x, y))))
    for side in ("a", "b"):
        for x in range(m):
            cells.append(((side, x), use(p.vertex_letter(x)) if with_marginals else ZERO))
    order = [l for l in p.letters() if l in letters]
    return Template(m, tuple(cells), tuple(order))


def _letter_names(count: int) -> list[str]:
    base = string.ascii_lowercase
    if count <= len(base):
        return list(base[:count])
    return [f"l{i + 1}" for i in range(count)]


def template_from_witness(f: BellFunctional, tolerance: float = 0.02) -> Template:
    """Cluster coefficients whose values differ by at most ``tolerance`` times the largest magnitude."""
    coords = f.coordinates()
    top = max((abs(v) for v in coords), default=Fraction(0))
    tol = Fraction(tolerance).limit_denominator(10**9) * top
    order = sorted(set(coords))
    clusters: list[list[Fraction]] = []
    for v in order:
        if clusters and v - clusters[-1][-1] <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    names = _letter_names(len(clusters))
    rep = {}
    value_of = {}
    for name, cl in zip(names, clusters):
        # a cluster that reaches zero represents zero exactly
        mean = sum(cl, Fraction(0)) / len(cl)
        value_of[name] = Fraction(0) if min(cl) <= 0 <= max(cl) else mean
        for v in cl:
            rep[v] = name
    cells = tuple((pos, rep[v]) for pos, v in zip(_positions(f.m), coords))
    return Template(f.m, cells, tuple(names), tuple(value_of.items()))


def default_signs(t: Template) -> dict[str, int]:
    vals = t.value_map()
    if not vals:
        return {l: 0 for l in t.letters}  # no information: caller must supply
    return {l: (vals[l] > 0) - (vals[l] < 0) for l in t.letters}


def parse_signs(spec: str, letters: Sequence[str]) -> dict[str, int]:
    """``"a:+,b:-,c:0"`` or a string of +/-/0/* characters in letter order (``*`` allows both signs)."""
    table = {"+": 1, "-": -1, "0": 0, "*": 2}
    spec = spec.strip()
    if ":" in spec:
        out = {}
        for part in spec.split(","):
            k, v = part.split(":")
            if v.strip() not in table:
                raise ValueError(f"bad sign {v!r}")
            out[k.strip()] = table[v.strip()]
        missing = set(letters) - set(out)
        if missing:
            raise ValueError(f"no sign for letters {sorted(missing)}")
        return out
    if len(spec) != len(letters) or any(ch not in table for ch in spec):
        raise ValueError("sign string must have one of +-0* per letter")
    return {l: table[ch] for l, ch in zip(letters, spec)}


@dataclass
class SearchHit:
    assignment: dict[str, int]
    functional: BellFunctional
    certificate: TightnessCertificate
    saturating_count: int

    def key(self):
        return (-self.saturating_count, tuple(self.assignment.values()))


@dataclass
class NearMiss:
    assignment: dict[str, int]
    affine_rank: int | None  # None: rejected before the rank check
    saturating_count: int
    # coordinates vanishing (or constant) on the whole saturating set
    zero_components: list[int] = field(default_factory=list)


def _ranges(signs: Mapping[str, int], letters: Sequence[str], k: int) -> list[range]:
    out = []
    for l in letters:
        s = signs[l]
        if s == 2:
            out.append(range(-k, k + 1))
        elif s == 1:
            out.append(range(0, k + 1))
        elif s == -1:
            out.append(range(-k, 1))
        else:
            out.append(range(0, 1))
    return out


def _assignments(letters, signs, k_max) -> Iterable[tuple[int, tuple[int, ...]]]:
    """Primitive assignments (gcd 1) grouped by increasing max |value|."""
    for k in range(1, k_max + 1):
        for combo in itertools.product(*_ranges(signs, letters, k)):
            if max((abs(v) for v in combo), default=0) != k:
                continue
            g = 0
            for v in combo:
                g = math.gcd(g, v)
            if g != 1:
                continue
            yield k, combo


def saturating_profile(f: BellFunctional, bound, cap: int) -> tuple[int, np.ndarray]:
    """Number of saturating vertices (stops past ``cap``) and their CG coordinate sums."""
    m = f.m
    count = 0
    joint = np.zeros((m, m), dtype=np.int64)
    sa = np.zeros(m, dtype=np.int64)
    sb = np.zeros(m, dtype=np.int64)
    for A, B in iter_saturating_blocks(f, bound):
        count += len(A)
        Af, Bf = A.astype(np.float64), B.astype(np.float64)
        joint += np.rint(Af.T @ Bf).astype(np.int64)
        sa += A.sum(axis=0, dtype=np.int64)
        sb += B.sum(axis=0, dtype=np.int64)
        if count > cap:
            break
    return count, np.concatenate([joint.reshape(-1), sa, sb])


def flat_coordinates(f: BellFunctional, count: int, sums: np.ndarray) -> list[int]:
    """Coordinates constant on every saturating vertex.

    Such a face lies in two hyperplanes at once, so it is a facet only when
    ``f`` is a multiple of that single coordinate.
    """
    flat = np.nonzero((sums == 0) | (sums == count))[0]
    support = [i for i, v in enumerate(f.coordinates()) if v != 0]
    if len(support) == 1:
        flat = flat[flat != support[0]]
    return [int(i) for i in flat]


def _evaluate(args):
    t, letters, combo, cap = args
    assignment = dict(zip(letters, combo))
    f = t.instantiate(assignment)
    if f.is_zero():
        return None
    bound, _ = local_bound_exact(f)
    f = f.with_bound(bound)
    D = cg_dimension(t.m)
    count, sums = saturating_profile(f, bound, cap)
    if count < D:
        return ("short", assignment, count, None)
    if count <= cap:
        flat = flat_coordinates(f, count, sums)
        if flat:
            return ("flat", assignment, count, flat)
    try:
        cert = check_tightness(f, cap=cap)
    except InconclusiveError:
        return ("inconclusive", assignment, count, None)
    if cert.is_facet:
        return ("facet", assignment, count, (f, cert))
    return ("near", assignment, count, cert.affine_rank)


def coefficient_search(t: Template, signs: Mapping[str, int] | None = None, k_max: int = 4,
                       cap: int = 10**6, threads: int = 1, keep_near: int = 5) -> list[SearchHit]:
    """All primitive integer assignments up to ``k_max`` that give facets, best first.

    Ranking is by saturating-vertex count, ties by assignment order.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    if k_max == 0:
        raise BudgetExhaustedError("k_max=0 leaves only the zero functional, which is trivial")
    signs = dict(signs) if signs is not None else default_signs(t)
    letters = list(t.letters)
    tasks = [(t, letters, combo, cap) for _, combo in _assignments(letters, signs, k_max)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, os.cpu_count() or 1)) as pool:
            outcomes = list(pool.map(_evaluate, tasks, chunksize=16))
    else:
        outcomes = [_evaluate(task) for task in tasks]
    hits: list[SearchHit] = []
    near: list[NearMiss] = []
    skipped = 0
    for out in outcomes:
        if out is None:
            continue
        kind, assignment, count, extra = out
        if kind == "facet":
            f, cert = extra
            hits.append(SearchHit(assignment, f, cert, count))
        elif kind == "near":
            near.append(NearMiss(assignment, extra, count))
        elif kind == "flat":
            near.append(NearMiss(assignment, None, count, extra))
        elif kind == "inconclusive":
            skipped += 1
    if not hits:
        # rank-checked candidates first, then the flat ones with the most saturating vertices
        near.sort(key=lambda n: (n.affine_rank is None, -(n.affine_rank or 0), -n.saturating_count))
        misses = near[:keep_near]
        for miss in misses:
            if miss.affine_rank is not None:
                f = t.instantiate(miss.assignment)
                sat = saturating_vertices(f.with_bound(local_bound_exact(f)[0]), cap=cap)
                miss.zero_components = zero_component_probe_blocks(sat)
        note = f" ({skipped} assignments exceeded the vertex cap)" if skipped else ""
        raise BudgetExhaustedError(f"no facet with coefficients up to {k_max}{note}", misses)
    hits.sort(key=SearchHit.key)
    return hits
