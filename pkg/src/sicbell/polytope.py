"""The (2, m, 2) local polytope in Collins-Gisin coordinates.

A deterministic vertex is a pair of bit vectors (a, b); its CG embedding is
``(a_x b_y)_{x,y}`` followed by ``a`` and ``b``.  Local bounds are computed by
iterating Alice's 2^m assignments and letting Bob answer optimally, which is
exact because Bob's choices decouple once Alice's bits are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .exact import (ModularRankAccumulator, common_denominator, kernel_multimodular, nonorthogonal_rows,
                    to_int_array)

DEFAULT_LIMIT = 24
DEFAULT_CAP = 10**6
_BLOCK = 1 << 14


class ScenarioTooLargeError(ValueError):
    pass


class InconclusiveError(RuntimeError):
    """Saturating-vertex cap reached before the rank question was settled."""


class DimensionMismatchError(ValueError):
    pass


def cg_dimension(m: int) -> int:
    return m * m + 2 * m


@dataclass(frozen=True)
class BellFunctional:
    """Coefficients of I = sum c_xy P(1,1|xy) + sum c_x P_A(1|x) + sum c_y P_B(1|y).

    ``joint[x][y]`` multiplies P(A_x = B_y = 1) with x Alice's setting.  The
    inequality reads I <= bound.
    """

    m: int
    joint: tuple[tuple[Fraction, ...], ...]
    marg_a: tuple[Fraction, ...]
    marg_b: tuple[Fraction, ...]
    bound: Fraction | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "joint", tuple(tuple(Fraction(v) for v in row) for row in self.joint))
        object.__setattr__(self, "marg_a", tuple(Fraction(v) for v in self.marg_a))
        object.__setattr__(self, "marg_b", tuple(Fraction(v) for v in self.marg_b))
        if self.bound is not None:
            object.__setattr__(self, "bound", Fraction(self.bound))
        m = self.m
        if len(self.joint) != m or any(len(r) != m for r in self.joint):
            raise ValueError("joint block must be m x m")
        if len(self.marg_a) != m or len(self.marg_b) != m:
            raise ValueError("marginal coefficient vectors must have length m")

    @classmethod
    def zero(cls, m: int) -> "BellFunctional":
        z = [Fraction(0)] * m
        return cls(m, [z] * m, z, z, Fraction(0), "zero")

    @classmethod
    def from_coordinates(cls, coords: Sequence, m: int, bound=None, name: str = "") -> "BellFunctional":
        joint = [list(coords[x * m:(x + 1) * m]) for x in range(m)]
        return cls(m, joint, coords[m * m:m * m + m], coords[m * m + m:m * m + 2 * m], bound, name)

    @classmethod
    def from_paper_matrix(cls, rows: Sequence[Sequence], bound=None, name: str = "") -> "BellFunctional":
        """Build from the (m+1) x (m+1) display: header row = Alice marginals,
        first column = Bob marginals, entry (row y, column x) = c(A_x = B_y = 1)."""
        m = len(rows) - 1
        marg_a = [Fraction(v) for v in rows[0][1:]]
        marg_b = [Fraction(rows[y + 1][0]) for y in range(m)]
        joint = [[Fraction(rows[y + 1][x + 1]) for y in range(m)] for x in range(m)]
        return cls(m, joint, marg_a, marg_b, bound, name)

    def coordinates(self) -> list[Fraction]:
        return [v for row in self.joint for v in row] + list(self.marg_a) + list(self.marg_b)

    def with_bound(self, bound) -> "BellFunctional":
        return BellFunctional(self.m, self.joint, self.marg_a, self.marg_b, bound, self.name)

    def with_exact_bound(self) -> "BellFunctional":
        return self.with_bound(local_bound_exact(self)[0])

    def scaled(self, k) -> "BellFunctional":
        k = Fraction(k)
        c = [k * v for v in self.coordinates()]
        bound = None if self.bound is None else k * self.bound
        return BellFunctional.from_coordinates(c, self.m, bound, self.name)

    def transposed(self) -> "BellFunctional":
        """Swap the roles of Alice and Bob."""
        m = self.m
        joint = [[self.joint[y][x] for y in range(m)] for x in range(m)]
        return BellFunctional(m, joint, self.marg_b, self.marg_a, self.bound, self.name)

    def is_zero(self) -> bool:
        return not any(self.coordinates())

    def paper_matrix(self) -> list[list[Fraction]]:
        m = self.m
        rows = [[None] + list(self.marg_a)]
        for y in range(m):
            rows.append([self.marg_b[y]] + [self.joint[x][y] for x in range(m)])
        return rows

    def integer_form(self) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
        """``(scale, C, ca, cb)`` with integer arrays equal to scale * coefficients."""
        scale = common_denominator(self.coordinates())
        return (scale, to_int_array(self.joint, scale), to_int_array(self.marg_a, scale),
                to_int_array(self.marg_b, scale))


@dataclass(frozen=True)
class DeterministicVertex:
    a_bits: tuple[int, ...]
    b_bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a_bits", tuple(int(v) for v in self.a_bits))
        object.__setattr__(self, "b_bits", tuple(int(v) for v in self.b_bits))
        if len(self.a_bits) != len(self.b_bits):
            raise ValueError("Alice and Bob bit vectors must have equal length")
        if any(v not in (0, 1) for v in self.a_bits + self.b_bits):
            raise ValueError("vertex bits must be 0 or 1")

    @property
    def m(self) -> int:
        return len(self.a_bits)

    def key(self) -> tuple[int, int]:
        """Pair of bitmasks (bit x of the first mask is Alice's bit for setting x)."""
        return (sum(b << i for i, b in enumerate(self.a_bits)), sum(b << i for i, b in enumerate(self.b_bits)))

    @classmethod
    def from_key(cls, key: tuple[int, int], m: int) -> "DeterministicVertex":
        a, b = key
        return cls(tuple((a >> i) & 1 for i in range(m)), tuple((b >> i) & 1 for i in range(m)))


@dataclass
class TightnessCertificate:
    dimension: int
    saturating_count: int
    affine_rank: int
    is_facet: bool
    witness_vertices: list[DeterministicVertex]
    exhausted: bool
    bound: Fraction = Fraction(0)
    # integer normals orthogonal to all saturating points when not a facet
    extra_normals: list[list[int]] = field(default_factory=list)


def embed_vertex(v: DeterministicVertex) -> tuple[int, ...]:
    a, b = v.a_bits, v.b_bits
    return tuple(x * y for x in a for y in b) + a + b


def embed_bits(A: np.ndarray, B: np.ndarray, homogeneous: bool = False) -> np.ndarray:
    """Vectorised CG embedding of vertex blocks ``A`` and ``B`` (shape (N, m))."""
    A = np.asarray(A, dtype=np.int8)
    B = np.asarray(B, dtype=np.int8)
    n, m = A.shape
    parts = [(A[:, :, None] * B[:, None, :]).reshape(n, m * m), A, B]
    if homogeneous:
        parts.append(np.ones((n, 1), dtype=np.int8))
    return np.concatenate(parts, axis=1)


def evaluate(f: BellFunctional, b) -> Fraction:
    """Exact value of the functional on a Behavior, a DeterministicVertex, or a CG vector."""
    if isinstance(b, DeterministicVertex):
        coords = embed_vertex(b)
        m = b.m
    elif hasattr(b, "coordinates"):
        coords = b.coordinates()
        m = b.m
    else:
        coords = list(b)
        m = None
        if len(coords) != cg_dimension(f.m):
            raise DimensionMismatchError(f"vector of length {len(coords)} for m={f.m}")
    if m is not None and m != f.m:
        raise DimensionMismatchError(f"functional has m={f.m}, argument has m={m}")
    return sum((c * Fraction(p) for c, p in zip(f.coordinates(), coords) if c), Fraction(0))


def _alice_blocks(m: int, block: int = _BLOCK) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    shifts = np.arange(m, dtype=np.int64)
    total = 1 << m
    for start in range(0, total, block):
        masks = np.arange(start, min(total, start + block), dtype=np.int64)
        yield masks, ((masks[:, None] >> shifts) & 1).astype(np.int64)


def _check_limit(m: int, limit: int):
    if m > limit:
        raise ScenarioTooLargeError(f"m={m} exceeds the exhaustive limit {limit}")


def _block_values(A, C, ca, cb):
    T = A @ C + cb
    val = A @ ca + np.where(T > 0, T, 0).sum(axis=1)
    return val, T


def local_bound_exact(f: BellFunctional, limit: int = DEFAULT_LIMIT) -> tuple[Fraction, DeterministicVertex]:
    """Exact maximum of the functional over all deterministic vertices.

    Bob's bit y is 1 exactly when its conditional gain is positive (ties go
    to 0), so the returned argmax is deterministic.
    """
    _check_limit(f.m, limit)
    scale, C, ca, cb = f.integer_form()
    best = None
    best_vertex = None
    for masks, A in _alice_blocks(f.m):
        val, T = _block_values(A, C, ca, cb)
        i = int(np.argmax(val))
        if best is None or val[i] > best:
            best = val[i]
            best_vertex = DeterministicVertex(tuple(A[i]), tuple(int(t > 0) for t in T[i]))
    return Fraction(int(best), scale), best_vertex


@dataclass
class SaturatingSet:
    a: np.ndarray
    b: np.ndarray
    truncated: bool

    def __len__(self):
        return len(self.a)

    def __iter__(self) -> Iterator[DeterministicVertex]:
        for x, y in zip(self.a, self.b):
            yield DeterministicVertex(tuple(x), tuple(y))

    def keys(self) -> set[tuple[int, int]]:
        w = 1 << np.arange(self.a.shape[1], dtype=np.int64)
        return set(zip((self.a.astype(np.int64) @ w).tolist(), (self.b.astype(np.int64) @ w).tolist()))


_ROW_CHUNK = 1 << 16


def iter_saturating_blocks(f: BellFunctional, bound=None, limit: int = DEFAULT_LIMIT
                           ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield blocks ``(A, B)`` of all vertices attaining the bound, in a fixed order."""
    _check_limit(f.m, limit)
    if bound is None:
        bound = f.bound if f.bound is not None else local_bound_exact(f, limit)[0]
    scale, C, ca, cb = f.integer_form()
    target = Fraction(bound) * scale
    if target.denominator != 1:
        return
    target = target.numerator
    m = f.m
    for masks, A in _alice_blocks(m):
        val, T = _block_values(A, C, ca, cb)
        if (val > target).any():
            raise ValueError(f"bound {bound} is exceeded; it is not the local bound")
        hits = np.nonzero(val == target)[0]
        if len(hits) == 0:
            continue
        # ties on Bob's side multiply rows, so flush in bounded chunks
        outA, outB, pending = [], [], 0
        for i in hits:
            t = T[i]
            base = (t > 0).astype(np.int8)
            zeros = np.nonzero(t == 0)[0]
            k = len(zeros)
            for start in range(0, 1 << k, _ROW_CHUNK):
                idx = np.arange(start, min(1 << k, start + _ROW_CHUNK))
                combos = ((idx[:, None] >> np.arange(k)) & 1).astype(np.int8)
                Bs = np.repeat(base[None, :], len(idx), axis=0)
                Bs[:, zeros] = combos
                outB.append(Bs)
                outA.append(np.repeat(A[i].astype(np.int8)[None, :], len(idx), axis=0))
                pending += len(idx)
                if pending >= _ROW_CHUNK:
                    yield np.concatenate(outA), np.concatenate(outB)
                    outA, outB, pending = [], [], 0
        if pending:
            yield np.concatenate(outA), np.concatenate(outB)


def saturating_vertices(f: BellFunctional, bound=None, cap: int = DEFAULT_CAP,
                        limit: int = DEFAULT_LIMIT) -> SaturatingSet:
    As, Bs = [], []
    count = 0
    truncated = False
    for A, B in iter_saturating_blocks(f, bound, limit):
        if count + len(A) > cap:
            As.append(A[:cap - count])
            Bs.append(B[:cap - count])
            truncated = True
            break
        As.append(A)
        Bs.append(B)
        count += len(A)
    m = f.m
    if not As:
        return SaturatingSet(np.zeros((0, m), np.int8), np.zeros((0, m), np.int8), truncated)
    return SaturatingSet(np.concatenate(As), np.concatenate(Bs), truncated)


# --------------------------------------------------------------------------- #
# Ranks

class _RankBuilder:
    """Rows picked by a modular accumulator.

    Rows independent mod p have a nonzero integer minor, so they are
    independent over Q: the picked count is a proven lower bound on the rank.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.acc = ModularRankAccumulator(ncols)
        self.rows: list[list[int]] = []

    def feed(self, block: np.ndarray, stop_at: int | None = None, chunk: int = 256) -> list[int]:
        picked = []
        start = 0
        while start < len(block):
            if stop_at is not None and self.rank >= stop_at:
                break
            got = self.acc.add(block[start:start + chunk], stop_at=stop_at)
            picked.extend(start + i for i in got)
            start += chunk
            # once the span settles, take larger bites
            chunk = 256 if got else min(2 * chunk, 1 << 15)
        self.rows.extend(block[i].astype(np.int64).tolist() for i in picked)
        return picked

    @property
    def rank(self) -> int:
        return self.acc.rank


def _exact_rank_of_blocks(blocks_factory, ncols: int, stop_at: int | None = None,
                          rb: _RankBuilder | None = None, on_pick=None,
                          sample: int = 2048) -> tuple[int, list, bool]:
    """Exact rank of all rows produced by ``blocks_factory()`` (re-iterable).

    Returns ``(rank, kernel, stopped_early)``.  Rows already in ``rb`` seed the
    span; each pass computes the kernel of the picked rows and scans every row
    for one that is not orthogonal to it.  When a pass finds none, every row
    has been checked over Z against ``kernel``, which proves the rank cannot
    exceed ``ncols - len(kernel)``.
    """
    rb = rb if rb is not None else _RankBuilder(ncols)
    while True:
        if rb.rows:
            rank, kernel = kernel_multimodular(rb.rows, ncols)
        else:
            rank, kernel = 0, [[int(i == j) for j in range(ncols)] for i in range(ncols)]
        if stop_at is not None and rank >= stop_at:
            return rank, [], True
        grew = False
        for bi, block in enumerate(blocks_factory()):
            bad = nonorthogonal_rows(block, kernel)
            if not len(bad):
                continue
            if len(bad) > sample:
                # an even spread is enough; the next pass catches what is left
                bad = bad[np.linspace(0, len(bad) - 1, sample).astype(np.int64)]
            picked = rb.feed(block[bad], stop_at)
            if not picked:
                # dependent mod p by accident; the exact kernel sorts it out
                rb.rows.append(block[bad[0]].astype(np.int64).tolist())
                picked = [0]
            if on_pick is not None:
                on_pick(bi, bad[picked])
            grew = True
        if not grew:
            return rank, kernel, False


def affine_rank(vs) -> int:
    """Number of affinely independent points among the CG vectors ``vs``."""
    arr = np.array([list(v) for v in vs], dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("affine_rank needs a nonempty list of vectors")
    hom = np.concatenate([arr, np.ones((arr.shape[0], 1), dtype=np.int64)], axis=1)
    rank, _, _ = _exact_rank_of_blocks(lambda: [hom], hom.shape[1])
    return rank


def check_tightness(f: BellFunctional, cap: int = DEFAULT_CAP, limit: int = DEFAULT_LIMIT,
                    prefix: int = 20_000) -> TightnessCertificate:
    """Decide whether ``f <= bound`` is a facet of the local polytope.

    The first ``prefix`` saturating vertices go through a rank accumulator
    that stops once D affinely independent ones are found.  If that falls
    short, the rest are handled by kernel scans over the whole set.
    """
    m = f.m
    D = cg_dimension(m)
    bound = f.bound if f.bound is not None else local_bound_exact(f, limit)[0]
    if f.is_zero():
        # every vertex saturates and they span the whole polytope: trivial, never a facet
        _check_limit(m, limit)
        return TightnessCertificate(D, 4 ** m, D + 1, False, [], True, bound)
    rb = _RankBuilder(D + 1)
    witnesses: list[DeterministicVertex] = []
    count = 0
    capped = False
    for A, B in iter_saturating_blocks(f, bound, limit):
        if count + len(A) > cap:
            A, B = A[:cap - count], B[:cap - count]
            capped = True
        if count < prefix and rb.rank < D:
            head = slice(0, prefix - count)
            picked = rb.feed(embed_bits(A[head], B[head], homogeneous=True), stop_at=D)
            witnesses.extend(DeterministicVertex(tuple(A[i]), tuple(B[i])) for i in picked)
        count += len(A)
        if capped:
            break
    if rb.rank >= D:
        return TightnessCertificate(D, count, rb.rank, True, witnesses, not capped, bound)

    def stream():
        seen = 0
        for A, B in iter_saturating_blocks(f, bound, limit):
            if seen + len(A) > cap:
                A, B = A[:cap - seen], B[:cap - seen]
            seen += len(A)
            yield A, B
            if seen >= cap:
                return

    def blocks():
        for A, B in stream():
            yield embed_bits(A, B, homogeneous=True)

    def on_pick(bi, idx):
        for i, (A, B) in enumerate(stream()):
            if i == bi:
                witnesses.extend(DeterministicVertex(tuple(A[j]), tuple(B[j])) for j in idx)
                return

    rank, kernel, early = _exact_rank_of_blocks(blocks, D + 1, stop_at=D, rb=rb, on_pick=on_pick)
    if early:
        return TightnessCertificate(D, count, rank, True, witnesses, not capped, bound)
    if capped:
        raise InconclusiveError(f"cap {cap} reached at affine rank {rank} < {D}")
    # the bound hyperplane itself is one kernel direction; the rest are extra normals
    return TightnessCertificate(D, count, rank, rank == D, witnesses, True, bound, kernel)


def zero_component_probe(vs: Sequence[DeterministicVertex]) -> list[int]:
    """Coordinates on which the uniform mixture of the given vertices vanishes."""
    if not vs:
        raise ValueError("need at least one vertex")
    total = np.zeros(cg_dimension(vs[0].m), dtype=np.int64)
    for v in vs:
        total += np.array(embed_vertex(v), dtype=np.int64)
    return [int(i) for i in np.nonzero(total == 0)[0]]


def zero_component_probe_blocks(sat: SaturatingSet) -> list[int]:
    total = embed_bits(sat.a, sat.b).astype(np.int64).sum(axis=0)
    return [int(i) for i in np.nonzero(total == 0)[0]]


def coordinate_label(index: int, m: int) -> str:
    """Readable name of a CG coordinate index (1-based settings)."""
    if index < m * m:
        x, y = divmod(index, m)
        return f"P(1,1|{x + 1},{y + 1})"
    if index < m * m + m:
        return f"P_A(1|{index - m * m + 1})"
    return f"P_B(1|{index - m * m - m + 1})"
