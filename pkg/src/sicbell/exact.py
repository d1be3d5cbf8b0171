"""Exact integer/rational linear algebra used by the certificates.

Everything here works on Python ints (numpy object arrays where vectorising
helps) so results never depend on floating point.  The modular routines are
only accelerators: a row set that is independent mod p is independent over
the rationals, so they can only under-report rank, never over-report it.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import math
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

# Largest prime below 2**31; keeps every product of two residues inside int64.
MODULUS = 2_147_483_647


def common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = lcm(den, Fraction(v).denominator)
    return den


def to_int_array(values, scale: int) -> np.ndarray:
    """Scale an array-like of Fractions by ``scale`` and return exact ints.

    Returns int64 when every entry fits comfortably, otherwise an object array.
    """
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    biggest = 0
    for i, v in enumerate(flat_in):
        q = Fraction(v) * scale
        if q.denominator != 1:
            raise ValueError(f"scale {scale} does not clear denominator of {v}")
        flat_out[i] = q.numerator
        biggest = max(biggest, abs(q.numerator))
    if biggest < 2**40:
        return out.astype(np.int64)
    return out


def exact_rank(rows: Sequence[Sequence[int]]) -> int:
    _, pivots, _ = integer_rref(rows)
    return len(pivots)


def integer_rref(rows: Sequence[Sequence[int]]) -> tuple[np.ndarray, list[int], int]:
    """Fraction-free Gauss-Jordan elimination.

    Returns ``(R, pivots, d)``: the reduced integer matrix (object dtype), the
    pivot columns of its leading rows, and the common value ``d`` that every
    pivot entry ends up with.  Leading row ``i`` is zero on all other pivot
    columns, so over Q the reduced row echelon form is ``R / d``.
    """
    R = np.array([[int(x) for x in r] for r in rows], dtype=object)
    if R.size == 0:
        return R.reshape(0, 0), [], 1
    nrows, ncols = R.shape
    # work in int64 while every intermediate product provably fits
    big = max(abs(int(x)) for x in R.reshape(-1))
    if big < 2**62:
        R = R.astype(np.int64)
    prev = 1
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(R[r:, c] != 0)[0]
        if len(nz) == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        piv = int(R[r, c])
        prow = R[r].copy()
        col = R[:, c].copy()
        col[r] = 0
        if R.dtype != object:
            big = int(np.abs(R).max())
            if big * abs(piv) + int(np.abs(col).max()) * int(np.abs(prow).max()) >= 2**62:
                R, prow, col = R.astype(object), prow.astype(object), col.astype(object)
        R = (R * piv - np.outer(col, prow)) // prev
        R[r] = prow
        pivots.append(c)
        prev = piv
        r += 1
    d = prev
    assert all(R[i, c] == d for i, c in enumerate(pivots))
    return R.astype(object), pivots, d


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int | None = None) -> list[list[int]]:
    """Integer basis of the right kernel of an integer matrix.

    Each vector is divided by the gcd of its entries.
    """
    return rank_and_kernel(rows, ncols)[1]


def rank_and_kernel(rows: Sequence[Sequence[int]], ncols: int | None = None) -> tuple[int, list[list[int]]]:
    rows = [list(r) for r in rows]
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return 0, [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    R, pivots, d = integer_rref(rows)
    n = R.shape[1]
    pivset = set(pivots)
    basis = []
    for j in range(n):
        if j in pivset:
            continue
        v = [0] * n
        v[j] = d
        for i, c in enumerate(pivots):
            v[c] = -R[i, j]
        g = 0
        for x in v:
            g = gcd(g, int(x))
        basis.append([int(x) // g for x in v])
    return len(pivots), basis


def mat_vec_exact(M: np.ndarray, K: Sequence[Sequence[int]]) -> np.ndarray:
    """Exact product ``M @ K.T`` for a 0/1 (small int) matrix ``M``."""
    Karr = np.array([[int(x) for x in k] for k in K], dtype=object)
    if Karr.size == 0:
        return np.zeros((M.shape[0], 0), dtype=np.int64)
    bound = max(abs(int(x)) for x in Karr.reshape(-1)) * max(1, M.shape[1]) * max(1, int(np.abs(M).max()))
    if bound < 2**62:
        return M.astype(np.int64) @ Karr.astype(np.int64).T
    return M.astype(object) @ Karr.T


def nonorthogonal_rows(M: np.ndarray, K: Sequence[Sequence[int]]) -> np.ndarray:
    """Indices of rows of the small-integer matrix ``M`` with ``row . k != 0`` for some ``k`` in ``K``.

    Works modulo word primes whose product exceeds twice the largest possible
    |row . k|, so a row that vanishes modulo all of them vanishes over Z.
    """
    if len(K) == 0 or M.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    Kint = [[int(x) for x in k] for k in K]
    kmax = max(abs(x) for k in Kint for x in k)
    top = max(1, int(np.abs(M).max()))
    if kmax * top * M.shape[1] < 2**53:
        # small kernel: one float product is already exact
        prod = M.astype(np.float64) @ np.array(Kint, dtype=np.float64).T
        return np.nonzero((prod != 0).any(axis=1))[0]
    bound = 2 * kmax * max(1, M.shape[1]) * top
    primes, prod = [], 1
    for q in word_primes(64):
        primes.append(q)
        prod *= q
        if prod > bound:
            break
    # float products are exact while every partial sum stays below 2**53
    use_float = top * M.shape[1] * primes[0] < 2**53
    Mw = M.astype(np.float64 if use_float else np.int64)
    bad = np.zeros(M.shape[0], dtype=bool)
    for q in primes:
        Kq = np.array([[x % q for x in k] for k in Kint], dtype=Mw.dtype)
        prod = Mw @ Kq.T
        if use_float:
            prod = prod.astype(np.int64)
        bad |= (np.mod(prod, q) != 0).any(axis=1)
    return np.nonzero(bad)[0]


class ModularRankAccumulator:
    """Incremental row-echelon basis mod a prime.

    ``add`` takes a block of integer row vectors and returns the indices of the
    rows that enlarged the span.  Those rows are linearly independent over Q.
    """

    def __init__(self, ncols: int, modulus: int = MODULUS):
        self.ncols = ncols
        self.p = modulus
        self.basis = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, block: np.ndarray) -> np.ndarray:
        p = self.p
        block = block.astype(np.int64)
        R = np.mod(block, p)
        if not self.pivots:
            return R
        small = int(np.abs(block).max(initial=0))
        if small * p * len(self.pivots) < 2**53:
            # the basis is reduced, so block - block[:, pivots] @ basis vanishes on
            # the pivot columns; every partial sum is an integer below 2**53
            prod = block[:, self.pivots].astype(np.float64) @ self.basis.astype(np.float64)
            return np.mod(block - np.mod(prod.astype(np.int64), p), p)
        if self.pivots:
            coeff = R[:, self.pivots]
            # coeff < p < 2**31 and basis < p; accumulate column by column to stay in int64
            for i, _ in enumerate(self.pivots):
                c = coeff[:, i]
                nz = np.nonzero(c)[0]
                if len(nz):
                    R[nz] = np.mod(R[nz] - np.mod(c[nz, None] * self.basis[i][None, :], p), p)
        return R

    def add(self, block: np.ndarray, stop_at: int | None = None) -> list[int]:
        p = self.p
        R = self._reduce(np.atleast_2d(block))
        new: list[int] = []
        for i in np.nonzero(R.any(axis=1))[0].tolist():
            if stop_at is not None and self.rank >= stop_at:
                break
            row = R[i]
            nz = np.nonzero(row)[0]
            if len(nz) == 0:
                continue
            c = int(nz[0])
            inv = pow(int(row[c]), p - 2, p)
            row = np.mod(row * inv, p)
            # keep reduced form: clear column c from existing basis rows
            if self.pivots:
                f = self.basis[:, c].copy()
                nzb = np.nonzero(f)[0]
                if len(nzb):
                    self.basis[nzb] = np.mod(self.basis[nzb] - np.mod(f[nzb, None] * row[None, :], p), p)
            self.basis = np.vstack([self.basis, row[None, :]])
            self.pivots.append(c)
            new.append(i)
            # clear column c from the rest of this block
            rest = R[i + 1:, c]
            nzr = np.nonzero(rest)[0]
            if len(nzr):
                idx = nzr + i + 1
                R[idx] = np.mod(R[idx] - np.mod(R[idx, c][:, None] * row[None, :], p), p)
        return new


def psd_check(M: Sequence[Sequence[Fraction]]) -> tuple[bool, list[Fraction] | list[Fraction]]:
    """Exact positive-semidefiniteness test by symmetric elimination.

    Returns ``(True, pivots)`` with the diagonal of the LDL^T factorisation, or
    ``(False, x)`` with a rational vector ``x`` such that ``x^T M x < 0``.
    """
    n = len(M)
    A = [[Fraction(v) for v in row] for row in M]
    for i in range(n):
        for j in range(n):
            if A[i][j] != A[j][i]:
                raise ValueError("matrix is not symmetric")
    # L tracks the row operations so a failing pivot can be turned into a witness
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    diag: list[Fraction] = []
    for k in range(n):
        piv = A[k][k]
        if piv < 0:
            return False, list(L[k])
        if piv == 0:
            for j in range(k + 1, n):
                if A[k][j] != 0:
                    # x = t*e_k + e_j direction with t chosen to go negative
                    ajj = A[j][j]
                    t = -(ajj + 1) / (2 * A[k][j])
                    x = [t * L[k][i] + L[j][i] for i in range(n)]
                    return False, x
            diag.append(Fraction(0))
            continue
        diag.append(piv)
        for i in range(k + 1, n):
            f = A[i][k] / piv
            if f == 0:
                continue
            for j in range(k, n):
                A[i][j] -= f * A[k][j]
            for j in range(n):
                L[i][j] -= f * L[k][j]
        for i in range(k + 1, n):
            A[k][i] = Fraction(0)
            A[i][k] = Fraction(0)
    return True, diag


def quadratic_form(M, x) -> Fraction:
    n = len(M)
    return sum((Fraction(x[i]) * M[i][j] * x[j] for i in range(n) for j in range(n)), Fraction(0))


def solve_exact(A_cols: np.ndarray, b: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve ``A x = b`` exactly for an integer matrix ``A`` with independent columns.

    Returns ``None`` when the system is inconsistent or the solution not unique.
    """
    den = common_denominator(b)
    bint = [int(Fraction(v) * den) for v in b]
    nrows, ncols = A_cols.shape
    aug = [[int(A_cols[i, j]) for j in range(ncols)] + [bint[i]] for i in range(nrows)]
    R, pivots, d = integer_rref(aug)
    if ncols in pivots:
        return None
    if len(pivots) != ncols:
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = Fraction(int(R[i, ncols]), int(d) * den)
    return x


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d, s = d // 2, s + 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def _word_primes(count: int, start: int) -> tuple[int, ...]:
    out, n = [], start
    while len(out) < count:
        if _is_prime(n):
            out.append(n)
        n -= 1
    return tuple(out)


def word_primes(count: int, start: int = MODULUS) -> list[int]:
    """The ``count`` largest primes not exceeding ``start``."""
    return list(_word_primes(count, start))


def modular_rref(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of an int64 matrix mod ``p`` (entries already in [0, p))."""
    R = M.copy()
    nrows, ncols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if len(nz) == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = R[r] * pow(int(R[r, c]), p - 2, p) % p
        col = R[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if len(rows):
            R[rows] = (R[rows] - col[rows, None] * R[r][None, :] % p) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rational_reconstruct(a: int, m: int) -> Fraction | None:
    """Fraction n/d with |n|, d <= sqrt(m/2) and n = a*d mod m, if one exists."""
    a %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in rows:
        row = [Fraction(v) for v in row]
        den = common_denominator(row)
        out.append([int(v * den) for v in row])
    return out


def _residues(rows: list[list[int]], p: int) -> np.ndarray:
    return np.array([[v % p for v in row] for row in rows], dtype=np.int64)


def _multimodular(rows: list[list[int]], extract, check, max_primes: int = 64):
    """Shared CRT loop: ``extract(R, pivots, p)`` gives residue vectors, ``check`` verifies."""
    modulus = 1
    acc = None
    ref_key = None
    for p in word_primes(max_primes):
        R, pivots = modular_rref(_residues(rows, p), p)
        # over Q the profile has maximal rank and lexicographically least pivots;
        # unlucky primes can only do worse
        key = (-len(pivots), pivots)
        if ref_key is None or key < ref_key:
            ref_key, modulus, acc = key, 1, None
        elif key > ref_key:
            continue
        res = extract(R, pivots, p)
        if res is None:
            return None
        if acc is None:
            acc = [list(v) for v in res]
        else:
            for va, vr in zip(acc, res):
                for i, (x, y) in enumerate(zip(va, vr)):
                    # CRT: x mod modulus, y mod p
                    t = (int(y) - x) * pow(modulus, -1, p) % p
                    va[i] = x + modulus * t
        modulus *= p
        cand = []
        for va in acc:
            vec = [rational_reconstruct(x, modulus) for x in va]
            if any(v is None for v in vec):
                break
            cand.append(vec)
        else:
            if check(cand):
                return cand
    raise ArithmeticError("multimodular reconstruction did not converge")


def solve_particular(M: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """One exact solution of ``M x = rhs`` (free variables set to 0), or None if inconsistent.

    Solved modulo word-size primes, lifted by CRT and rational reconstruction,
    and returned only after exact verification over Q.
    """
    M = [list(row) for row in M]
    if not M:
        return None
    ncols = len(M[0])
    rows = _integer_rows([row + [r] for row, r in zip(M, rhs)])

    def extract(R, pivots, p):
        if ncols in pivots:
            return None
        x = [0] * ncols
        for i, c in enumerate(pivots):
            x[c] = int(R[i, ncols])
        return [x]

    def check(cand):
        return _exactly_solves(rows, cand[0])

    try:
        out = _multimodular(rows, extract, check)
    except ArithmeticError:
        return _solve_particular_rref(rows, ncols)
    if out is None:
        # inconsistent mod p; confirm over Q
        return _solve_particular_rref(rows, ncols)
    return out[0]


def _exactly_solves(rows: list[list[int]], x: list[Fraction]) -> bool:
    den = common_denominator(x)
    xi = [int(v * den) for v in x]
    for row in rows:
        if sum(a * b for a, b in zip(row, xi) if a and b) != row[-1] * den:
            return False
    return True


def _solve_particular_rref(rows: list[list[int]], ncols: int) -> list[Fraction] | None:
    R, pivots, d = integer_rref(rows)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = Fraction(int(R[i, ncols]), int(d))
    return x


def kernel_multimodular(rows: Sequence[Sequence[int]], ncols: int) -> tuple[int, list[list[int]]]:
    """``(rank, kernel basis)`` of an integer matrix, verified exactly.

    Kernel vectors carry the identity pattern on the free columns, so they are
    independent; each is checked to be orthogonal to every row over Z.
    """
    rows = [[int(v) for v in row] for row in rows]
    if not rows:
        return 0, [[int(i == j) for i in range(ncols)] for j in range(ncols)]

    def extract(R, pivots, p):
        free = [j for j in range(ncols) if j not in set(pivots)]
        vecs = []
        for j in free:
            v = [0] * ncols
            v[j] = 1
            for i, c in enumerate(pivots):
                v[c] = int(-R[i, j] % p)
            vecs.append(v)
        return vecs

    def check(cand):
        for vec in cand:
            den = common_denominator(vec)
            vi = [int(v * den) for v in vec]
            if any(sum(a * b for a, b in zip(row, vi) if a and b) for row in rows):
                return False
        return True

    cand = _multimodular(rows, extract, check)
    basis = []
    for vec in cand:
        den = common_denominator(vec)
        vi = [int(v * den) for v in vec]
        g = 0
        for v in vi:
            g = math.gcd(g, v)
        basis.append([v // g for v in vi])
    return ncols - len(basis), basis


def simplex_feasibility(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                        max_pivots: int = 100_000) -> tuple[list[Fraction] | None, list[Fraction] | None]:
    """Exact phase-one simplex with Bland's rule for ``A x = b, x >= 0``.

    Returns ``(x, None)`` when feasible, ``(None, y)`` with a Farkas vector
    (``y^T A >= 0`` and ``y^T b < 0``) when infeasible.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    rows = []
    sign = []
    for i in range(m):
        s = -1 if Fraction(b[i]) < 0 else 1
        sign.append(s)
        rows.append([Fraction(s * A[i][j]) for j in range(n)] + [Fraction(int(i == k)) for k in range(m)]
                    + [Fraction(s * b[i])])
    ncol = n + m
    basis = [n + i for i in range(m)]
    # phase-one objective: minimise sum of artificials; reduced costs c_j - c_B B^-1 A_j
    obj = [Fraction(0)] * (ncol + 1)
    for i in range(m):
        for j in range(ncol + 1):
            obj[j] -= rows[i][j]
    for i in range(m):
        obj[n + i] += 1
    for _ in range(max_pivots):
        enter = next((j for j in range(ncol) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        leave = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][ncol] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise RuntimeError("phase-one objective unbounded; impossible")
        pr = rows[leave]
        pv = pr[enter]
        rows[leave] = pr = [v / pv for v in pr]
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [u - f * v for u, v in zip(rows[i], pr)]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [u - f * v for u, v in zip(obj, pr)]
        basis[leave] = enter
    else:
        raise RuntimeError("pivot budget exhausted")
    if -obj[ncol] > 0:
        # duals of the phase-one problem give the Farkas certificate
        y = [(obj[n + i] - 1) * sign[i] for i in range(m)]
        return None, y
    x = [Fraction(0)] * n
    for i, bj in enumerate(basis):
        if bj < n:
            x[bj] = rows[i][ncol]
    return x, None
