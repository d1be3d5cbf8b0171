from fractions import Fraction
from itertools import combinations

import numpy as np
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from sicbell.exact import (ModularRankAccumulator, exact_rank, kernel_multimodular, nonorthogonal_rows, psd_check,
                           quadratic_form, rank_and_kernel, rational_reconstruct, simplex_feasibility)


@st.composite
def int_matrices(draw, max_rows=7, max_cols=7, lo=-4, hi=4):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return [[draw(st.integers(lo, hi)) for _ in range(c)] for _ in range(r)]


@settings(max_examples=80, deadline=None)
@given(int_matrices())
def test_rank_and_kernel_against_sympy(M):
    S = sympy.Matrix(M)
    rank, kernel = rank_and_kernel(M, len(M[0]))
    assert rank == S.rank() == exact_rank(M)
    assert len(kernel) == len(M[0]) - rank
    for v in kernel:
        assert all(x == 0 for x in S * sympy.Matrix(v))


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_multimodular_kernel(M):
    rank, kernel = kernel_multimodular(M, len(M[0]))
    assert rank == sympy.Matrix(M).rank()
    for v in kernel:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in M)


@settings(max_examples=40, deadline=None)
@given(int_matrices(max_rows=12, lo=0, hi=1))
def test_modular_accumulator_rank(M):
    acc = ModularRankAccumulator(len(M[0]))
    acc.add(np.array(M, dtype=np.int64))
    assert acc.rank == sympy.Matrix(M).rank()


@settings(max_examples=60, deadline=None)
@given(int_matrices(lo=0, hi=1), st.lists(st.lists(st.integers(-10**12, 10**12), min_size=7, max_size=7),
                                          min_size=1, max_size=3))
def test_nonorthogonal_rows_exact(M, K):
    c = len(M[0])
    K = [k[:c] for k in K]
    got = set(nonorthogonal_rows(np.array(M, dtype=np.int64), K).tolist())
    expect = {i for i, row in enumerate(M) if any(sum(a * b for a, b in zip(row, k)) for k in K)}
    assert got == expect


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3))
def test_psd_check(B):
    # B^T B is PSD; the shifted matrix is PSD iff every principal minor is >= 0
    S = sympy.Matrix(B).T * sympy.Matrix(B)
    M = [[Fraction(int(S[i, j])) for j in range(3)] for i in range(3)]
    ok, _ = psd_check(M)
    assert ok
    shifted = [[M[i][j] - (Fraction(1) if i == j else 0) for j in range(3)] for i in range(3)]
    ok, x = psd_check(shifted)
    T = sympy.Matrix(shifted)
    expected = all(T.extract(list(idx), list(idx)).det() >= 0
                   for r in range(1, 4) for idx in combinations(range(3), r))
    assert ok == expected
    if not ok:
        assert quadratic_form(shifted, x) < 0


def test_rational_reconstruct():
    p = 2**31 - 1
    q = Fraction(-7, 13)
    a = (q.numerator * pow(q.denominator, -1, p)) % p
    assert rational_reconstruct(a, p) == q


def test_simplex_feasible_and_farkas():
    A = [[1, 1, 0], [0, 1, 1]]
    x, y = simplex_feasibility(A, [Fraction(1), Fraction(1)])
    assert x is not None and all(v >= 0 for v in x)
    assert [sum(A[i][j] * x[j] for j in range(3)) for i in range(2)] == [1, 1]
    # x1 + x2 = 1 and x1 + x2 = 2 cannot both hold
    A = [[1, 1], [1, 1]]
    x, y = simplex_feasibility(A, [Fraction(1), Fraction(2)])
    assert x is None
    assert all(sum(y[i] * A[i][j] for i in range(2)) >= 0 for j in range(2))
    assert y[0] * 1 + y[1] * 2 < 0
