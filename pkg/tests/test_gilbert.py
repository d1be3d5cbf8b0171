from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sicbell.behavior import Behavior, apply_visibility, ideal_behavior
from sicbell.catalog import ch_functional
from sicbell.gilbert import (GilbertConfig, gilbert_run, oracle_exact, oracle_heuristic, parameter_grid,
                             rationalize_witness, residual_to_cg, vertex_table)
from sicbell.polytope import ScenarioTooLargeError, evaluate, local_bound_exact
from sicbell.rays import build_rayset

HALF = Fraction(1, 2)


def _bits(mask, m):
    return [(mask >> i) & 1 for i in range(m)]


def brute_overlap(gamma, m):
    best = -np.inf
    for a in range(1 << m):
        for b in range(1 << m):
            best = max(best, float(gamma @ vertex_table(_bits(a, m), _bits(b, m))))
    return best


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_exact_oracle_against_brute_force(m, seed):
    gamma = np.random.default_rng(seed).normal(size=4 * m * m)
    v, val = oracle_exact(gamma, m)
    assert val == pytest.approx(brute_overlap(gamma, m), abs=1e-9)
    assert val == pytest.approx(float(gamma @ vertex_table(v.a_bits, v.b_bits)), abs=1e-9)


def test_heuristic_never_beats_exact():
    rng = np.random.default_rng(7)
    for _ in range(200):
        gamma = rng.normal(size=4 * 25)
        _, ex = oracle_exact(gamma, 5)
        _, he = oracle_heuristic(gamma, 5, 5, rng)
        assert he <= ex + 1e-9


def test_exact_oracle_limit():
    with pytest.raises(ScenarioTooLargeError):
        oracle_exact(np.zeros(4 * 36), 6, limit=5)


def test_cg_split_reproduces_overlap():
    rng = np.random.default_rng(3)
    m = 3
    gamma = rng.normal(size=4 * m * m)
    joint, ca, cb, const = residual_to_cg(gamma, m)
    for a in range(1 << m):
        for b in range(1 << m):
            A, B = np.array(_bits(a, m)), np.array(_bits(b, m))
            assert A @ joint @ B + A @ ca + B @ cb + const == pytest.approx(gamma @ vertex_table(A, B))


def test_rationalize_recovers_ch_direction():
    ch = ch_functional()
    m = 2
    # table functional equal to CH on CG coordinates
    gamma = np.zeros((2, 2, m, m))
    for x in range(m):
        for y in range(m):
            gamma[1, 1, x, y] = float(ch.joint[x][y])
    for x in range(m):
        gamma[1, :, x, :] += float(ch.marg_a[x]) / m
        gamma[:, 1, :, x] += float(ch.marg_b[x]) / m
    f = rationalize_witness(gamma.reshape(-1), m)
    assert f.coordinates() == ch.coordinates()


def _pr_like():
    # CH value 1/2 above the local bound
    return Behavior(2, [[HALF, HALF], [HALF, 0]], [HALF, HALF], [HALF, HALF])


def test_separates_a_nonlocal_point():
    res = gilbert_run(_pr_like(), GilbertConfig(max_iterations=2000, oracle_restarts=10), oracle="exact")
    assert res.status == "separated"
    w = res.witness
    assert local_bound_exact(w)[0] == w.bound
    assert evaluate(w, _pr_like()) > w.bound
    assert all(b <= a + 1e-12 for a, b in zip(res.distances, res.distances[1:]))


def test_local_point_is_inside():
    target = apply_visibility(ideal_behavior(build_rayset("yu-oh")), Fraction(1, 2), 3)
    res = gilbert_run(target, GilbertConfig(delta=1e-2, max_iterations=5000))
    assert res.status == "inside"
    assert res.witness is None


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_distance_monotone_on_random_points(seed):
    rng = np.random.default_rng(seed)
    m = 3
    ma = [Fraction(int(v), 8) for v in rng.integers(0, 9, size=m)]
    mb = [Fraction(int(v), 8) for v in rng.integers(0, 9, size=m)]
    joint = [[max(Fraction(0), ma[x] + mb[y] - 1) for y in range(m)] for x in range(m)]
    res = gilbert_run(Behavior(m, joint, ma, mb), GilbertConfig(max_iterations=300, rng_seed=seed))
    assert all(b <= a + 1e-12 for a, b in zip(res.distances, res.distances[1:]))


def test_same_seed_same_run():
    target = _pr_like()
    cfg = GilbertConfig(max_iterations=300, rng_seed=11)
    a, b = gilbert_run(target, cfg, grid_index=3), gilbert_run(target, cfg, grid_index=3)
    assert a.distances == b.distances


def test_parameter_grid():
    assert parameter_grid(0.7, 0.8, 0.05) == [Fraction(7, 10), Fraction(3, 4), Fraction(4, 5)]
    with pytest.raises(ValueError):
        parameter_grid(0.9, 0.8, 0.01)
    with pytest.raises(ValueError):
        parameter_grid(0.1, 0.8, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        GilbertConfig(delta=0)
    with pytest.raises(ValueError):
        GilbertConfig(max_iterations=0)
