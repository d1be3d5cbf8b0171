import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import binary_entropy as h_ref
from sicbell.behavior import Behavior, apply_efficiency, apply_visibility, ideal_behavior
from sicbell.catalog import ch_functional, get_functional
from sicbell.certify import (InvalidDistributionError, NeverViolatedError, QuadraticSurd, binary_entropy,
                             certify_critical, cond_entropy_A_given_B, critical_efficiency, critical_visibility,
                             efficiency_parts, local_model_lp, noise_floor_model, round_half_up)
from sicbell.polytope import DeterministicVertex, evaluate, saturating_vertices
from sicbell.rays import build_rayset

KS = build_rayset("ks18")
YO = build_rayset("yu-oh")
IDEAL = {"ks18": ideal_behavior(KS), "yu-oh": ideal_behavior(YO)}


def test_exact_critical_visibilities():
    assert critical_visibility(get_functional("yuoh_v_tight"), IDEAL["yu-oh"], 3).value == Fraction(19, 24)
    assert critical_visibility(get_functional("ks18_v"), IDEAL["ks18"], 4).value == Fraction(223, 273)


def test_critical_efficiency_rational_and_surd():
    ce = critical_efficiency(get_functional("ks18_eta"), IDEAL["ks18"])
    assert ce.value == Fraction(16, 19)
    ce = critical_efficiency(get_functional("yuoh_eta_tight"), IDEAL["yu-oh"])
    assert isinstance(ce.value, QuadraticSurd)
    assert ce.decimal == "0.8441"
    # the root satisfies J eta^2 + M eta = bound
    J, M = efficiency_parts(get_functional("yuoh_eta_tight"), IDEAL["yu-oh"])
    eta = float(ce.value)
    assert math.isclose(float(J) * eta ** 2 + float(M) * eta, 4, rel_tol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 7))
def test_critical_points_scale_invariant(k):
    for name, set_name in (("yuoh_v_tight", "yu-oh"), ("ks18_eta", "ks18")):
        f = get_functional(name)
        g = f.scaled(k)
        d = 3 if set_name == "yu-oh" else 4
        assert critical_visibility(g, IDEAL[set_name], d).value == critical_visibility(f, IDEAL[set_name], d).value
        assert critical_efficiency(g, IDEAL[set_name]).decimal == critical_efficiency(f, IDEAL[set_name]).decimal


def test_never_violated():
    b = apply_visibility(IDEAL["yu-oh"], 0, 3)
    with pytest.raises(NeverViolatedError):
        critical_visibility(get_functional("yuoh_v_tight"), b, 3)


def test_round_half_up():
    assert round_half_up(Fraction(19, 24)) == "0.7917"
    assert round_half_up(Fraction(12345, 100000)) == "0.1235"


def test_surd_text():
    s = QuadraticSurd.from_parts(Fraction(0), Fraction(4, 15), 10)
    assert str(s) == "4*sqrt(10)/15"


def test_noise_floor_models_reproduce_floor():
    for kind, d, ideal, noisy in (("visibility", 3, IDEAL["yu-oh"], apply_visibility(IDEAL["yu-oh"], 0, 3)),
                                  ("efficiency", 4, IDEAL["ks18"], apply_efficiency(IDEAL["ks18"], 0))):
        model = noise_floor_model(kind, ideal.m, d)
        assert model.reproduces(noisy)


def test_lp_finds_vertex_mixture_for_ch():
    ch = ch_functional()
    cands = list(saturating_vertices(ch))
    half = Fraction(1, 2)
    # uniform mixture of the saturating vertices is local by construction
    target = Behavior(2, *_average(cands))
    out = local_model_lp(target, cands)
    assert out.feasible and out.model.reproduces(target)
    assert evaluate(ch, target) == 0
    # a PR-box-like point is outside
    pr = Behavior(2, [[half, half], [half, 0]], [half, half], [half, half])
    out = local_model_lp(pr, cands, hints=[ch])
    assert out.status == "infeasible" and out.farkas is not None


def _average(vs):
    n = len(vs)
    m = vs[0].m
    joint = [[Fraction(sum(v.a_bits[x] * v.b_bits[y] for v in vs), n) for y in range(m)] for x in range(m)]
    ma = [Fraction(sum(v.a_bits[x] for v in vs), n) for x in range(m)]
    mb = [Fraction(sum(v.b_bits[y] for v in vs), n) for y in range(m)]
    return joint, ma, mb


def test_certify_yuoh_visibility():
    f = get_functional("yuoh_v_tight")
    cands = [DeterministicVertex(tuple(a), tuple(b)) for a, b in zip(*_arrays(f))]
    rep = certify_critical(f, IDEAL["yu-oh"], 3, "visibility", cands)
    assert rep.certified == "exact"
    assert rep.above.status == "infeasible"
    d = rep.to_dict()
    assert d["critical"] == "19/24" and d["above_critical"]["status"] == "infeasible"


def _arrays(f):
    sat = saturating_vertices(f)
    return sat.a, sat.b


def test_binary_entropy():
    assert abs(binary_entropy(Fraction(1, 4)) - 0.8113) <= 5e-5
    for p in (0, 1):
        assert binary_entropy(p) == 0
    with pytest.raises(ValueError):
        binary_entropy(1.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1))
def test_binary_entropy_matches_reference(p):
    assert math.isclose(binary_entropy(p), h_ref(p), abs_tol=1e-12)
    assert math.isclose(binary_entropy(p), binary_entropy(1 - p), abs_tol=1e-12)


def test_cond_entropy():
    assert cond_entropy_A_given_B(Fraction(1, 4), Fraction(1, 4), Fraction(1, 4)) == 0
    # independent fair bits: one full bit of uncertainty
    assert math.isclose(cond_entropy_A_given_B(Fraction(1, 4), Fraction(1, 2), Fraction(1, 2)), 1.0)
    with pytest.raises(InvalidDistributionError):
        cond_entropy_A_given_B(Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
