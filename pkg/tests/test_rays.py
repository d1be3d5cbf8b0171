from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_independence_number
from sicbell.io import SchemaError
from sicbell.rays import (CompatGraph, NoIsomorphismError, RaySet, SicCertificate, UnknownSetError, build_rayset,
                          check_sic_certificate, compatibility_graph, dumps_rayset, expected_structure,
                          find_class_certificate, find_uniform_certificate, independence_number, is_ks_assignment,
                          ks_assignments, ks_colorable, loads_rayset, maximal_cliques_of_size, verify_labeling,
                          weighted_projector_sum)


@pytest.fixture(scope="module", params=["ks18", "yu-oh"])
def catalog(request):
    rs = build_rayset(request.param)
    return rs, compatibility_graph(rs)


def test_catalog_sizes():
    ks, yo = build_rayset("ks18"), build_rayset("yu-oh")
    assert (ks.n, ks.dim) == (18, 4)
    assert (yo.n, yo.dim) == (13, 3)
    assert len(compatibility_graph(ks).edges) == 63
    assert len(compatibility_graph(yo).edges) == 24


def test_degree_sequences():
    assert compatibility_graph(build_rayset("ks18")).degrees() == [7] * 18
    assert compatibility_graph(build_rayset("yu-oh")).degrees() == [4] * 9 + [3] * 4


def test_yuoh_first_three_rays_are_a_basis():
    rs = build_rayset("yu-oh")
    assert sorted(r.components for r in rs.rays[:3]) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_ks18_has_nine_bases():
    g = compatibility_graph(build_rayset("ks18"))
    bases = maximal_cliques_of_size(g, 4)
    assert len(bases) == 9
    # every ray lies in exactly two bases
    assert all(sum(v in b for b in bases) == 2 for v in range(18))


def test_unknown_set():
    with pytest.raises(UnknownSetError):
        build_rayset("foo")


def test_single_ray_has_no_edges():
    assert len(compatibility_graph(RaySet("one", 3, ((1, 2, 3),))).edges) == 0


def test_labeling_matches_expected(catalog):
    rs, g = catalog
    perm = verify_labeling(g, expected_structure(rs.name))
    assert sorted(perm) == list(range(g.n))


def test_labeling_mismatch_raises():
    g = compatibility_graph(build_rayset("ks18"))
    with pytest.raises(NoIsomorphismError):
        verify_labeling(g, expected_structure("yu-oh"))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from([-3, -2, -1, 1, 2, 5]), min_size=18, max_size=18))
def test_graph_invariant_under_rescaling(factors):
    rs = build_rayset("ks18")
    assert compatibility_graph(rs.scaled(factors)).edges == compatibility_graph(rs).edges


def test_independence_number_matches_brute_force(catalog):
    rs, g = catalog
    edges = [tuple(e) for e in g.edges]
    assert independence_number(g) == brute_independence_number(g.n, edges)


def test_yuoh_independence_number_is_five():
    # a basis ray together with the four all-(+-1) rays
    g = compatibility_graph(build_rayset("yu-oh"))
    assert independence_number(g) == 5
    assert all(not g.adjacent(u, v) for u in (0, 9, 10, 11) for v in (9, 10, 11, 12) if u != v)


def test_ks18_not_colorable_yuoh_colorable():
    assert ks_colorable(compatibility_graph(build_rayset("ks18")), 4) is None
    g = compatibility_graph(build_rayset("yu-oh"))
    a = ks_colorable(g, 3)
    assert a is not None and is_ks_assignment(g, 3, a.bits)


def test_single_clique_has_d_assignments():
    d = 4
    g = CompatGraph(d, frozenset(frozenset((i, j)) for i in range(d) for j in range(i + 1, d)))
    got = {a.bits for a in ks_assignments(g, d)}
    assert len(got) == d


def test_projector_sums_are_multiples_of_identity():
    yo = build_rayset("yu-oh")
    M = weighted_projector_sum(yo, [1] * 13)
    assert M == [[Fraction(13, 3) if i == j else 0 for j in range(3)] for i in range(3)]


def test_uniform_six_over_25_fails_independence():
    yo = build_rayset("yu-oh")
    rep = check_sic_certificate(yo, SicCertificate((Fraction(6, 25),) * 13, Fraction(24, 25)))
    assert rep.operator_ok and not rep.independence_ok
    assert rep.max_independent_weight == Fraction(6, 5)


def test_complete_basis_never_certifies():
    basis = RaySet("basis", 3, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    for w in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        assert not check_sic_certificate(basis, SicCertificate((w,) * 3, Fraction(9, 10)))
    assert find_class_certificate(basis) is None


def test_certificates_found_for_both_sets():
    ks = build_rayset("ks18")
    cert = find_uniform_certificate(ks)
    assert cert is not None and check_sic_certificate(ks, cert)
    yo = build_rayset("yu-oh")
    assert find_uniform_certificate(yo) is None
    cert = find_class_certificate(yo)
    assert cert is not None and check_sic_certificate(yo, cert)
    assert cert.y == Fraction(33, 35)


def test_text_roundtrip():
    rs = build_rayset("yu-oh")
    back = loads_rayset(dumps_rayset(rs), rs.name)
    assert back == rs


@pytest.mark.parametrize("text", ["", "dim 3\n1 0 0\n", "dim 3 2\n1 0 0\n", "dim 3 1\n1 0\n",
                                  "dim 3 1\n1 x 0\n", "dim 3 2\n1 0 0\n2 0 0\n"])
def test_text_format_errors(text):
    with pytest.raises(SchemaError):
        loads_rayset(text)
