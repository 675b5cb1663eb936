import random

import pytest

from convalg import leavitt as lv
from convalg.graphtopos import (
    ConvElement,
    ConvError,
    brute_compose,
    conv_generators,
    conv_mul,
    conv_p,
    conv_star,
    conv_v,
    conv_v_star,
    from_leavitt,
    identity_at,
    indicator,
    local_unit_for,
    lpa_of_matrix,
    random_conv_element,
    random_generator_word,
    to_leavitt,
)
from convalg.scalars import QI, QQ, one, parse_scalar, scalar
from convalg.stonelocale import Clopen, Graph


@pytest.fixture
def twoloop():
    return Graph(["x"], [("a", "x", "x"), ("b", "x", "x")])


def test_middle_contraction(twoloop):
    g = twoloop
    # Z(alpha, beta) . Z(beta, gamma) = Z(alpha, gamma), brute-force checked
    alpha, beta, gamma = ("a",), ("b", "a"), ("a", "b")
    f = ConvElement.make(g, QQ, "x", "x", {("x", alpha, beta): one(QQ)})
    h = ConvElement.make(g, QQ, "x", "x", {("x", beta, gamma): one(QQ)})
    prod = conv_mul(f, h)
    want = ConvElement.make(g, QQ, "x", "x", {("x", alpha, gamma): one(QQ)})
    assert prod.terms == want.terms
    assert brute_compose(f, h).terms == want.terms


def test_ck1_zero(twoloop):
    g = twoloop
    # star(Z(a, eps)) . Z(b, eps) realizes v_a* v_b = 0
    assert conv_mul(conv_star(conv_v(g, QQ, "a")), conv_v(g, QQ, "b")).is_zero()
    r = conv_mul(conv_star(conv_v(g, QQ, "a")), conv_v(g, QQ, "a"))
    assert r.terms == conv_p(g, QQ, "x").terms


def test_refinement_sum_contracts(twoloop):
    g = twoloop
    acc = ConvElement.zero_element(g, QQ, "x", "x")
    for e in ("a", "b"):
        acc = acc.add(conv_mul(conv_v(g, QQ, e), conv_v_star(g, QQ, e)))
    assert acc.terms == conv_p(g, QQ, "x").terms


def test_local_unit_from_support(graphs):
    rng = random.Random(10)
    for name, g in graphs.items():
        if not g.alive:
            continue
        for _ in range(60):
            f = random_conv_element(g, QQ, rng)
            u = local_unit_for(f)
            assert conv_mul(f, u).terms == f.terms, name


def test_identity_is_left_unit(graphs):
    rng = random.Random(11)
    for name, g in graphs.items():
        for _ in range(40):
            f = random_conv_element(g, QQ, rng)
            chi = identity_at(g, QQ, f.src)
            assert conv_mul(chi, f).terms == f.terms


def test_star_properties(twoloop):
    g = twoloop
    rng = random.Random(13)
    for _ in range(200):
        f = random_conv_element(g, QQ, rng)
        h = random_conv_element(g, QQ, rng)
        assert conv_star(conv_star(f)).terms == f.terms
        if f.tgt == h.src:
            assert (
                conv_star(conv_mul(f, h)).terms
                == conv_mul(conv_star(h), conv_star(f)).terms
            )
    c = parse_scalar(QI, "i")
    zi = conv_v(g, QI, "a").scale(c)
    assert conv_star(zi).terms == conv_v_star(g, QI, "a").scale(parse_scalar(QI, "-i")).terms
    p = conv_p(g, QI, "x")
    assert conv_star(p).terms == p.terms


def test_bilinearity_and_associativity_on_basis(twoloop):
    g = twoloop
    gens = conv_generators(g, QQ)
    pairs = [(f, h) for f in gens for h in gens if f.tgt == h.src]
    for f, h in pairs:
        for k in gens:
            if h.tgt != k.src:
                continue
            lhs = conv_mul(conv_mul(f, h), k)
            rhs = conv_mul(f, conv_mul(h, k))
            assert lhs.terms == rhs.terms


def test_brute_oracle_agreement(graphs):
    rng = random.Random(17)
    for name, g in graphs.items():
        if not g.alive:
            continue
        for _ in range(60):
            f = random_conv_element(g, QQ, rng)
            h = random_conv_element(g, QQ, rng)
            if f.tgt == h.src:
                assert conv_mul(f, h).terms == brute_compose(f, h).terms, name


def test_to_leavitt_generator_correspondence(twoloop):
    g = twoloop
    assert to_leavitt(conv_v(g, QQ, "a")).terms == lv.v_edge(g, QQ, "a").terms
    assert to_leavitt(conv_p(g, QQ, "x")).terms == lv.p_vertex(g, QQ, "x").terms


def test_round_trip_and_multiplicativity(graphs):
    rng = random.Random(19)
    for name, g in graphs.items():
        if not g.alive:
            continue
        for _ in range(120):
            f = random_conv_element(g, QQ, rng)
            parts = from_leavitt(to_leavitt(f))
            if f.is_zero():
                assert not parts
                continue
            assert set(parts) == {(f.src, f.tgt)}
            assert parts[(f.src, f.tgt)].terms == f.terms
            h = random_conv_element(g, QQ, rng)
            if f.tgt == h.src:
                assert (
                    to_leavitt(conv_mul(f, h)).terms
                    == lv.lpa_mul(to_leavitt(f), to_leavitt(h)).terms
                )
                assert to_leavitt(conv_star(f)).terms == lv.lpa_star(to_leavitt(f)).terms


def test_from_leavitt_splits_components():
    g = Graph(["x", "y"], [("a", "x", "y"), ("b", "y", "x")])
    u = lv.v_edge(g, QQ, "a").add(lv.p_vertex(g, QQ, "x"))
    parts = from_leavitt(u)
    assert set(parts) == {("y", "x"), ("x", "x")}
    assert lv.lpa_equal(lpa_of_matrix(parts, g, QQ), u)


def test_object_mismatch_raises():
    g = Graph(["x", "y"], [("a", "x", "y"), ("b", "y", "x")])
    f = conv_v(g, QQ, "a")  # y -> x
    with pytest.raises(ConvError):
        conv_mul(f, f)


def test_indicator_of_clopen(twoloop):
    g = twoloop
    u = Clopen.make(g, "x", [("a",)])
    chi = indicator(u, QQ)
    # chi is idempotent and self-adjoint
    assert conv_mul(chi, chi).terms == chi.terms
    assert conv_star(chi).terms == chi.terms
