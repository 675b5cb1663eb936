import random

import pytest

from convalg import linalg
from convalg.convcat import GroupoidFamily, matrix_units_compose
from convalg.finitegroupoid import (
    DegenerateModuleError,
    EquivariantSheaf,
    FiniteGroupoid,
    GpdElement,
    GpdModule,
    GroupoidError,
    cyclic_group_groupoid,
    decompose,
    delta,
    discrete_groupoid,
    disjoint_union,
    functor_S,
    functor_T,
    gpd_convolve,
    gpd_star,
    local_unit_for,
    matrix_units_label,
    pair_groupoid,
    random_gpd_element,
    random_module,
    random_sheaf,
    regular_matrix,
    unit_of,
)
from convalg.scalars import QI, QQ, one, parse_scalar, scalar


def test_validation_catches_bad_tables():
    # missing composition row
    with pytest.raises(GroupoidError):
        FiniteGroupoid(["o"], ["g"], {"g": "o"}, {"g": "o"}, {})
    # non-associative table (g1.g1 = g1 breaks inverses/identities)
    with pytest.raises(GroupoidError):
        FiniteGroupoid(
            ["o"],
            ["g0", "g1"],
            {"g0": "o", "g1": "o"},
            {"g0": "o", "g1": "o"},
            {("g0", "g0"): "g0", ("g0", "g1"): "g1", ("g1", "g0"): "g1", ("g1", "g1"): "g1"},
        )


def test_z2_convolution():
    z2 = cyclic_group_groupoid(2)
    dg = delta(z2, QQ, "g1")
    assert gpd_convolve(dg, dg).coeffs == delta(z2, QQ, "g0").coeffs


def test_pair_groupoid_is_matrix_algebra():
    pg = pair_groupoid(2)
    e12, e21 = delta(pg, QQ, "a12"), delta(pg, QQ, "a21")
    assert gpd_convolve(e12, e21).coeffs == delta(pg, QQ, "a11").coeffs
    assert gpd_convolve(e21, e12).coeffs == delta(pg, QQ, "a22").coeffs
    assert gpd_convolve(e12, e12).is_zero()


def test_identity_deltas_are_local_units(groupoids):
    rng = random.Random(3)
    for name, g in groupoids.items():
        u = unit_of(g, QQ)
        for _ in range(50):
            f = random_gpd_element(g, QQ, rng)
            assert gpd_convolve(f, u).coeffs == f.coeffs
            assert gpd_convolve(u, f).coeffs == f.coeffs
            lu = local_unit_for(f)
            assert gpd_convolve(f, lu).coeffs == f.coeffs


def test_convolution_associative_exhaustive(groupoids):
    for name, g in groupoids.items():
        deltas = [delta(g, QQ, a) for a in g.arrows]
        for f in deltas:
            for h in deltas:
                fh = gpd_convolve(f, h)
                for k in deltas:
                    assert (
                        gpd_convolve(fh, k).coeffs
                        == gpd_convolve(f, gpd_convolve(h, k)).coeffs
                    ), name


def test_star_properties(groupoids):
    rng = random.Random(5)
    for name, g in groupoids.items():
        for _ in range(80):
            f = random_gpd_element(g, QQ, rng)
            h = random_gpd_element(g, QQ, rng)
            assert gpd_star(gpd_star(f)).coeffs == f.coeffs
            assert gpd_star(gpd_convolve(f, h)).coeffs == gpd_convolve(gpd_star(h), gpd_star(f)).coeffs
    z2 = cyclic_group_groupoid(2)
    assert gpd_star(delta(z2, QQ, "g0")).coeffs == delta(z2, QQ, "g0").coeffs
    f = delta(z2, QI, "g1").scale(parse_scalar(QI, "2+i"))
    assert gpd_star(f).coeffs == delta(z2, QI, "g1").scale(parse_scalar(QI, "2-i")).coeffs


def test_decompose_examples():
    pg = pair_groupoid(2)
    dec = decompose(pg)
    assert len(dec) == 1 and len(dec[0].objects) == 2 and len(dec[0].isotropy) == 1
    u = disjoint_union(cyclic_group_groupoid(2), discrete_groupoid(1))
    dec = decompose(u)
    assert [(len(d.objects), len(d.isotropy)) for d in dec] == [(1, 2), (1, 1)]
    empty_iso = decompose(discrete_groupoid(3))
    assert [(len(d.objects), len(d.isotropy)) for d in empty_iso] == [(1, 1)] * 3


def test_dimension_formula(groupoids):
    # |arrows| = sum over orbits of n_i^2 * |G_i|
    for name, g in groupoids.items():
        dec = decompose(g)
        assert len(g.arrows) == sum(len(d.objects) ** 2 * len(d.isotropy) for d in dec), name


def test_matrix_units_oracle(groupoids):
    rng = random.Random(6)
    for name, g in groupoids.items():
        for _ in range(40):
            f = random_gpd_element(g, QQ, rng)
            h = random_gpd_element(g, QQ, rng)
            assert gpd_convolve(f, h).coeffs == matrix_units_compose(f, h).coeffs, name


def test_matrix_units_label_round_trip(groupoids):
    for name, g in groupoids.items():
        dec = decompose(g)
        seen = set()
        for a in g.arrows:
            lab = matrix_units_label(g, dec, a)
            assert lab not in seen
            seen.add(lab)


def test_regular_matrix_is_multiplicative(groupoids):
    rng = random.Random(8)
    for name, g in groupoids.items():
        for _ in range(20):
            f = random_gpd_element(g, QQ, rng)
            h = random_gpd_element(g, QQ, rng)
            lhs = regular_matrix(gpd_convolve(f, h))
            rhs = linalg.matmul(regular_matrix(f), regular_matrix(h))
            assert linalg.mat_equal(lhs, rhs), name


# -- sheaf / module functors ---------------------------------------------------


def test_functor_s_t_trivial_groupoid():
    g = discrete_groupoid(1)
    sheaf = EquivariantSheaf(g, QQ, {"o1": 2}, {"id1": linalg.eye(QQ, 2)})
    mod = functor_S(sheaf)
    assert mod.dim == 2
    back, bases = functor_T(mod)
    assert back.ranks == {"o1": 2}


def test_functor_round_trips_random(groupoids):
    rng = random.Random(21)
    for name, g in groupoids.items():
        for _ in range(8):
            sheaf = random_sheaf(g, QQ, rng, 3)
            mod = functor_S(sheaf)
            back, _ = functor_T(mod)
            assert back.ranks == sheaf.ranks, name
            mod2 = random_module(g, QQ, rng, 3)
            sheaf2, _ = functor_T(mod2)
            assert sum(sheaf2.ranks.values()) == mod2.dim, name


def test_z2_regular_representation_round_trip():
    # the 2-dimensional module where Z/2 permutes coordinates
    z2 = cyclic_group_groupoid(2)
    swap = linalg.mat(QQ, [[0, 1], [1, 0]])
    mod = GpdModule(z2, QQ, 2, {"g0": linalg.eye(QQ, 2), "g1": swap})
    sheaf, _ = functor_T(mod)
    assert sheaf.ranks == {"o": 2}
    assert linalg.mat_equal(sheaf.arr["g1"], swap)


def test_pair_groupoid_morita_example():
    # a rank-1 sheaf on the pair groupoid corresponds to the 2-dimensional
    # module of the 2x2 matrix algebra; the round trip is exact
    pg = pair_groupoid(2)
    one_m = [[one(QQ)]]
    sheaf = EquivariantSheaf(pg, QQ, {"o1": 1, "o2": 1}, {a: one_m for a in pg.arrows})
    mod = functor_S(sheaf)
    assert mod.dim == 2
    # the delta of the arrow o2 -> o1 acts (on row vectors) as a matrix unit
    # sending the o1 component onto the o2 component
    assert linalg.mat_equal(mod.act["a12"], linalg.mat(QQ, [[0, 1], [0, 0]]))
    back, _ = functor_T(mod)
    assert back.ranks == {"o1": 1, "o2": 1}
    assert all(linalg.mat_equal(back.arr[a], one_m) for a in pg.arrows)


def test_functor_s_zero_sheaf(groupoids):
    for name, g in groupoids.items():
        zero_sheaf = EquivariantSheaf(g, QQ, {x: 0 for x in g.objects}, {a: [] for a in g.arrows})
        mod = functor_S(zero_sheaf)
        assert mod.dim == 0


def test_degenerate_module_rejected(groupoids):
    rng = random.Random(30)
    from convalg.equivcore import degenerate_groupoid_module

    for name, g in groupoids.items():
        bad = degenerate_groupoid_module(g, QQ, rng)
        with pytest.raises(DegenerateModuleError) as exc:
            functor_T(bad)
        assert exc.value.witness is not None


def test_nondegeneracy_characterization(groupoids):
    # passes functor_T exactly when the sum of local units acts as identity
    rng = random.Random(33)
    for name, g in groupoids.items():
        m = random_module(g, QQ, rng, 2)
        s = m.local_unit_sum()
        assert linalg.mat_equal(s, linalg.eye(QQ, m.dim))
        functor_T(m)  # should not raise
