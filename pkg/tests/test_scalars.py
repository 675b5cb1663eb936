import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convalg.scalars import (
    QI,
    QQ,
    Ring,
    Scalar,
    ScalarError,
    ZZ,
    inv_nat,
    one,
    parse_scalar,
    scalar,
    z_localized,
    zero,
)

RINGS = [ZZ, QQ, z_localized(2), z_localized(5), QI]


def random_scalar(ring, rng):
    if ring.kind == "Z":
        return scalar(ring, rng.randint(-20, 20))
    if ring.kind == "Z1p":
        return Scalar(ring, Fraction(rng.randint(-20, 20), ring.p ** rng.randint(0, 3)))
    if ring.kind == "Qi":
        return Scalar(
            ring,
            Fraction(rng.randint(-10, 10), rng.randint(1, 9)),
            Fraction(rng.randint(-10, 10), rng.randint(1, 9)),
        )
    return Scalar(ring, Fraction(rng.randint(-20, 20), rng.randint(1, 12)))


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.name)
def test_ring_axioms_randomized(ring):
    rng = random.Random(20250810)
    for _ in range(1000):
        a, b, c = (random_scalar(ring, rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        assert a + zero(ring) == a
        assert a * one(ring) == a


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.name)
def test_parse_print_round_trip(ring):
    rng = random.Random(7)
    for _ in range(500):
        a = random_scalar(ring, rng)
        assert parse_scalar(ring, str(a)) == a


def test_star_examples():
    assert parse_scalar(QQ, "3/2").star() == parse_scalar(QQ, "3/2")
    assert parse_scalar(QI, "2+i").star() == parse_scalar(QI, "2-i")
    x = parse_scalar(QI, "1+3i")
    assert x.star().star() == x


@pytest.mark.parametrize("ring", RINGS, ids=lambda r: r.name)
def test_star_is_involutive_antihomomorphism(ring):
    rng = random.Random(99)
    for _ in range(500):
        a, b = random_scalar(ring, rng), random_scalar(ring, rng)
        assert (a + b).star() == a.star() + b.star()
        assert (a * b).star() == b.star() * a.star()
        assert a.star().star() == a


def test_inv_nat():
    assert inv_nat(z_localized(2), 2) == Scalar(z_localized(2), Fraction(1, 2))
    assert inv_nat(ZZ, 2) is None
    assert inv_nat(ZZ, 1) == one(ZZ)
    assert inv_nat(QQ, 6) == Scalar(QQ, Fraction(1, 6))
    assert inv_nat(z_localized(2), 8) is not None
    assert inv_nat(z_localized(2), 6) is None
    assert inv_nat(QI, 7) is not None


def test_ring_descriptor_invariants():
    with pytest.raises(ScalarError):
        Ring("Z1p", 4)  # not prime
    with pytest.raises(ScalarError):
        Ring("Q", 3)  # no parameter allowed
    with pytest.raises(ScalarError):
        Scalar(QQ, Fraction(1), Fraction(1))  # imaginary part outside Q(i)
    with pytest.raises(ScalarError):
        Scalar(ZZ, Fraction(1, 2))
    with pytest.raises(ScalarError):
        Scalar(z_localized(2), Fraction(1, 3))


def test_units_and_inverse():
    assert scalar(ZZ, -1).is_unit() and not scalar(ZZ, 2).is_unit()
    assert Scalar(z_localized(2), Fraction(4)).is_unit()
    assert not Scalar(z_localized(2), Fraction(3)).is_unit()
    x = parse_scalar(QI, "1+2i")
    assert x * x.inverse() == one(QI)


def test_zloc_printing_uses_power_form():
    z2 = z_localized(2)
    assert str(Scalar(z2, Fraction(3, 8))) == "3/2^3"
    assert str(Scalar(z2, Fraction(3, 2))) == "3/2"
    assert parse_scalar(z2, "3/2^3") == Scalar(z2, Fraction(3, 8))


@given(
    n=st.integers(min_value=-999, max_value=999),
    d=st.integers(min_value=1, max_value=999),
    m=st.integers(min_value=-999, max_value=999),
)
@settings(max_examples=200, deadline=None)
def test_gaussian_parse_round_trip_hypothesis(n, d, m):
    x = Scalar(QI, Fraction(n, d), Fraction(m, d))
    assert parse_scalar(QI, str(x)) == x


@given(st.integers(min_value=1, max_value=500))
@settings(max_examples=100, deadline=None)
def test_inv_nat_defining_property(n):
    for ring in (QQ, QI, z_localized(3)):
        r = inv_nat(ring, n)
        if r is not None:
            assert r * scalar(ring, n) == one(ring)
