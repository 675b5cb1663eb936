"""The double-coset algebroid on the tower Z/p^k.

A morphism from level k to level k' is an invariant kernel on
Z/p^k x Z/p^k', i.e. a function c on Z/p^m with m = min(k, k'), viewed as
gamma(x, y) = c(y - x mod p^m).  Composition is kernel composition

    (f . g)(x, z) = sum over y in Z/p^{k'} of f(x, y) g(y, z),

which for class functions reduces to the closed form

    (f . g)[w] = p^(k' - max(m1, m2)) * sum over (a, b) with
                 a + b = w  (mod p^mu)  of  f[a] g[b],

where m1 = min(k, k'), m2 = min(k', k''), mu = min(m1, m2), and each pair
(a, b) spreads over the p^(m3 - mu) classes w above a+b (m3 = min(k, k'')).
The oracle `compose_oracle` instead lifts both kernels to the common finite
quotient Z/p^N, convolves there, divides by the fiber size p^(N - k') and
restricts; agreement of the two routes is part of the acceptance suite.

Construction requires 1/p in the coefficient ring, mirroring the
admissibility constraint of the ambient theory.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from .scalars import Ring, Scalar, inv_nat, one, zero


class HeckeError(ValueError):
    pass


class HeckeRingError(HeckeError):
    """The coefficient ring does not invert p."""


_RING_OK = set()


def _check_ring(ring: Ring, p: int):
    key = (ring, p)
    if key in _RING_OK:
        return
    if inv_nat(ring, p) is None:
        raise HeckeRingError(f"{ring.name} does not invert {p}")
    _RING_OK.add(key)


@dataclass(frozen=True)
class TowerElement:
    """A morphism level k_src -> k_tgt given by its double-coset class values."""

    p: int
    k_src: int
    k_tgt: int
    ring: Ring
    values: Tuple[Scalar, ...]  # indexed by Z/p^min(k_src, k_tgt)

    def __post_init__(self):
        _check_ring(self.ring, self.p)
        m = min(self.k_src, self.k_tgt)
        if len(self.values) != self.p ** m:
            raise HeckeError(f"expected {self.p ** m} class values, got {len(self.values)}")

    @property
    def level_min(self) -> int:
        return min(self.k_src, self.k_tgt)

    @staticmethod
    def make(p: int, k_src: int, k_tgt: int, ring: Ring, values) -> "TowerElement":
        vals = tuple(v if isinstance(v, Scalar) else Scalar(ring, Fraction(v)) for v in values)
        return TowerElement(p, k_src, k_tgt, ring, vals)

    @staticmethod
    def zero_element(p: int, k_src: int, k_tgt: int, ring: Ring) -> "TowerElement":
        return TowerElement.make(p, k_src, k_tgt, ring, [zero(ring)] * p ** min(k_src, k_tgt))

    @staticmethod
    def delta(p: int, k_src: int, k_tgt: int, ring: Ring, cls: int) -> "TowerElement":
        m = min(k_src, k_tgt)
        vals = [zero(ring)] * p ** m
        vals[cls % p ** m] = one(ring)
        return TowerElement(p, k_src, k_tgt, ring, tuple(vals))

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values)

    def add(self, other: "TowerElement") -> "TowerElement":
        self._ctx(other)
        if (self.k_src, self.k_tgt) != (other.k_src, other.k_tgt):
            raise HeckeError("cannot add elements between different levels")
        return TowerElement(
            self.p, self.k_src, self.k_tgt, self.ring,
            tuple(a + b for a, b in zip(self.values, other.values)),
        )

    def neg(self) -> "TowerElement":
        return TowerElement(self.p, self.k_src, self.k_tgt, self.ring, tuple(-v for v in self.values))

    def sub(self, other: "TowerElement") -> "TowerElement":
        return self.add(other.neg())

    def scale(self, s: Scalar) -> "TowerElement":
        return TowerElement(self.p, self.k_src, self.k_tgt, self.ring, tuple(s * v for v in self.values))

    def kernel(self, x: int, y: int) -> Scalar:
        """gamma(x, y) for x in Z/p^k_src, y in Z/p^k_tgt."""
        return self.values[(y - x) % self.p ** self.level_min]

    def support(self):
        """Cached list of (class index, nonzero value)."""
        cached = getattr(self, "_support", None)
        if cached is None:
            cached = [(a, v) for a, v in enumerate(self.values) if not v.is_zero()]
            object.__setattr__(self, "_support", cached)
        return cached

    def _ctx(self, other: "TowerElement"):
        if self.p != other.p or self.ring != other.ring:
            raise HeckeError("tower context mismatch")

    def __str__(self):
        vals = ", ".join(str(v) for v in self.values)
        return f"p={self.p} k={self.k_src}->{self.k_tgt} [{vals}]"


def identity_element(p: int, k: int, ring: Ring) -> TowerElement:
    return TowerElement.delta(p, k, k, ring, 0)


def hecke_compose(f: TowerElement, g: TowerElement) -> TowerElement:
    """Kernel composition over the middle level, via the derived closed form."""
    f._ctx(g)
    if f.k_tgt != g.k_src:
        raise HeckeError(f"level mismatch: {f.k_src}->{f.k_tgt} then {g.k_src}->{g.k_tgt}")
    p, ring = f.p, f.ring
    m1, m2 = f.level_min, g.level_min
    m3 = min(f.k_src, g.k_tgt)
    mu = min(m1, m2)
    scale_pow = f.k_tgt - max(m1, m2)
    assert scale_pow >= 0 and mu <= m3
    scale = Scalar(ring, Fraction(p ** scale_pow)) if scale_pow else None
    out = [zero(ring)] * p ** m3
    spread = p ** (m3 - mu)
    pmu = p ** mu
    for a, fa in f.support():
        for b, gb in g.support():
            contrib = fa * gb
            if scale is not None:
                contrib = scale * contrib
            base = (a + b) % pmu
            for t in range(spread):
                w = base + t * pmu
                out[w] = out[w] + contrib
    return TowerElement(p, f.k_src, g.k_tgt, ring, tuple(out))


def hecke_star(f: TowerElement) -> TowerElement:
    """Swap source and target: value at class c becomes conj of value at -c."""
    m = f.level_min
    pm = f.p ** m
    vals = tuple(f.values[(-c) % pm].star() for c in range(pm))
    return TowerElement(f.p, f.k_tgt, f.k_src, f.ring, vals)


def compose_oracle(f: TowerElement, g: TowerElement) -> TowerElement:
    """Independent route: lift to Z/p^N, convolve, average out the lift fibers.

    N = max of the three levels; lifting the middle sum from Z/p^{k'} to
    Z/p^N overcounts each middle point p^(N-k') times, so the group
    convolution is divided by that power (this is where 1/p is genuinely
    used).
    """
    f._ctx(g)
    if f.k_tgt != g.k_src:
        raise HeckeError("level mismatch")
    p, ring = f.p, f.ring
    n_lvl = max(f.k_src, f.k_tgt, g.k_tgt)
    pn = p ** n_lvl
    m1, m2 = f.level_min, g.level_min
    m3 = min(f.k_src, g.k_tgt)
    lift_f = [f.values[t % p ** m1] for t in range(pn)]
    lift_g = [g.values[t % p ** m2] for t in range(pn)]
    weight = inv_nat(ring, p ** (n_lvl - f.k_tgt))
    assert weight is not None
    support_f = [t for t in range(pn) if not lift_f[t].is_zero()]
    out = []
    for w in range(p ** m3):
        acc = zero(ring)
        for t in support_f:
            gv = lift_g[(w - t) % pn]
            if not gv.is_zero():
                acc = acc + lift_f[t] * gv
        out.append(weight * acc)
    return TowerElement(p, f.k_src, g.k_tgt, ring, tuple(out))


def basis(p: int, k_src: int, k_tgt: int, ring: Ring) -> List[TowerElement]:
    m = min(k_src, k_tgt)
    return [TowerElement.delta(p, k_src, k_tgt, ring, c) for c in range(p ** m)]


def kernel_matrix(f: TowerElement) -> List[List[Scalar]]:
    """The full kernel as a p^k_tgt x p^k_src matrix (rows = target points)."""
    p = f.p
    rows = p ** f.k_tgt
    cols = p ** f.k_src
    return [[f.kernel(x, y) for x in range(cols)] for y in range(rows)]


def random_element(p: int, k_src: int, k_tgt: int, ring: Ring, rng: random.Random) -> TowerElement:
    m = min(k_src, k_tgt)
    vals = [Scalar(ring, Fraction(rng.randint(-3, 3))) for _ in range(p ** m)]
    return TowerElement.make(p, k_src, k_tgt, ring, vals)
