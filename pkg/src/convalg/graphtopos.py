"""Convolution elements of the graph path-space family.

An element from anchor x to anchor y is a linear combination of pair
cylinders Z(alpha, beta): alpha ends at x, beta ends at y, both start at a
common source vertex, and Z(alpha, beta) is the clopen set of pairs
(tau+alpha, tau+beta) over infinite tails tau into that vertex.  Products
are computed geometrically, by refining the two middle cylinders over
common tail extensions until they coincide or provably never will; the
result is then renormalized with the same designated-edge normal form that
the Leavitt engine uses, so the two realizations share one canonical form
while multiplying by entirely different mechanics.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .leavitt import (
    GSheaf,
    LpaElement,
    Monomial,
    check_monomial,
    gsheaf_check,
    monomial_str,
    normalize_terms,
    _anchor,
    _term_key,
)
from .scalars import Ring, Scalar, one, zero
from .stonelocale import Clopen, Graph, Path

__all__ = [
    "ConvElement",
    "conv_mul",
    "conv_star",
    "brute_compose",
    "to_leavitt",
    "from_leavitt",
    "lpa_of_matrix",
    "indicator",
    "identity_at",
    "local_unit_for",
    "conv_p",
    "conv_v",
    "conv_v_star",
    "conv_generators",
    "random_generator_word",
    "random_conv_element",
    "GSheaf",
    "gsheaf_check",
    "ConvError",
]


class ConvError(ValueError):
    pass


@dataclass(frozen=True)
class ConvElement:
    """A normal-form section of the pair space over (anchor src, anchor tgt)."""

    graph: Graph
    ring: Ring
    src: str
    tgt: str
    terms: Tuple[Tuple[Monomial, Scalar], ...]

    @staticmethod
    def make(g: Graph, ring: Ring, src: str, tgt: str, terms: Dict[Monomial, Scalar]) -> "ConvElement":
        for m in terms:
            check_monomial(g, m)
            v, al, be = m
            if _anchor(g, v, al) != src or _anchor(g, v, be) != tgt:
                raise ConvError(f"term {monomial_str(m)} does not run {src} -> {tgt}")
        nf = normalize_terms(g, ring, dict(terms))
        ordered = tuple(sorted(nf.items(), key=lambda mc: _term_key(g, mc[0])))
        return ConvElement(g, ring, src, tgt, ordered)

    @staticmethod
    def zero_element(g: Graph, ring: Ring, src: str, tgt: str) -> "ConvElement":
        return ConvElement(g, ring, src, tgt, ())

    def is_zero(self) -> bool:
        return not self.terms

    def terms_dict(self) -> Dict[Monomial, Scalar]:
        return dict(self.terms)

    def add(self, other: "ConvElement") -> "ConvElement":
        self._ctx(other)
        if (self.src, self.tgt) != (other.src, other.tgt):
            raise ConvError("cannot add elements with different endpoints")
        acc = self.terms_dict()
        for m, c in other.terms:
            acc[m] = acc.get(m, zero(self.ring)) + c
        return ConvElement.make(self.graph, self.ring, self.src, self.tgt, acc)

    def neg(self) -> "ConvElement":
        return ConvElement(self.graph, self.ring, self.src, self.tgt, tuple((m, -c) for m, c in self.terms))

    def sub(self, other: "ConvElement") -> "ConvElement":
        return self.add(other.neg())

    def scale(self, s: Scalar) -> "ConvElement":
        if s.is_zero():
            return ConvElement.zero_element(self.graph, self.ring, self.src, self.tgt)
        return ConvElement.make(self.graph, self.ring, self.src, self.tgt, {m: s * c for m, c in self.terms})

    def _ctx(self, other: "ConvElement"):
        if self.graph is not other.graph or self.ring != other.ring:
            raise ConvError("algebra context mismatch")

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for (v, al, be), c in self.terms:
            bits.append(f"{c} * Z({self.src}: {'.'.join(al)} | {self.tgt}: {'.'.join(be)})")
        return " + ".join(bits)


def _matching_tails(g: Graph, mid_anchor: str, short: Path, long_: Path) -> List[Path]:
    """Tails tau with tau + short == long_, found by refining cylinder `short`.

    Walks one prepended edge at a time, discarding refinements that already
    disagree with `long_`; the walk depth is |long_| - |short|, which bounds
    the refinement as required.
    """
    # the refinement depth is the length difference, bounded by the middle sizes
    need = len(long_) - len(short)
    assert 0 <= need <= len(long_) + len(short)
    if short and long_[need:] != short:
        return []
    results: List[Path] = []

    def grow(tau: Path):
        k = len(tau)
        if k == need:
            if tau + short == long_:
                results.append(tau)
            return
        at = g.path_src(mid_anchor, tau + short)
        want = long_[need - k - 1]
        for e in g.alive_edges_into[at]:
            if e == want:
                grow((e,) + tau)

    grow(())
    return results


def conv_mul(f: ConvElement, h: ConvElement) -> ConvElement:
    """Composition of pair-cylinder sections by middle refinement."""
    f._ctx(h)
    if f.tgt != h.src:
        raise ConvError(f"cannot compose {f.src}->{f.tgt} with {h.src}->{h.tgt}")
    g, ring = f.graph, f.ring
    mid = f.tgt
    acc: Dict[Monomial, Scalar] = {}
    for (v1, al, be), c in f.terms:
        for (v2, ga, de), d in h.terms:
            if len(be) <= len(ga):
                for tau in _matching_tails(g, mid, be, ga):
                    key = (v2, tau + al, de)
                    acc[key] = acc.get(key, zero(ring)) + c * d
            else:
                for tau in _matching_tails(g, mid, ga, be):
                    key = (v1, al, tau + de)
                    acc[key] = acc.get(key, zero(ring)) + c * d
    return ConvElement.make(g, ring, f.src, h.tgt, acc)


def conv_star(f: ConvElement) -> ConvElement:
    acc = {(v, be, al): c.star() for (v, al, be), c in f.terms}
    return ConvElement.make(f.graph, f.ring, f.tgt, f.src, acc)


def brute_compose(f: ConvElement, h: ConvElement) -> ConvElement:
    """Test oracle: refine every term pair to the full common middle depth.

    Enumerates all tails without pruning and keeps the matches; exponential
    but independent of both the pruned refinement and the word rewriting.
    """
    f._ctx(h)
    if f.tgt != h.src:
        raise ConvError("object mismatch")
    g, ring = f.graph, f.ring
    mid = f.tgt
    acc: Dict[Monomial, Scalar] = {}
    for (v1, al, be), c in f.terms:
        for (v2, ga, de), d in h.terms:
            depth = max(len(be), len(ga))
            for tau in g.tails_into(g.path_src(mid, be), depth - len(be)):
                for rho in g.tails_into(g.path_src(mid, ga), depth - len(ga)):
                    if tau + be == rho + ga:
                        key = (g.path_src(mid, tau + be), tau + al, rho + de)
                        acc[key] = acc.get(key, zero(ring)) + c * d
    return ConvElement.make(g, ring, f.src, h.tgt, acc)


# -- bridge to the Leavitt realization ---------------------------------------


def to_leavitt(f: ConvElement) -> LpaElement:
    """Z(alpha, beta) corresponds to v_alpha v_beta*; same keys, same normal form."""
    return LpaElement.make(f.graph, f.ring, f.terms_dict())


def from_leavitt(u: LpaElement) -> Dict[Tuple[str, str], ConvElement]:
    """Split an algebra element into its matrix of components between anchors."""
    g, ring = u.graph, u.ring
    buckets: Dict[Tuple[str, str], Dict[Monomial, Scalar]] = {}
    for (v, al, be), c in u.terms:
        key = (_anchor(g, v, al), _anchor(g, v, be))
        buckets.setdefault(key, {})[(v, al, be)] = c
    return {k: ConvElement.make(g, ring, k[0], k[1], t) for k, t in buckets.items()}


def lpa_of_matrix(parts: Dict[Tuple[str, str], ConvElement], g: Graph, ring: Ring) -> LpaElement:
    total = LpaElement.zero_element(g, ring)
    for part in parts.values():
        total = total.add(to_leavitt(part))
    return total


# -- diagonal indicators and units -------------------------------------------


def indicator(u: Clopen, ring: Ring) -> ConvElement:
    """The diagonal indicator of a clopen: the multiplication operator chi_U."""
    g = u.graph
    terms: Dict[Monomial, Scalar] = {}
    for p in u.cylinders:
        terms[(g.path_src(u.anchor, p), p, p)] = one(ring)
    return ConvElement.make(g, ring, u.anchor, u.anchor, terms)


def identity_at(g: Graph, ring: Ring, x: str) -> ConvElement:
    return indicator(Clopen.full(g, x), ring)


def local_unit_for(f: ConvElement) -> ConvElement:
    """A diagonal indicator u with f * u = f, built from the target support of f."""
    support = Clopen.make(f.graph, f.tgt, [be for (_, _, be), _ in f.terms])
    if support.is_empty():
        return identity_at(f.graph, f.ring, f.tgt) if f.tgt in f.graph.alive else ConvElement.zero_element(
            f.graph, f.ring, f.tgt, f.tgt
        )
    return indicator(support, f.ring)


# -- generators ---------------------------------------------------------------


def conv_p(g: Graph, ring: Ring, x: str) -> ConvElement:
    return ConvElement.make(g, ring, x, x, {(x, (), ()): one(ring)})


def conv_v(g: Graph, ring: Ring, e: str) -> ConvElement:
    # v_e runs from the target anchor of e to its source anchor
    return ConvElement.make(g, ring, g.tgt[e], g.src[e], {(g.src[e], (e,), ()): one(ring)})


def conv_v_star(g: Graph, ring: Ring, e: str) -> ConvElement:
    return ConvElement.make(g, ring, g.src[e], g.tgt[e], {(g.src[e], (), (e,)): one(ring)})


def conv_generators(g: Graph, ring: Ring) -> List[ConvElement]:
    gens = [conv_p(g, ring, v) for v in g.vertices]
    for e in g.edge_names:
        gens.append(conv_v(g, ring, e))
        gens.append(conv_v_star(g, ring, e))
    return gens


def random_generator_word(g: Graph, ring: Ring, rng: random.Random, max_len: int) -> List[ConvElement]:
    """A composable word of generators, as a list (leftmost applied first)."""
    gens = conv_generators(g, ring)
    first = gens[rng.randrange(len(gens))]
    word = [first]
    n = rng.randint(1, max_len)
    while len(word) < n:
        options = [h for h in gens if h.src == word[-1].tgt]
        if not options:
            break
        word.append(options[rng.randrange(len(options))])
    return word


def random_conv_element(g: Graph, ring: Ring, rng: random.Random, max_len: int = 3, summands: int = 2) -> ConvElement:
    """Random element with all terms between a common pair of anchors."""
    for _ in range(200):
        word = random_generator_word(g, ring, rng, max_len)
        acc = word[0]
        for h in word[1:]:
            acc = conv_mul(acc, h)
        coeff = Scalar(ring, Fraction(rng.randint(-3, 3)))
        acc = acc.scale(coeff)
        for _ in range(summands - 1):
            extra = _random_between(g, ring, rng, acc.src, acc.tgt, max_len)
            if extra is not None:
                acc = acc.add(extra)
        return acc
    raise ConvError("failed to build a random element")


def _random_between(g: Graph, ring: Ring, rng: random.Random, x: str, y: str, max_len: int) -> Optional[ConvElement]:
    for _ in range(50):
        word = random_generator_word(g, ring, rng, max_len)
        acc = word[0]
        for h in word[1:]:
            acc = conv_mul(acc, h)
        if (acc.src, acc.tgt) == (x, y):
            return acc.scale(Scalar(ring, Fraction(rng.randint(-3, 3))))
    return None
