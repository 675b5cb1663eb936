"""Leavitt path algebras by generators and relations, with a rewriting normal form.

Conventions follow the graph path-space picture: a path (a_1, ..., a_n)
composes head to tail (tgt(a_i) = src(a_{i+1})) and ends at its anchor
tgt(a_n).  The generator v_a of an edge a satisfies

    p_e* = p_e,  p_e p_e' = delta p_e,
    v_a p_{s(a)} = p_{t(a)} v_a = v_a,
    v_a* v_b = delta_{a,b} p_{s(a)},
    p_e = sum over edges x with t(x) = e of v_x v_x*,

i.e. a vertex is refined by its *incoming* edges.  A monomial v_alpha
v_beta* is keyed by (v, alpha, beta) where v is the common source vertex of
the two paths.  The product relation expands a vertex into incoming edges;
rewriting orients it in the contracting direction through one designated
(least live) incoming edge per vertex, which yields a terminating system.
Monomials whose source vertex carries no infinite backward path are zero.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from . import linalg
from .scalars import Ring, Scalar, one, zero
from .stonelocale import Graph, Path

Monomial = Tuple[str, Path, Path]  # (source vertex, alpha, beta)


class LpaError(ValueError):
    pass


class ModuleError(ValueError):
    pass


def _anchor(g: Graph, v: str, path: Path) -> str:
    return g.tgt[path[-1]] if path else v


def check_monomial(g: Graph, m: Monomial):
    v, al, be = m
    if v not in g.vertices:
        raise LpaError(f"unknown vertex {v}")
    g.check_path(_anchor(g, v, al), al)
    g.check_path(_anchor(g, v, be), be)
    if g.path_src(_anchor(g, v, al), al) != v or g.path_src(_anchor(g, v, be), be) != v:
        raise LpaError(f"paths of {m} do not share source {v}")


def _reducible(g: Graph, m: Monomial) -> bool:
    _, al, be = m
    if not al or not be or al[0] != be[0]:
        return False
    e = al[0]
    return g.designated[g.tgt[e]] == e


def normalize_terms(g: Graph, ring: Ring, terms: Dict[Monomial, Scalar]) -> Dict[Monomial, Scalar]:
    """Designated-edge normal form of a monomial combination."""
    result: Dict[Monomial, Scalar] = {}
    stack: List[Tuple[Monomial, Scalar]] = list(terms.items())
    while stack:
        mono, c = stack.pop()
        if c.is_zero():
            continue
        v, al, be = mono
        if v not in g.alive:
            continue
        if _reducible(g, mono):
            e = al[0]
            w = g.tgt[e]
            contracted = (w, al[1:], be[1:])
            assert len(al[1:]) + len(be[1:]) < len(al) + len(be)  # measure decreases
            stack.append((contracted, c))
            for f in g.alive_edges_into[w]:
                if f != e:
                    key = (g.src[f], (f,) + al[1:], (f,) + be[1:])
                    result[key] = result.get(key, zero(ring)) - c
        else:
            result[mono] = result.get(mono, zero(ring)) + c
    return {m: c for m, c in result.items() if not c.is_zero()}


def _term_key(g: Graph, m: Monomial):
    v, al, be = m
    return (g.path_key(al), g.path_key(be), g.vertices.index(v))


@dataclass(frozen=True)
class LpaElement:
    """An element of L_K(G) in rewriting normal form (sorted term tuple)."""

    graph: Graph
    ring: Ring
    terms: Tuple[Tuple[Monomial, Scalar], ...]

    @staticmethod
    def make(g: Graph, ring: Ring, terms: Dict[Monomial, Scalar]) -> "LpaElement":
        for m in terms:
            check_monomial(g, m)
        nf = normalize_terms(g, ring, dict(terms))
        ordered = tuple(sorted(nf.items(), key=lambda mc: _term_key(g, mc[0])))
        return LpaElement(g, ring, ordered)

    @staticmethod
    def zero_element(g: Graph, ring: Ring) -> "LpaElement":
        return LpaElement(g, ring, ())

    def terms_dict(self) -> Dict[Monomial, Scalar]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _ctx(self, other: "LpaElement"):
        if self.graph is not other.graph or self.ring != other.ring:
            raise LpaError("algebra context mismatch")

    def add(self, other: "LpaElement") -> "LpaElement":
        self._ctx(other)
        acc = self.terms_dict()
        for m, c in other.terms:
            acc[m] = acc.get(m, zero(self.ring)) + c
        return LpaElement.make(self.graph, self.ring, acc)

    def neg(self) -> "LpaElement":
        return LpaElement(self.graph, self.ring, tuple((m, -c) for m, c in self.terms))

    def sub(self, other: "LpaElement") -> "LpaElement":
        return self.add(other.neg())

    def scale(self, s: Scalar) -> "LpaElement":
        if s.is_zero():
            return LpaElement.zero_element(self.graph, self.ring)
        return LpaElement.make(self.graph, self.ring, {m: s * c for m, c in self.terms})

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c} * {monomial_str(m)}" for m, c in self.terms)


def monomial_str(m: Monomial) -> str:
    v, al, be = m
    parts = []
    if al:
        parts.append(f"v[{'.'.join(al)}]")
    if be:
        parts.append(f"w[{'.'.join(be)}]")
    if not parts:
        return f"p[{v}]"
    return " * ".join(parts)


# -- generators -------------------------------------------------------------


def p_vertex(g: Graph, ring: Ring, v: str) -> LpaElement:
    return LpaElement.make(g, ring, {(v, (), ()): one(ring)})


def v_edge(g: Graph, ring: Ring, e: str) -> LpaElement:
    return LpaElement.make(g, ring, {(g.src[e], (e,), ()): one(ring)})


def v_star_edge(g: Graph, ring: Ring, e: str) -> LpaElement:
    return LpaElement.make(g, ring, {(g.src[e], (), (e,)): one(ring)})


def unit_element(g: Graph, ring: Ring) -> LpaElement:
    acc: Dict[Monomial, Scalar] = {}
    for v in g.vertices:
        acc[(v, (), ())] = one(ring)
    return LpaElement.make(g, ring, acc)


# -- multiplication ---------------------------------------------------------


def _mono_mul(g: Graph, m1: Monomial, m2: Monomial) -> Optional[Monomial]:
    """Product of two monomials before renormalization; None when it is zero.

    v_al v_be* . v_ga v_de* contracts the middle pair: nonzero only when one
    of be, ga is an anchor-side extension of the other.
    """
    v1, al, be = m1
    v2, ga, de = m2
    if _anchor(g, v1, be) != _anchor(g, v2, ga):
        return None
    if len(ga) >= len(be):
        if ga[len(ga) - len(be) :] == be:
            tau = ga[: len(ga) - len(be)]
            return (v2, tau + al, de)
        return None
    if be[len(be) - len(ga) :] == ga:
        tau = be[: len(be) - len(ga)]
        return (v1, al, tau + de)
    return None


def lpa_mul(u: LpaElement, v: LpaElement) -> LpaElement:
    u._ctx(v)
    g, ring = u.graph, u.ring
    acc: Dict[Monomial, Scalar] = {}
    for m1, c1 in u.terms:
        for m2, c2 in v.terms:
            m = _mono_mul(g, m1, m2)
            if m is not None:
                acc[m] = acc.get(m, zero(ring)) + c1 * c2
    return LpaElement.make(g, ring, acc)


def lpa_star(u: LpaElement) -> LpaElement:
    acc = {(v, be, al): c.star() for (v, al, be), c in u.terms}
    return LpaElement.make(u.graph, u.ring, acc)


def lpa_equal(u: LpaElement, v: LpaElement) -> bool:
    u._ctx(v)
    return u.terms == v.terms


# -- expansion oracle --------------------------------------------------------
# The independent engine for equality: apply the vertex-refinement relation in
# the expanding direction until every monomial's alpha has a fixed uniform
# length, then compare raw coefficient vectors.  Shared with the convolution
# realization through the common term keys.


def expand_to_depth(g: Graph, ring: Ring, terms: Iterable[Tuple[Monomial, Scalar]], depth: int) -> Dict[Monomial, Scalar]:
    out: Dict[Monomial, Scalar] = {}
    stack = [(m, c) for m, c in terms]
    while stack:
        (v, al, be), c = stack.pop()
        if c.is_zero() or v not in g.alive:
            continue
        if len(al) >= depth:
            key = (v, al, be)
            out[key] = out.get(key, zero(ring)) + c
            continue
        for f in g.alive_edges_into[v]:
            stack.append(((g.src[f], (f,) + al, (f,) + be), c))
    return {m: c for m, c in out.items() if not c.is_zero()}


def oracle_equal(u: LpaElement, v: LpaElement, depth: int = 3) -> bool:
    u._ctx(v)
    g, ring = u.graph, u.ring
    d = max(
        [depth]
        + [len(m[1]) for m, _ in u.terms]
        + [len(m[1]) for m, _ in v.terms]
    )
    return expand_to_depth(g, ring, u.terms, d) == expand_to_depth(g, ring, v.terms, d)


# -- random elements ---------------------------------------------------------


def generators(g: Graph, ring: Ring) -> List[LpaElement]:
    gens = [p_vertex(g, ring, v) for v in g.vertices]
    for e in g.edge_names:
        gens.append(v_edge(g, ring, e))
        gens.append(v_star_edge(g, ring, e))
    return gens


def random_element(g: Graph, ring: Ring, rng: random.Random, n_factors: int = 3, n_summands: int = 2) -> LpaElement:
    """A random sum of products of generators with small integer coefficients."""
    gens = generators(g, ring)
    total = LpaElement.zero_element(g, ring)
    for _ in range(n_summands):
        acc = gens[rng.randrange(len(gens))]
        for _ in range(rng.randrange(n_factors)):
            acc = lpa_mul(acc, gens[rng.randrange(len(gens))])
        coeff = Scalar(ring, Fraction(rng.randint(-3, 3)))
        total = total.add(acc.scale(coeff))
    return total


# -- modules and the graph-sheaf dictionary ----------------------------------

Matrix = linalg.Matrix


@dataclass
class GSheaf:
    """A sheaf on the graph site: per-vertex free modules and edge maps.

    edge_mats[a] acts on row vectors, mapping the module at tgt(a) to the
    module at src(a); the sheaf condition asks the row-concatenated map
    module(x) -> product over incoming edges of module(src) to be a square
    invertible matrix at every vertex.
    """

    graph: Graph
    ring: Ring
    ranks: Dict[str, int]
    edge_mats: Dict[str, Matrix]  # a -> r(tgt a) x r(src a)

    def stacked(self, x: str) -> Matrix:
        cols = sum(self.ranks[self.graph.src[a]] for a in self.graph.edges_into[x])
        rows = self.ranks[x]
        out = [[zero(self.ring)] * cols for _ in range(rows)]
        ofs = 0
        for a in self.graph.edges_into[x]:
            w = self.ranks[self.graph.src[a]]
            m = self.edge_mats[a]
            for i in range(rows):
                for j in range(w):
                    out[i][ofs + j] = m[i][j]
            ofs += w
        return out


def gsheaf_check(f: GSheaf) -> Tuple[bool, Optional[str]]:
    """True iff the stacked map at every vertex is square and invertible.

    Returns (ok, counterexample_vertex).
    """
    g = f.graph
    for x in g.vertices:
        rows = f.ranks[x]
        cols = sum(f.ranks[g.src[a]] for a in g.edges_into[x])
        if rows != cols:
            return False, x
        if rows == 0:
            continue
        m = f.stacked(x)
        if linalg.rank(m, f.ring) != rows:
            return False, x
    return True, None


@dataclass
class LpaModule:
    """A finite-rank right module: per-vertex blocks plus edge actions.

    act_v[a] maps the block at tgt(a) to the block at src(a); act_vstar[a]
    goes back.  All four defining relations are checked on construction.
    """

    graph: Graph
    ring: Ring
    ranks: Dict[str, int]
    act_v: Dict[str, Matrix]  # r(tgt a) x r(src a)
    act_vstar: Dict[str, Matrix]  # r(src a) x r(tgt a)

    def __post_init__(self):
        problems = check_module_relations(self)
        if problems:
            raise ModuleError("; ".join(problems))

    @property
    def dim(self) -> int:
        return sum(self.ranks.values())


def check_module_relations(m: LpaModule) -> List[str]:
    g, ring = m.graph, m.ring
    problems = []
    for a in g.edge_names:
        mv = m.act_v[a]
        rows = len(mv)
        cols = len(mv[0]) if rows else m.ranks[g.src[a]]
        if rows != m.ranks[g.tgt[a]] or cols != m.ranks[g.src[a]]:
            problems.append(f"v[{a}] has wrong shape")
    for a in g.edge_names:
        for b in g.edge_names:
            if g.tgt[a] != g.tgt[b]:
                continue
            ra, rb, rt = m.ranks[g.src[a]], m.ranks[g.src[b]], m.ranks[g.tgt[a]]
            prod = linalg.mm(ring, m.act_vstar[a], m.act_v[b], ra, rt, rb)
            want = linalg.eye(ring, ra) if a == b else linalg.zeros(ring, ra, rb)
            if not linalg.mat_equal(prod, want):
                problems.append(f"w[{a}]v[{b}] relation fails")
    for x in g.vertices:
        rx = m.ranks[x]
        acc = linalg.zeros(ring, rx, rx)
        for a in g.edges_into[x]:
            acc = linalg.madd(acc, linalg.mm(ring, m.act_v[a], m.act_vstar[a], rx, m.ranks[g.src[a]], rx))
        if not linalg.mat_equal(acc, linalg.eye(ring, rx)):
            problems.append(f"vertex refinement relation fails at {x}")
    return problems


def module_from_gsheaf(f: GSheaf) -> LpaModule:
    """The module with p_x acting as block projection and v_a via the sheaf map.

    The starred action is forced by the relations: it is the a-component
    inclusion followed by the inverse of the stacked sheaf isomorphism.
    """
    g, ring = f.graph, f.ring
    ok, bad = gsheaf_check(f)
    if not ok:
        raise ModuleError(f"not a sheaf: stacked map at {bad} is not invertible")
    act_v = {a: f.edge_mats[a] for a in g.edge_names}
    act_vstar: Dict[str, Matrix] = {}
    for x in g.vertices:
        if f.ranks[x] == 0:
            for a in g.edges_into[x]:
                act_vstar[a] = linalg.zeros(ring, f.ranks[g.src[a]], 0)
            continue
        inv = linalg.inverse(f.stacked(x), ring)
        ofs = 0
        for a in g.edges_into[x]:
            w = f.ranks[g.src[a]]
            act_vstar[a] = [row[:] for row in inv[ofs : ofs + w]]
            ofs += w
    act_vstar = {a: _coerce_ring(m, ring) for a, m in act_vstar.items()}
    return LpaModule(g, ring, dict(f.ranks), act_v, act_vstar)


def _coerce_ring(m: Matrix, ring: Ring) -> Matrix:
    out = []
    for row in m:
        try:
            out.append([Scalar(ring, x.re, x.im) for x in row])
        except Exception as exc:  # denominators outside the ring
            raise ModuleError(f"sheaf inverse leaves the coefficient ring: {exc}")
    return out


def gsheaf_from_module(m: LpaModule) -> GSheaf:
    """Inverse dictionary: reads the sheaf off the v_a actions."""
    f = GSheaf(m.graph, m.ring, dict(m.ranks), {a: m.act_v[a] for a in m.graph.edge_names})
    ok, bad = gsheaf_check(f)
    if not ok:
        raise ModuleError(f"module actions do not satisfy the sheaf condition at {bad}")
    return f
