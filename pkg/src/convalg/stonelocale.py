"""Stone locales of infinite backward paths in a finite directed graph.

The space at an anchor vertex x consists of the infinite edge sequences
(..., a_2, a_1, a_0) with tgt(a_0) = x, composing head to tail.  Opens are
restricted to clopens, i.e. finite unions of cylinders; a cylinder is the
set of infinite paths ending in a fixed finite suffix.  On such Stone
spaces the way-below and rather-below relations both collapse to inclusion
of clopens, every locally constant sheaf is soft in the relevant sense, and
partitions of unity are computed by refining cylinders.

Vertices from which no infinite backward path exists ("dead" vertices) have
empty path spaces; cylinders anchored there collapse to the empty clopen.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .scalars import Ring, Scalar, zero

Path = Tuple[str, ...]


class GraphError(ValueError):
    pass


class LocaleError(ValueError):
    pass


class Graph:
    """A finite directed graph with canonical vertex/edge enumeration order."""

    def __init__(self, vertices: Sequence[str], edges: Sequence[Tuple[str, str, str]]):
        self.vertices: Tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex names")
        self.edge_names: Tuple[str, ...] = tuple(e[0] for e in edges)
        if len(set(self.edge_names)) != len(self.edge_names):
            raise GraphError("duplicate edge names")
        if set(self.edge_names) & set(self.vertices):
            raise GraphError("edge and vertex names must be disjoint")
        self.src: Dict[str, str] = {}
        self.tgt: Dict[str, str] = {}
        vset = set(self.vertices)
        for name, s, t in edges:
            if s not in vset or t not in vset:
                raise GraphError(f"edge {name} references unknown vertex")
            self.src[name] = s
            self.tgt[name] = t
        self._edge_idx = {e: i for i, e in enumerate(self.edge_names)}
        self.edges_into: Dict[str, Tuple[str, ...]] = {
            v: tuple(e for e in self.edge_names if self.tgt[e] == v) for v in self.vertices
        }
        self.edges_out: Dict[str, Tuple[str, ...]] = {
            v: tuple(e for e in self.edge_names if self.src[e] == v) for v in self.vertices
        }
        self.alive = self._alive_vertices()
        self.alive_edges_into: Dict[str, Tuple[str, ...]] = {
            v: tuple(e for e in self.edges_into[v] if self.src[e] in self.alive)
            for v in self.vertices
        }
        # least incoming edge among those with live source; None at dead vertices
        self.designated: Dict[str, Optional[str]] = {
            v: (self.alive_edges_into[v][0] if self.alive_edges_into[v] else None)
            for v in self.vertices
        }

    def _alive_vertices(self) -> frozenset:
        # greatest set A with: v in A iff some edge into v has source in A.
        alive = set(self.vertices)
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                if not any(self.src[e] in alive for e in self.edges_into[v]):
                    alive.discard(v)
                    changed = True
        return frozenset(alive)

    def edge_index(self, e: str) -> int:
        return self._edge_idx[e]

    def path_key(self, path: Path) -> Tuple[int, ...]:
        return tuple(self._edge_idx[e] for e in path)

    def path_src(self, anchor: str, path: Path) -> str:
        return self.src[path[0]] if path else anchor

    def check_path(self, anchor: str, path: Path):
        if path and self.tgt[path[-1]] != anchor:
            raise LocaleError(f"path {path} does not end at {anchor}")
        for a, b in zip(path, path[1:]):
            if self.tgt[a] != self.src[b]:
                raise LocaleError(f"edges {a},{b} do not compose")

    def path_alive(self, anchor: str, path: Path) -> bool:
        return self.path_src(anchor, path) in self.alive

    def tails_into(self, v: str, length: int) -> List[Path]:
        """All live backward paths of the given length ending at v."""
        if v not in self.alive:
            return []
        out: List[Path] = [()]
        for _ in range(length):
            out = [(e,) + p for p in out for e in self.alive_edges_into[self.path_src(v, p)]]
        return out

    def __repr__(self):
        return f"Graph({len(self.vertices)}v/{len(self.edge_names)}e)"


def _is_suffix(shorter: Path, longer: Path) -> bool:
    n = len(shorter)
    return len(longer) >= n and (n == 0 or longer[-n:] == shorter)


@dataclass(frozen=True)
class Clopen:
    """A clopen subset of the path space at `anchor`, as a canonical antichain.

    The stored cylinders are exactly the maximal cylinders contained in the
    set, sorted by edge-index sequence, so two clopens are equal iff their
    normal forms are literally equal.
    """

    graph: Graph
    anchor: str
    cylinders: Tuple[Path, ...]

    @staticmethod
    def make(graph: Graph, anchor: str, paths: Iterable[Path]) -> "Clopen":
        for p in paths:
            graph.check_path(anchor, p)
        return Clopen(graph, anchor, _normalize(graph, anchor, list(paths)))

    @staticmethod
    def full(graph: Graph, anchor: str) -> "Clopen":
        return Clopen.make(graph, anchor, [()])

    @staticmethod
    def empty(graph: Graph, anchor: str) -> "Clopen":
        return Clopen(graph, anchor, ())

    def is_empty(self) -> bool:
        return not self.cylinders

    def _check_other(self, other: "Clopen"):
        if self.graph is not other.graph or self.anchor != other.anchor:
            raise LocaleError("clopen anchors differ")

    def contains_cyl(self, path: Path) -> bool:
        return _contains(self.graph, self.anchor, self.cylinders, path)

    def meet(self, other: "Clopen") -> "Clopen":
        self._check_other(other)
        hits = []
        for p in self.cylinders:
            for q in other.cylinders:
                if _is_suffix(p, q):
                    hits.append(q)
                elif _is_suffix(q, p):
                    hits.append(p)
        return Clopen.make(self.graph, self.anchor, hits)

    def join(self, other: "Clopen") -> "Clopen":
        self._check_other(other)
        return Clopen.make(self.graph, self.anchor, self.cylinders + other.cylinders)

    def complement(self) -> "Clopen":
        g, anchor = self.graph, self.anchor
        if anchor not in g.alive:
            return Clopen.empty(g, anchor)
        members = self.cylinders
        out: List[Path] = []

        def walk(pfx: Path):
            if any(_is_suffix(m, pfx) for m in members):
                return  # inside self
            if not any(_is_suffix(pfx, m) for m in members):
                out.append(pfx)  # disjoint from self
                return
            v = g.path_src(anchor, pfx)
            for e in g.alive_edges_into[v]:
                walk((e,) + pfx)

        walk(())
        return Clopen.make(g, anchor, out)

    def subset_of(self, other: "Clopen") -> bool:
        self._check_other(other)
        return all(other.contains_cyl(p) for p in self.cylinders)

    def __str__(self):
        return "{" + ", ".join(cyl_str(self.anchor, p) for p in self.cylinders) + "}"


def cyl_str(anchor: str, path: Path) -> str:
    return f"{anchor}:{'.'.join(path)}" if path else f"{anchor}:"


def _contains(g: Graph, anchor: str, members: Sequence[Path], path: Path) -> bool:
    """Is the cylinder `path` (assumed live) contained in the union of members?"""
    if any(_is_suffix(m, path) for m in members):
        return True
    maxlen = max((len(m) for m in members), default=-1)
    if len(path) >= maxlen:
        return False
    v = g.path_src(anchor, path)
    kids = g.alive_edges_into[v]
    return bool(kids) and all(_contains(g, anchor, members, (e,) + path) for e in kids)


def _normalize(g: Graph, anchor: str, paths: List[Path]) -> Tuple[Path, ...]:
    if anchor not in g.alive:
        return ()
    live = [p for p in paths if g.path_alive(anchor, p)]
    if not live:
        return ()
    out: List[Path] = []
    maxlen = max(len(p) for p in live)

    def walk(pfx: Path):
        if _contains(g, anchor, live, pfx):
            out.append(pfx)
            return
        if len(pfx) >= maxlen:
            return
        v = g.path_src(anchor, pfx)
        for e in g.alive_edges_into[v]:
            walk((e,) + pfx)

    walk(())
    return tuple(sorted(out, key=g.path_key))


def clopen_meet(u: Clopen, v: Clopen) -> Clopen:
    return u.meet(v)


def clopen_join(u: Clopen, v: Clopen) -> Clopen:
    return u.join(v)


def clopen_complement(u: Clopen) -> Clopen:
    return u.complement()


def way_below(u: Clopen, v: Clopen) -> bool:
    """U << V.  Clopens of a Stone path space are compact, so this is inclusion."""
    return u.subset_of(v)


def rather_below(u: Clopen, v: Clopen) -> bool:
    """U rather-below V, witnessed by W = complement(U): W | V covers, W & U empty."""
    u._check_other(v)
    if not u.subset_of(v):
        return False
    w = rather_below_witness(u, v)
    full = Clopen.full(u.graph, u.anchor)
    assert w.join(v) == full and w.meet(u).is_empty()
    return True


def rather_below_witness(u: Clopen, v: Clopen) -> Clopen:
    return u.complement()


@dataclass(frozen=True)
class LCSection:
    """A locally constant, compactly supported section of the constant sheaf.

    pieces maps pairwise-disjoint cylinders to nonzero scalars; the stored
    form is canonical (maximal constant cylinders), so equality of sections
    is literal equality of pieces.
    """

    graph: Graph
    anchor: str
    ring: Ring
    pieces: Tuple[Tuple[Path, Scalar], ...]

    @staticmethod
    def make(graph: Graph, anchor: str, ring: Ring, pieces: Iterable[Tuple[Path, Scalar]]) -> "LCSection":
        items: List[Tuple[Path, Scalar]] = []
        for p, val in pieces:
            graph.check_path(anchor, p)
            if not graph.path_alive(anchor, p) or val.is_zero():
                continue
            items.append((p, val))
        for i, (p, _) in enumerate(items):
            for q, _ in items[i + 1 :]:
                if _is_suffix(p, q) or _is_suffix(q, p):
                    raise LocaleError(f"overlapping pieces {p} and {q}")
        return LCSection(graph, anchor, ring, _canonical_pieces(graph, anchor, ring, items))

    @staticmethod
    def zero_section(graph: Graph, anchor: str, ring: Ring) -> "LCSection":
        return LCSection(graph, anchor, ring, ())

    def is_zero(self) -> bool:
        return not self.pieces

    def support(self) -> Clopen:
        return Clopen.make(self.graph, self.anchor, [p for p, _ in self.pieces])

    def value_at(self, path: Path) -> Scalar:
        """Value on a cylinder at least as fine as the pieces."""
        for p, val in self.pieces:
            if _is_suffix(p, path):
                return val
        return zero(self.ring)

    def _eval_or_none(self, path: Path) -> Optional[Scalar]:
        for p, val in self.pieces:
            if _is_suffix(p, path):
                return val
        if not any(_is_suffix(path, p) for p, _ in self.pieces):
            return zero(self.ring)
        return None

    def add(self, other: "LCSection") -> "LCSection":
        if self.graph is not other.graph or self.anchor != other.anchor or self.ring != other.ring:
            raise LocaleError("section context mismatch")
        g, anchor = self.graph, self.anchor
        out: List[Tuple[Path, Scalar]] = []

        def walk(pfx: Path):
            a = self._eval_or_none(pfx)
            b = other._eval_or_none(pfx)
            if a is not None and b is not None:
                s = a + b
                if not s.is_zero():
                    out.append((pfx, s))
                return
            v = g.path_src(anchor, pfx)
            for e in g.alive_edges_into[v]:
                walk((e,) + pfx)

        if anchor in g.alive:
            walk(())
        return LCSection.make(g, anchor, self.ring, out)

    def neg(self) -> "LCSection":
        return LCSection(self.graph, self.anchor, self.ring, tuple((p, -v) for p, v in self.pieces))

    def sub(self, other: "LCSection") -> "LCSection":
        return self.add(other.neg())

    def scale(self, c: Scalar) -> "LCSection":
        if c.is_zero():
            return LCSection.zero_section(self.graph, self.anchor, self.ring)
        return LCSection.make(self.graph, self.anchor, self.ring, [(p, c * v) for p, v in self.pieces])

    def restrict(self, u: Clopen) -> "LCSection":
        if u.graph is not self.graph or u.anchor != self.anchor:
            raise LocaleError("restrict anchor mismatch")
        g, anchor = self.graph, self.anchor
        out: List[Tuple[Path, Scalar]] = []
        members = u.cylinders

        def walk(pfx: Path, val: Scalar):
            if any(_is_suffix(m, pfx) for m in members):
                out.append((pfx, val))
                return
            if not any(_is_suffix(pfx, m) for m in members):
                return
            v = g.path_src(anchor, pfx)
            for e in g.alive_edges_into[v]:
                walk((e,) + pfx, val)

        for p, val in self.pieces:
            walk(p, val)
        return LCSection.make(g, anchor, self.ring, out)

    def __str__(self):
        if not self.pieces:
            return "0"
        return " + ".join(f"{v} on {cyl_str(self.anchor, p)}" for p, v in self.pieces)


def _canonical_pieces(
    g: Graph, anchor: str, ring: Ring, items: List[Tuple[Path, Scalar]]
) -> Tuple[Tuple[Path, Scalar], ...]:
    """Contract full sibling families with equal values into maximal pieces."""
    if anchor not in g.alive or not items:
        return ()
    section = LCSection(g, anchor, ring, tuple(items))
    out: List[Tuple[Path, Scalar]] = []

    def canon(pfx: Path) -> Optional[Scalar]:
        # returns the constant value if the section is constant on pfx, else
        # emits the canonical pieces below pfx and returns None
        val = section._eval_or_none(pfx)
        if val is not None:
            return val
        v = g.path_src(anchor, pfx)
        kids = g.alive_edges_into[v]
        vals = [canon((e,) + pfx) for e in kids]
        if all(x is not None for x in vals) and len(set(vals)) == 1:
            return vals[0]
        for e, x in zip(kids, vals):
            if x is not None and not x.is_zero():
                out.append(((e,) + pfx, x))
        return None

    top = canon(())
    if top is not None:
        return (((), top),) if not top.is_zero() else ()
    return tuple(sorted(out, key=lambda pv: g.path_key(pv[0])))


class SupportError(ValueError):
    pass


def extend_with_support(s: LCSection, u: Clopen, v: Clopen) -> LCSection:
    """A global section agreeing with s on u, supported inside v (u <= v required).

    Locally constant sheaves on these Stone spaces are soft for compactly
    contained opens, so the extension is restriction followed by extension
    by zero.
    """
    if not way_below(u, v):
        raise SupportError("extend_with_support requires U << V")
    if not s.support().subset_of(v):
        raise SupportError("section must be supported in V")
    result = s.restrict(u)
    assert result.support().subset_of(v)
    return result


def partition_of_support(s: LCSection, cover: Sequence[Clopen]) -> List[LCSection]:
    """Split s into a sum of sections, the i-th supported in cover[i].

    Refines the pieces of s into cylinders each contained in a single cover
    element and assigns every refined cylinder to the first element that
    contains it.
    """
    g, anchor, ring = s.graph, s.anchor, s.ring
    union = Clopen.empty(g, anchor)
    for u in cover:
        union = union.join(u)
    if not s.support().subset_of(union):
        raise SupportError("cover does not contain the support of s")
    buckets: List[List[Tuple[Path, Scalar]]] = [[] for _ in cover]
    bound = max((len(m) for u in cover for m in u.cylinders), default=0)

    def assign(path: Path, val: Scalar):
        for i, u in enumerate(cover):
            if u.contains_cyl(path):
                buckets[i].append((path, val))
                return
        assert len(path) <= bound, "refinement exceeded cover depth"
        v = g.path_src(anchor, path)
        for e in g.alive_edges_into[v]:
            assign((e,) + path, val)

    for p, val in s.pieces:
        assign(p, val)
    return [LCSection.make(g, anchor, ring, b) for b in buckets]


def random_clopen(g: Graph, anchor: str, rng: random.Random, depth: int = 2) -> Clopen:
    """A random clopen given by a random set of cylinders up to the depth."""
    paths: List[Path] = []
    for d in range(depth + 1):
        for p in g.tails_into(anchor, d):
            if rng.random() < 0.3:
                paths.append(p)
    return Clopen.make(g, anchor, paths)


def random_section(g: Graph, anchor: str, ring: Ring, rng: random.Random, depth: int = 2) -> LCSection:
    """A random locally constant section with small integer values."""
    pieces = [(p, Scalar(ring, Fraction(rng.randint(-3, 3)))) for p in g.tails_into(anchor, depth)]
    return LCSection.make(g, anchor, ring, pieces)
