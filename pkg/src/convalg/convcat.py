"""The generic algebroid layer shared by the three instance families.

An AlgebroidElement wraps a family-specific section together with its
source and target object ids; composition, involution and linear structure
dispatch to the family.  Each family also exposes

* a finite matrix/column realization at a chosen depth (used by the norms),
* a local unit attached to the support of an element (non-degeneracy),
* a chart decomposition bound for the universal-representation norm,
* a brute-force composition oracle, used only by the test suite.

The module also houses the cosheaf machinery that is family-independent:
pushforward of sections along finite-fiber maps, the coequalizer
presentation of sections over a covered object, and the exchange
isomorphism re-indexing sections of a product.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import finitegroupoid as fg
from . import graphtopos as gt
from . import hecke as hk
from . import linalg
from .leavitt import Monomial, _term_key as _term_key_graph
from .scalars import Ring, Scalar, one, zero
from .stonelocale import Clopen, Graph, Path


class ConvCatError(ValueError):
    pass


class DepthError(ConvCatError):
    """The requested truncation depth cannot represent the element."""


class InfiniteFiberError(ConvCatError):
    pass


@dataclass(frozen=True)
class AlgebroidElement:
    family: "InstanceFamily"
    src: object
    tgt: object
    payload: object

    def is_zero(self) -> bool:
        return self.family.payload_is_zero(self.payload)


class InstanceFamily:
    """Common contract of the three concrete families."""

    name: str
    ring: Ring

    def objects(self) -> List:
        raise NotImplementedError

    def wrap(self, payload) -> AlgebroidElement:
        raise NotImplementedError

    def zero(self, i, j) -> AlgebroidElement:
        raise NotImplementedError

    def payload_is_zero(self, payload) -> bool:
        raise NotImplementedError

    def compose_payload(self, f, g):
        raise NotImplementedError

    def star_payload(self, f):
        raise NotImplementedError

    def add_payload(self, f, g):
        raise NotImplementedError

    def scale_payload(self, c: Scalar, f):
        raise NotImplementedError

    def equal_payload(self, f, g) -> bool:
        raise NotImplementedError

    def brute_compose_payload(self, f, g):
        raise NotImplementedError

    def local_unit(self, el: AlgebroidElement) -> AlgebroidElement:
        raise NotImplementedError

    def columns(self, el: AlgebroidElement, depth: int) -> Dict[object, Dict[object, Scalar]]:
        """Column dict of the depth-truncated matrix realization."""
        raise NotImplementedError

    def chart_bound(self, el: AlgebroidElement) -> Fraction:
        raise NotImplementedError

    def random_element(self, rng: random.Random) -> AlgebroidElement:
        raise NotImplementedError


def compose(f: AlgebroidElement, g: AlgebroidElement) -> AlgebroidElement:
    if f.family is not g.family:
        raise ConvCatError("elements from different families")
    if f.tgt != g.src:
        raise ConvCatError(f"object mismatch: {f.tgt} vs {g.src}")
    payload = f.family.compose_payload(f.payload, g.payload)
    return AlgebroidElement(f.family, f.src, g.tgt, payload)


def star(f: AlgebroidElement) -> AlgebroidElement:
    return AlgebroidElement(f.family, f.tgt, f.src, f.family.star_payload(f.payload))


def add(f: AlgebroidElement, g: AlgebroidElement) -> AlgebroidElement:
    if f.family is not g.family or (f.src, f.tgt) != (g.src, g.tgt):
        raise ConvCatError("cannot add")
    return AlgebroidElement(f.family, f.src, f.tgt, f.family.add_payload(f.payload, g.payload))


def scale(c: Scalar, f: AlgebroidElement) -> AlgebroidElement:
    return AlgebroidElement(f.family, f.src, f.tgt, f.family.scale_payload(c, f.payload))


def equal(f: AlgebroidElement, g: AlgebroidElement) -> bool:
    return (
        f.family is g.family
        and (f.src, f.tgt) == (g.src, g.tgt)
        and f.family.equal_payload(f.payload, g.payload)
    )


# -- graph family ---------------------------------------------------------------


class GraphFamily(InstanceFamily):
    def __init__(self, graph: Graph, ring: Ring, name: str = "graph"):
        self.graph = graph
        self.ring = ring
        self.name = name

    def objects(self):
        return list(self.graph.vertices)

    def wrap(self, payload: gt.ConvElement) -> AlgebroidElement:
        return AlgebroidElement(self, payload.src, payload.tgt, payload)

    def zero(self, i, j):
        return AlgebroidElement(self, i, j, gt.ConvElement.zero_element(self.graph, self.ring, i, j))

    def payload_is_zero(self, payload):
        return payload.is_zero()

    def compose_payload(self, f, g):
        return gt.conv_mul(f, g)

    def star_payload(self, f):
        return gt.conv_star(f)

    def add_payload(self, f, g):
        return f.add(g)

    def scale_payload(self, c, f):
        return f.scale(c)

    def equal_payload(self, f, g):
        return f.terms == g.terms

    def brute_compose_payload(self, f, g):
        return gt.brute_compose(f, g)

    def local_unit(self, el):
        return self.wrap(gt.local_unit_for(el.payload))

    def columns(self, el, depth):
        f: gt.ConvElement = el.payload
        g = self.graph
        if any(len(al) > depth for (_, al, _), _ in f.terms):
            raise DepthError(f"depth {depth} too small for {f}")
        cols: Dict[object, Dict[object, Scalar]] = {}
        for col in g.tails_into(el.src, depth):
            image: Dict[object, Scalar] = {}
            for (v, al, be), c in f.terms:
                n = len(al)
                if col[depth - n :] == al:
                    tau = col[: depth - n]
                    row = tau + be
                    image[row] = image.get(row, zero(self.ring)) + c
            cols[col] = {r: s for r, s in image.items() if not s.is_zero()}
        return cols

    def chart_bound(self, el):
        from .leavitt import expand_to_depth

        f: gt.ConvElement = el.payload
        if not f.terms:
            return Fraction(0)
        # refine to a uniform depth first: normal-form terms can overlap, the
        # chart decomposition wants genuinely disjoint cylinder pieces
        depth = max(len(al) for (_, al, _), _ in f.terms)
        refined = expand_to_depth(self.graph, self.ring, f.terms, depth)
        charts: List[List[Tuple[Monomial, Scalar]]] = []

        def clash(p: Path, q: Path) -> bool:
            n = min(len(p), len(q))
            return p[len(p) - n :] == q[len(q) - n :]

        for term in sorted(refined.items(), key=lambda mc: _term_key_graph(self.graph, mc[0])):
            (v, al, be), c = term
            placed = False
            for chart in charts:
                if all(not clash(al, al2) and not clash(be, be2) for (_, al2, be2), _ in chart):
                    chart.append(term)
                    placed = True
                    break
            if not placed:
                charts.append([term])
        return sum((max(c.abs_envelope() for _, c in chart) for chart in charts), Fraction(0))

    def random_element(self, rng):
        return self.wrap(gt.random_conv_element(self.graph, self.ring, rng))


# -- finite groupoid family ------------------------------------------------------


class GroupoidFamily(InstanceFamily):
    """One separating object: the groupoid acting on itself."""

    OBJ = "*"

    def __init__(self, groupoid: fg.FiniteGroupoid, ring: Ring, name: Optional[str] = None):
        self.groupoid = groupoid
        self.ring = ring
        self.name = name or groupoid.name

    def objects(self):
        return [self.OBJ]

    def wrap(self, payload: fg.GpdElement) -> AlgebroidElement:
        return AlgebroidElement(self, self.OBJ, self.OBJ, payload)

    def zero(self, i, j):
        return self.wrap(fg.GpdElement.zero_element(self.groupoid, self.ring))

    def payload_is_zero(self, payload):
        return payload.is_zero()

    def compose_payload(self, f, g):
        return fg.gpd_convolve(f, g)

    def star_payload(self, f):
        return fg.gpd_star(f)

    def add_payload(self, f, g):
        return f.add(g)

    def scale_payload(self, c, f):
        return f.scale(c)

    def equal_payload(self, f, g):
        return f.coeffs == g.coeffs

    def brute_compose_payload(self, f, g):
        return matrix_units_compose(f, g)

    def local_unit(self, el):
        return self.wrap(fg.local_unit_for(el.payload))

    def columns(self, el, depth):
        g = self.groupoid
        f: fg.GpdElement = el.payload
        cols: Dict[object, Dict[object, Scalar]] = {}
        for b in g.arrows:
            image: Dict[object, Scalar] = {}
            for a, c in f.coeffs:
                if g.composable(a, b):
                    key = g.comp[(a, b)]
                    image[key] = image.get(key, zero(self.ring)) + c
            cols[b] = {r: s for r, s in image.items() if not s.is_zero()}
        return cols

    def chart_bound(self, el):
        g = self.groupoid
        f: fg.GpdElement = el.payload
        charts: List[List[Tuple[str, Scalar]]] = []
        for a, c in f.coeffs:
            placed = False
            for chart in charts:
                if all(g.src[a] != g.src[b] and g.tgt[a] != g.tgt[b] for b, _ in chart):
                    chart.append((a, c))
                    placed = True
                    break
            if not placed:
                charts.append([(a, c)])
        return sum((max(c.abs_envelope() for _, c in chart) for chart in charts), Fraction(0))

    def random_element(self, rng):
        return self.wrap(fg.random_gpd_element(self.groupoid, self.ring, rng))


def matrix_units_compose(f: fg.GpdElement, h: fg.GpdElement) -> fg.GpdElement:
    """Test oracle: multiply through the orbit/isotropy matrix-unit picture.

    delta of an arrow maps to a matrix unit over the base isotropy group; the
    product of two labels (j, i, s) (l, k, t) is (j, k, s.t) when i == l and
    zero otherwise, mirroring block matrix multiplication.
    """
    g, ring = f.groupoid, f.ring
    dec = fg.decompose(g)
    by_label_f: Dict[Tuple[int, str, str, str], Scalar] = {}
    for a, c in f.coeffs:
        by_label_f[fg.matrix_units_label(g, dec, a)] = c
    by_label_h: Dict[Tuple[int, str, str, str], Scalar] = {}
    for a, c in h.coeffs:
        by_label_h[fg.matrix_units_label(g, dec, a)] = c
    out_labels: Dict[Tuple[int, str, str, str], Scalar] = {}
    for (o1, j, i, s), c1 in by_label_f.items():
        for (o2, l, k, t), c2 in by_label_h.items():
            if o1 != o2 or i != l:
                continue
            st = g.comp[(s, t)]
            key = (o1, j, k, st)
            out_labels[key] = out_labels.get(key, zero(ring)) + c1 * c2
    # translate labels back to arrows
    acc: Dict[str, Scalar] = {}
    for (o, j, k, s), c in out_labels.items():
        orb = dec[o]
        arrow = g.comp[(g.comp[(orb.translations[j], s)], g.inverse[orb.translations[k]])]
        acc[arrow] = acc.get(arrow, zero(ring)) + c
    return fg.GpdElement.make(g, ring, acc)


# -- hecke family ------------------------------------------------------------------


class HeckeFamily(InstanceFamily):
    def __init__(self, p: int, ring: Ring, max_level: int = 3, name: Optional[str] = None):
        self.p = p
        self.ring = ring
        self.max_level = max_level
        self.name = name or f"tower p={p}"

    def objects(self):
        return list(range(self.max_level + 1))

    def wrap(self, payload: hk.TowerElement) -> AlgebroidElement:
        return AlgebroidElement(self, payload.k_src, payload.k_tgt, payload)

    def zero(self, i, j):
        return self.wrap(hk.TowerElement.zero_element(self.p, i, j, self.ring))

    def payload_is_zero(self, payload):
        return payload.is_zero()

    def compose_payload(self, f, g):
        return hk.hecke_compose(f, g)

    def star_payload(self, f):
        return hk.hecke_star(f)

    def add_payload(self, f, g):
        return f.add(g)

    def scale_payload(self, c, f):
        return f.scale(c)

    def equal_payload(self, f, g):
        return (f.k_src, f.k_tgt) == (g.k_src, g.k_tgt) and f.values == g.values

    def brute_compose_payload(self, f, g):
        return hk.compose_oracle(f, g)

    def local_unit(self, el):
        return self.wrap(hk.identity_element(self.p, el.payload.k_tgt, self.ring))

    def columns(self, el, depth):
        f: hk.TowerElement = el.payload
        cols: Dict[object, Dict[object, Scalar]] = {}
        for x in range(self.p ** f.k_src):
            image = {}
            for y in range(self.p ** f.k_tgt):
                c = f.kernel(x, y)
                if not c.is_zero():
                    image[y] = c
            cols[x] = image
        return cols

    def chart_bound(self, el):
        f: hk.TowerElement = el.payload
        spread = self.p ** ((abs(f.k_src - f.k_tgt) + 1) // 2)
        return sum(
            (v.abs_envelope() * spread for v in f.values if not v.is_zero()),
            Fraction(0),
        )

    def random_element(self, rng):
        i = rng.randint(0, self.max_level)
        j = rng.randint(0, self.max_level)
        return self.wrap(hk.random_element(self.p, i, j, self.ring, rng))


# -- pushforward of sections -------------------------------------------------------


@dataclass(frozen=True)
class IdentityMap:
    pass


@dataclass(frozen=True)
class ConstMap:
    """Everything maps to a single point label."""

    target: object = "pt"


@dataclass(frozen=True)
class ExplicitMap:
    mapping: Tuple[Tuple[object, object], ...]

    def as_dict(self):
        return dict(self.mapping)


@dataclass(frozen=True)
class CylinderCoarsen:
    """Refinement map of the graph family: depth d cylinders onto depth d' <= d."""

    anchor: str
    from_depth: int
    to_depth: int


def pushforward(desc, section: Dict[object, Scalar], ring: Ring) -> Dict[object, Scalar]:
    """w(y) = sum of v(x) over the fiber f(x) = y, by explicit fiber enumeration."""
    out: Dict[object, Scalar] = {}

    def put(label, val):
        out[label] = out.get(label, zero(ring)) + val

    if isinstance(desc, IdentityMap):
        for x, v in section.items():
            put(x, v)
    elif isinstance(desc, ConstMap):
        for _x, v in section.items():
            put(desc.target, v)
    elif isinstance(desc, ExplicitMap):
        mapping = desc.as_dict()
        for x, v in section.items():
            if x not in mapping:
                raise ConvCatError(f"label {x} outside the map domain")
            put(mapping[x], v)
    elif isinstance(desc, CylinderCoarsen):
        if desc.from_depth < desc.to_depth:
            raise InfiniteFiberError(
                f"coarsening {desc.from_depth} -> {desc.to_depth} has infinite fibers"
            )
        cut = desc.from_depth - desc.to_depth
        for path, v in section.items():
            if len(path) != desc.from_depth:
                raise ConvCatError(f"label {path} is not a depth-{desc.from_depth} cylinder")
            put(path[cut:], v)
    else:
        raise ConvCatError(f"unknown map descriptor {desc!r}")
    return {k: v for k, v in out.items() if not v.is_zero()}


# -- coequalizer engine --------------------------------------------------------------


@dataclass
class CoeqPresentation:
    """Generators and a pair of relation maps, as exact matrices.

    The two maps go from the direct sum of relation summands to the direct
    sum of generator summands; matrices act on column vectors, columns
    indexed by relation basis elements.
    """

    ring: Ring
    gen_ranks: List[int]
    first: linalg.Matrix
    second: linalg.Matrix

    def total_gen(self) -> int:
        return sum(self.gen_ranks)


@dataclass
class QuotientModule:
    ring: Ring
    rank: int
    torsion: List[int]
    proj: linalg.Matrix  # quotient coordinates of a generator vector (free part over Z)
    section: linalg.Matrix  # a lift of quotient coordinates back to generators


def coequalize(pres: CoeqPresentation) -> QuotientModule:
    """Cokernel of (first - second): Smith normal form over Z, elimination over fields."""
    n = pres.total_gen()
    ring = pres.ring
    d = linalg.msub(pres.first, pres.second) if pres.first else []
    if ring.kind in ("Q", "Qi"):
        if n == 0:
            return QuotientModule(ring, 0, [], [], [])
        if not d or not d[0]:
            return QuotientModule(ring, n, [], linalg.eye(ring, n), linalg.eye(ring, n))
        q, proj, section = linalg.coker_field(d, ring)
        return QuotientModule(ring, q, [], proj, section)
    if ring.kind != "Z":
        raise ConvCatError(f"coequalizer over {ring.name} is not supported")
    if n == 0:
        return QuotientModule(ring, 0, [], [], [])
    if not d or not d[0]:
        return QuotientModule(ring, n, [], linalg.eye(ring, n), linalg.eye(ring, n))
    ints = [[int(x.re) for x in row] for row in d]
    diag, l_mat, _r = linalg.smith_normal_form(ints)
    diag = diag + [0] * (n - len(diag))
    free_rows = [i for i in range(n) if i >= len(diag) or diag[i] == 0]
    torsion = [abs(di) for di in diag if abs(di) > 1]
    lmatrix = linalg.mat(ring, l_mat)
    linv_q = linalg.inverse(lmatrix, ring)
    linv = [[Scalar(ring, x.re) for x in row] for row in linv_q]  # unimodular, so exact over Z
    proj = [lmatrix[i] for i in free_rows]
    section = [[linv[i][j] for j in free_rows] for i in range(n)]
    return QuotientModule(ring, len(free_rows), sorted(torsion), proj, section)


def clopen_section_basis(u: Clopen, depth: int) -> List[Path]:
    """Depth-d cylinders contained in the clopen; requires d at least its depth."""
    g = u.graph
    maxlen = max((len(p) for p in u.cylinders), default=0)
    if depth < maxlen:
        raise DepthError(f"depth {depth} below clopen depth {maxlen}")
    return [p for p in g.tails_into(u.anchor, depth) if u.contains_cyl(p)]


def cover_presentation(ring: Ring, cover: Sequence[Clopen], depth: int) -> Tuple[CoeqPresentation, List[List[Path]]]:
    bases = [clopen_section_basis(d_i, depth) for d_i in cover]
    offsets = []
    total = 0
    for b in bases:
        offsets.append(total)
        total += len(b)
    rel_cols: List[Tuple[int, int, Path]] = []
    for i in range(len(cover)):
        for j in range(i + 1, len(cover)):
            meet = cover[i].meet(cover[j])
            for p in clopen_section_basis(meet, depth):
                rel_cols.append((i, j, p))
    first = linalg.zeros(ring, total, len(rel_cols)) if rel_cols else [[] for _ in range(total)]
    second = linalg.zeros(ring, total, len(rel_cols)) if rel_cols else [[] for _ in range(total)]
    for col, (i, j, p) in enumerate(rel_cols):
        first[offsets[i] + bases[i].index(p)][col] = one(ring)
        second[offsets[j] + bases[j].index(p)][col] = one(ring)
    return CoeqPresentation(ring, [len(b) for b in bases], first, second), bases


def cover_coequalizer(ring: Ring, u: Clopen, cover: Sequence[Clopen], depth: int):
    """Quotient of the cover presentation plus the comparison iso onto direct sections.

    Returns (quotient, iso, direct_basis) where iso maps quotient coordinates
    to coefficients on the depth-d cylinder basis of u and is checked to be
    invertible; the spread of a cover must actually cover u.
    """
    union = Clopen.empty(u.graph, u.anchor)
    for d_i in cover:
        union = union.join(d_i)
    if union != u:
        raise ConvCatError("cover does not cover the clopen")
    pres, bases = cover_presentation(ring, cover, depth)
    quot = coequalize(pres)
    direct = clopen_section_basis(u, depth)
    n = pres.total_gen()
    phi = linalg.zeros(ring, len(direct), n)
    ofs = 0
    for b in bases:
        for k, p in enumerate(b):
            phi[direct.index(p)][ofs + k] = one(ring)
        ofs += len(b)
    iso = linalg.mm(ring, phi, quot.section, len(direct), n, quot.rank)
    if quot.rank != len(direct):
        raise ConvCatError(
            f"cover quotient rank {quot.rank} differs from direct section count {len(direct)}"
        )
    if quot.torsion:
        raise ConvCatError(f"unexpected torsion {quot.torsion} in a cover quotient")
    if len(direct) and linalg.rank(iso, ring) != len(direct):
        raise ConvCatError("comparison map is not invertible")
    if ring.kind == "Z" and len(direct):
        if abs(linalg.det(iso, ring).re) != 1:
            raise ConvCatError("comparison map is not invertible over Z")
    return quot, iso, direct


# -- exchange isomorphism --------------------------------------------------------------


def exchange_iso(direction: str, data):
    """Mutually inverse re-indexing of product sections; round-trip is identity."""
    if direction == "forward":
        return exchange_forward(data)
    if direction == "backward":
        return exchange_backward(data)
    raise ConvCatError(f"unknown exchange direction {direction!r}")


def exchange_forward(data: Dict[Tuple[object, object], Scalar]) -> Dict[object, Dict[object, Scalar]]:
    """Sections on a product re-indexed as sections valued in indexed sums."""
    out: Dict[object, Dict[object, Scalar]] = {}
    for (a, b), c in data.items():
        out.setdefault(a, {})[b] = c
    return out


def exchange_backward(data: Dict[object, Dict[object, Scalar]]) -> Dict[Tuple[object, object], Scalar]:
    out: Dict[Tuple[object, object], Scalar] = {}
    for a, inner in data.items():
        for b, c in inner.items():
            out[(a, b)] = c
    return out


def conv_exchange_forward(f: gt.ConvElement) -> Dict[Path, Dict[Path, Scalar]]:
    """Z(alpha, beta) goes to (cylinder alpha, generator indexed by beta)."""
    return exchange_forward({(al, be): c for (v, al, be), c in f.terms})


def conv_exchange_backward(
    g: Graph, ring: Ring, x: str, y: str, data: Dict[Path, Dict[Path, Scalar]]
) -> gt.ConvElement:
    terms = {}
    for al, inner in data.items():
        v = g.path_src(x, al)
        for be, c in inner.items():
            terms[(v, al, be)] = c
    return gt.ConvElement.make(g, ring, x, y, terms)
