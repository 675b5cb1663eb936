"""Finite discrete groupoids and their convolution algebras.

Arrows compose function-style: comp[(a, b)] = a . b is defined when
src(a) == tgt(b) and means "b first, then a".  Convolution is the exhaustive
sum (f * g)(c) = sum of f(a) g(b) over factorizations c = a . b, and the
involution is f*(c) = conj(f(inverse of c)).

Modules over the convolution algebra are presented as row-vector actions:
act[a] is the matrix of right multiplication by the delta of arrow a, so
act respects delta products, act(f * g) = act(f) @ act(g).  The functors
between equivariant sheaves and non-degenerate modules are computed as
explicit exact matrices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .scalars import Ring, Scalar, one, zero

Matrix = linalg.Matrix


class GroupoidError(ValueError):
    pass


class DegenerateModuleError(ValueError):
    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


class FiniteGroupoid:
    def __init__(
        self,
        objects: Sequence[str],
        arrows: Sequence[str],
        src: Dict[str, str],
        tgt: Dict[str, str],
        comp: Dict[Tuple[str, str], str],
        name: str = "groupoid",
    ):
        self.objects = tuple(objects)
        self.arrows = tuple(arrows)
        self.src = dict(src)
        self.tgt = dict(tgt)
        self.comp = dict(comp)
        self.name = name
        self._arrow_idx = {a: i for i, a in enumerate(self.arrows)}
        self._validate_table()
        self.identity = self._find_identities()
        self.inverse = self._find_inverses()

    # -- exhaustive validation ------------------------------------------------

    def _validate_table(self):
        if len(set(self.objects)) != len(self.objects) or len(set(self.arrows)) != len(self.arrows):
            raise GroupoidError("duplicate object or arrow names")
        for a in self.arrows:
            if self.src.get(a) not in self.objects or self.tgt.get(a) not in self.objects:
                raise GroupoidError(f"arrow {a} has undefined endpoints")
        for a in self.arrows:
            for b in self.arrows:
                composable = self.src[a] == self.tgt[b]
                if composable and (a, b) not in self.comp:
                    raise GroupoidError(f"missing composition {a}.{b}")
                if not composable and (a, b) in self.comp:
                    raise GroupoidError(f"composition {a}.{b} defined but not composable")
        for (a, b), c in self.comp.items():
            if c not in self._arrow_idx:
                raise GroupoidError(f"composition {a}.{b} = {c} names an unknown arrow")
            if self.src[c] != self.src[b] or self.tgt[c] != self.tgt[a]:
                raise GroupoidError(f"composition {a}.{b} = {c} has wrong endpoints")
        for a in self.arrows:
            for b in self.arrows:
                for c in self.arrows:
                    if self.src[b] == self.tgt[c] and self.src[a] == self.tgt[b]:
                        if self.comp[(self.comp[(a, b)], c)] != self.comp[(a, self.comp[(b, c)])]:
                            raise GroupoidError(f"associativity fails on ({a},{b},{c})")

    def _find_identities(self) -> Dict[str, str]:
        ident = {}
        for x in self.objects:
            for i in self.arrows:
                if self.src[i] != x or self.tgt[i] != x:
                    continue
                ok = all(self.comp[(a, i)] == a for a in self.arrows if self.src[a] == x) and all(
                    self.comp[(i, b)] == b for b in self.arrows if self.tgt[b] == x
                )
                if ok:
                    ident[x] = i
                    break
            if x not in ident:
                raise GroupoidError(f"no identity arrow at object {x}")
        return ident

    def _find_inverses(self) -> Dict[str, str]:
        inv = {}
        for a in self.arrows:
            x, y = self.src[a], self.tgt[a]
            for b in self.arrows:
                if self.src[b] == y and self.tgt[b] == x:
                    if self.comp[(b, a)] == self.identity[x] and self.comp[(a, b)] == self.identity[y]:
                        inv[a] = b
                        break
            if a not in inv:
                raise GroupoidError(f"arrow {a} has no inverse")
        return inv

    def arrow_index(self, a: str) -> int:
        return self._arrow_idx[a]

    def composable(self, a: str, b: str) -> bool:
        return self.src[a] == self.tgt[b]

    def orbits(self) -> List[Tuple[str, ...]]:
        remaining = set(self.objects)
        out = []
        while remaining:
            seed = next(o for o in self.objects if o in remaining)
            comp_set = {seed}
            changed = True
            while changed:
                changed = False
                for a in self.arrows:
                    if self.src[a] in comp_set and self.tgt[a] not in comp_set:
                        comp_set.add(self.tgt[a])
                        changed = True
                    if self.tgt[a] in comp_set and self.src[a] not in comp_set:
                        comp_set.add(self.src[a])
                        changed = True
            orbit = tuple(o for o in self.objects if o in comp_set)
            out.append(orbit)
            remaining -= comp_set
        return out

    def __repr__(self):
        return f"FiniteGroupoid({self.name}: {len(self.objects)} objects, {len(self.arrows)} arrows)"


# -- builders ------------------------------------------------------------------


def pair_groupoid(n: int, name: str = "pair") -> FiniteGroupoid:
    objects = [f"o{i+1}" for i in range(n)]
    arrows = [f"a{i+1}{j+1}" for i in range(n) for j in range(n)]  # a_ij : oj -> oi
    src = {f"a{i+1}{j+1}": f"o{j+1}" for i in range(n) for j in range(n)}
    tgt = {f"a{i+1}{j+1}": f"o{i+1}" for i in range(n) for j in range(n)}
    comp = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                comp[(f"a{i+1}{j+1}", f"a{j+1}{k+1}")] = f"a{i+1}{k+1}"
    return FiniteGroupoid(objects, arrows, src, tgt, comp, name)


def cyclic_group_groupoid(n: int, name: Optional[str] = None) -> FiniteGroupoid:
    arrows = [f"g{k}" for k in range(n)]
    src = {a: "o" for a in arrows}
    tgt = {a: "o" for a in arrows}
    comp = {(f"g{i}", f"g{j}"): f"g{(i + j) % n}" for i in range(n) for j in range(n)}
    return FiniteGroupoid(["o"], arrows, src, tgt, comp, name or f"Z{n}")


def discrete_groupoid(n: int, name: str = "discrete") -> FiniteGroupoid:
    objects = [f"o{i+1}" for i in range(n)]
    arrows = [f"id{i+1}" for i in range(n)]
    src = {f"id{i+1}": f"o{i+1}" for i in range(n)}
    tgt = dict(src)
    comp = {(f"id{i+1}", f"id{i+1}"): f"id{i+1}" for i in range(n)}
    return FiniteGroupoid(objects, arrows, src, tgt, comp, name)


def disjoint_union(g1: FiniteGroupoid, g2: FiniteGroupoid, name: str = "union") -> FiniteGroupoid:
    def l(x):
        return f"L.{x}"

    def r(x):
        return f"R.{x}"

    objects = [l(o) for o in g1.objects] + [r(o) for o in g2.objects]
    arrows = [l(a) for a in g1.arrows] + [r(a) for a in g2.arrows]
    src = {l(a): l(g1.src[a]) for a in g1.arrows} | {r(a): r(g2.src[a]) for a in g2.arrows}
    tgt = {l(a): l(g1.tgt[a]) for a in g1.arrows} | {r(a): r(g2.tgt[a]) for a in g2.arrows}
    comp = {(l(a), l(b)): l(c) for (a, b), c in g1.comp.items()}
    comp |= {(r(a), r(b)): r(c) for (a, b), c in g2.comp.items()}
    return FiniteGroupoid(objects, arrows, src, tgt, comp, name)


# -- convolution elements -------------------------------------------------------


@dataclass(frozen=True)
class GpdElement:
    groupoid: FiniteGroupoid
    ring: Ring
    coeffs: Tuple[Tuple[str, Scalar], ...]  # sorted by arrow order, zeros omitted

    @staticmethod
    def make(g: FiniteGroupoid, ring: Ring, coeffs: Dict[str, Scalar]) -> "GpdElement":
        items = [(a, c) for a, c in coeffs.items() if not c.is_zero()]
        for a, _ in items:
            if a not in g._arrow_idx:
                raise GroupoidError(f"unknown arrow {a}")
        items.sort(key=lambda ac: g.arrow_index(ac[0]))
        return GpdElement(g, ring, tuple(items))

    @staticmethod
    def zero_element(g: FiniteGroupoid, ring: Ring) -> "GpdElement":
        return GpdElement(g, ring, ())

    def coeff_dict(self) -> Dict[str, Scalar]:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def add(self, other: "GpdElement") -> "GpdElement":
        acc = self.coeff_dict()
        for a, c in other.coeffs:
            acc[a] = acc.get(a, zero(self.ring)) + c
        return GpdElement.make(self.groupoid, self.ring, acc)

    def neg(self) -> "GpdElement":
        return GpdElement(self.groupoid, self.ring, tuple((a, -c) for a, c in self.coeffs))

    def sub(self, other: "GpdElement") -> "GpdElement":
        return self.add(other.neg())

    def scale(self, s: Scalar) -> "GpdElement":
        if s.is_zero():
            return GpdElement.zero_element(self.groupoid, self.ring)
        return GpdElement.make(self.groupoid, self.ring, {a: s * c for a, c in self.coeffs})

    def __str__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c} * d[{a}]" for a, c in self.coeffs)


def delta(g: FiniteGroupoid, ring: Ring, arrow: str) -> GpdElement:
    return GpdElement.make(g, ring, {arrow: one(ring)})


def gpd_convolve(f: GpdElement, h: GpdElement) -> GpdElement:
    """(f * h)(c) = sum over factorizations c = a.b of f(a) h(b), exhaustively."""
    g, ring = f.groupoid, f.ring
    acc: Dict[str, Scalar] = {}
    for a, ca in f.coeffs:
        for b, cb in h.coeffs:
            if g.composable(a, b):
                c = g.comp[(a, b)]
                acc[c] = acc.get(c, zero(ring)) + ca * cb
    return GpdElement.make(g, ring, acc)


def gpd_star(f: GpdElement) -> GpdElement:
    g = f.groupoid
    return GpdElement.make(g, f.ring, {g.inverse[a]: c.star() for a, c in f.coeffs})


def unit_of(g: FiniteGroupoid, ring: Ring) -> GpdElement:
    return GpdElement.make(g, ring, {g.identity[x]: one(ring) for x in g.objects})


def local_unit_for(f: GpdElement) -> GpdElement:
    g = f.groupoid
    objs = {g.src[a] for a, _ in f.coeffs}
    if not objs:
        return unit_of(g, f.ring)
    return GpdElement.make(g, f.ring, {g.identity[x]: one(f.ring) for x in sorted(objs, key=g.objects.index)})


def regular_matrix(f: GpdElement) -> Matrix:
    """Left multiplication by f on the free module over all arrows."""
    g, ring = f.groupoid, f.ring
    n = len(g.arrows)
    m = linalg.zeros(ring, n, n)
    for a, ca in f.coeffs:
        for b in g.arrows:
            if g.composable(a, b):
                m[g.arrow_index(g.comp[(a, b)])][g.arrow_index(b)] = (
                    m[g.arrow_index(g.comp[(a, b)])][g.arrow_index(b)] + ca
                )
    return m


def random_gpd_element(g: FiniteGroupoid, ring: Ring, rng: random.Random, density: float = 0.7) -> GpdElement:
    acc = {}
    for a in g.arrows:
        if rng.random() < density:
            acc[a] = Scalar(ring, Fraction(rng.randint(-3, 3)))
    return GpdElement.make(g, ring, acc)


# -- orbit decomposition ---------------------------------------------------------


@dataclass
class OrbitData:
    objects: Tuple[str, ...]
    base: str
    isotropy: Tuple[str, ...]  # arrows base -> base
    translations: Dict[str, str]  # object -> arrow base -> object


def decompose(g: FiniteGroupoid) -> List[OrbitData]:
    """Orbits with isotropy at a base object and translation arrows.

    The classical picture: the convolution algebra is a direct sum over
    orbits of n x n matrices over the base isotropy group algebra.  Used as
    the test oracle for the convolution product.
    """
    out = []
    for orbit in g.orbits():
        base = orbit[0]
        translations = {base: g.identity[base]}
        frontier = [base]
        while frontier:
            o = frontier.pop(0)
            for a in g.arrows:
                if g.src[a] == o and g.tgt[a] not in translations:
                    translations[g.tgt[a]] = g.comp[(a, translations[o])]
                    frontier.append(g.tgt[a])
                if g.tgt[a] == o and g.src[a] not in translations:
                    translations[g.src[a]] = g.comp[(g.inverse[a], translations[o])]
                    frontier.append(g.src[a])
        isotropy = tuple(a for a in g.arrows if g.src[a] == base and g.tgt[a] == base)
        out.append(OrbitData(orbit, base, isotropy, translations))
    return out


def matrix_units_label(g: FiniteGroupoid, dec: List[OrbitData], arrow: str) -> Tuple[int, str, str, str]:
    """(orbit index, target object, source object, isotropy element) of an arrow."""
    x, y = g.src[arrow], g.tgt[arrow]
    for idx, orb in enumerate(dec):
        if x in orb.objects:
            t_x, t_y = orb.translations[x], orb.translations[y]
            h = g.comp[(g.comp[(g.inverse[t_y], arrow)], t_x)]
            return idx, y, x, h
    raise GroupoidError(f"arrow {arrow} not covered by decomposition")


# -- equivariant sheaves ----------------------------------------------------------


@dataclass
class EquivariantSheaf:
    """Per-object modules with an invertible row-action matrix per arrow.

    arr[a] maps the module at src(a) to the one at tgt(a); functoriality in
    the row convention reads arr[a.b] = arr[b] @ arr[a] and is checked
    exhaustively on construction.
    """

    groupoid: FiniteGroupoid
    ring: Ring
    ranks: Dict[str, int]
    arr: Dict[str, Matrix]

    def __post_init__(self):
        g, ring = self.groupoid, self.ring
        for a in g.arrows:
            rs, rt = self.ranks[g.src[a]], self.ranks[g.tgt[a]]
            m = self.arr[a]
            rows = len(m)
            cols = len(m[0]) if rows else rt
            if rows != rs or cols != rt:
                raise GroupoidError(f"sheaf matrix for {a} has wrong shape")
            if rs != rt or (rs > 0 and linalg.rank(m, ring) != rs):
                raise GroupoidError(f"sheaf matrix for {a} is not invertible")
        for x in g.objects:
            if not linalg.mat_equal(self.arr[g.identity[x]], linalg.eye(ring, self.ranks[x])):
                raise GroupoidError(f"identity at {x} does not act as identity")
        for (a, b), c in g.comp.items():
            rs = self.ranks[g.src[b]]
            mid = self.ranks[g.tgt[b]]
            rt = self.ranks[g.tgt[a]]
            lhs = linalg.mm(ring, self.arr[b], self.arr[a], rs, mid, rt)
            if not linalg.mat_equal(lhs, self.arr[c]):
                raise GroupoidError(f"functoriality fails on {a}.{b}")

    @property
    def dim(self) -> int:
        return sum(self.ranks.values())


@dataclass
class GpdModule:
    """A right module over the convolution algebra: row action per arrow delta."""

    groupoid: FiniteGroupoid
    ring: Ring
    dim: int
    act: Dict[str, Matrix]

    def __post_init__(self):
        g, ring, n = self.groupoid, self.ring, self.dim
        for a in g.arrows:
            if linalg.shape(self.act[a]) != (n, n) and n > 0:
                raise GroupoidError(f"action of {a} has wrong shape")
        for a in g.arrows:
            for b in g.arrows:
                prod = linalg.mm(ring, self.act[a], self.act[b], n, n, n)
                want = (
                    self.act[g.comp[(a, b)]]
                    if g.composable(a, b)
                    else linalg.zeros(ring, n, n)
                )
                if not linalg.mat_equal(prod, want):
                    raise GroupoidError(f"module action breaks delta product on ({a},{b})")

    def act_of(self, f: GpdElement) -> Matrix:
        out = linalg.zeros(self.ring, self.dim, self.dim)
        for a, c in f.coeffs:
            out = linalg.madd(out, linalg.mscale(c, self.act[a]))
        return out

    def local_unit_sum(self) -> Matrix:
        g = self.groupoid
        out = linalg.zeros(self.ring, self.dim, self.dim)
        for x in g.objects:
            out = linalg.madd(out, self.act[g.identity[x]])
        return out


def functor_S(sheaf: EquivariantSheaf) -> GpdModule:
    """Sections module of a sheaf: sum of components with the inverse-arrow action."""
    g, ring = sheaf.groupoid, sheaf.ring
    offsets: Dict[str, int] = {}
    total = 0
    for x in g.objects:
        offsets[x] = total
        total += sheaf.ranks[x]
    act: Dict[str, Matrix] = {}
    for a in g.arrows:
        m = linalg.zeros(ring, total, total)
        block = sheaf.arr[g.inverse[a]]  # component at tgt(a) -> component at src(a)
        ro, co = offsets[g.tgt[a]], offsets[g.src[a]]
        for i in range(sheaf.ranks[g.tgt[a]]):
            for j in range(sheaf.ranks[g.src[a]]):
                m[ro + i][co + j] = block[i][j]
        act[a] = m
    return GpdModule(g, ring, total, act)


def functor_T(module: GpdModule) -> Tuple[EquivariantSheaf, Dict[str, Matrix]]:
    """Sheaf of a non-degenerate module, with the per-object basis rows.

    Raises DegenerateModuleError carrying a witness row vector when the sum
    of the local units does not act as the identity.
    """
    g, ring, n = module.groupoid, module.ring, module.dim
    s = module.local_unit_sum()
    eye_n = linalg.eye(ring, n)
    if not linalg.mat_equal(s, eye_n):
        bad = next(i for i in range(n) if s[i] != eye_n[i])
        witness = [one(ring) if j == bad else zero(ring) for j in range(n)]
        raise DegenerateModuleError(f"local units do not fix basis vector {bad}", witness)
    bases: Dict[str, Matrix] = {}
    ranks: Dict[str, int] = {}
    for x in g.objects:
        rows = linalg.row_space_basis(module.act[g.identity[x]], ring)
        bases[x] = rows
        ranks[x] = len(rows)
    if sum(ranks.values()) != n:
        raise DegenerateModuleError("component ranks do not fill the module", None)
    arr: Dict[str, Matrix] = {}
    for a in g.arrows:
        x, y = g.src[a], g.tgt[a]
        image = linalg.mm(ring, bases[x], module.act[g.inverse[a]], ranks[x], n, n)
        sol = linalg.in_row_basis(image, bases[y], ring)
        if sol is None:
            raise DegenerateModuleError(f"arrow {a} does not map components correctly", None)
        arr[a] = sol
    return EquivariantSheaf(g, ring, ranks, arr), bases


# -- random instances -------------------------------------------------------------


def _random_invertible(ring: Ring, n: int, rng: random.Random) -> Matrix:
    """Unit upper triangular times unit lower triangular: always invertible."""
    up = linalg.eye(ring, n)
    lo = linalg.eye(ring, n)
    for i in range(n):
        for j in range(i + 1, n):
            up[i][j] = Scalar(ring, Fraction(rng.randint(-2, 2)))
            lo[j][i] = Scalar(ring, Fraction(rng.randint(-2, 2)))
    return linalg.matmul(up, lo)


def random_sheaf(g: FiniteGroupoid, ring: Ring, rng: random.Random, max_rank: int = 4) -> EquivariantSheaf:
    """A random equivariant sheaf built from exact isotropy representations.

    Per orbit, the representation is a sum of copies of the left-regular
    permutation representation of the isotropy group and trivial summands,
    conjugated by a random invertible matrix and translated along the orbit
    with further random changes of basis.
    """
    dec = decompose(g)
    ranks: Dict[str, int] = {}
    arr: Dict[str, Matrix] = {}
    per_orbit = {}
    for idx, orb in enumerate(dec):
        h = orb.isotropy
        nh = len(h)
        reg_copies = rng.randint(0, max_rank // nh)
        lo = 1 if reg_copies == 0 else 0
        triv = rng.randint(lo, max(lo, max_rank - reg_copies * nh))
        r = reg_copies * nh + triv
        h_idx = {a: i for i, a in enumerate(h)}

        def rho(elem: str, reg_copies=reg_copies, triv=triv, h=h, h_idx=h_idx, nh=nh) -> Matrix:
            r_ = reg_copies * nh + triv
            m = linalg.zeros(ring, r_, r_)
            for cpy in range(reg_copies):
                for i, hh in enumerate(h):
                    j = h_idx[g.comp[(elem, hh)]]
                    m[cpy * nh + i][cpy * nh + j] = one(ring)
            for t in range(triv):
                m[reg_copies * nh + t][reg_copies * nh + t] = one(ring)
            return m

        conj = {o: _random_invertible(ring, r, rng) for o in orb.objects}
        conj_inv = {o: linalg.inverse(conj[o], ring) if r else [] for o in orb.objects}
        per_orbit[idx] = (orb, r, rho, conj, conj_inv)
        for o in orb.objects:
            ranks[o] = r
    for a in g.arrows:
        x, y = g.src[a], g.tgt[a]
        idx, _, _, helem = matrix_units_label(g, dec, a)
        orb, r, rho, conj, conj_inv = per_orbit[idx]
        core = rho(helem)
        m = linalg.mm(ring, linalg.mm(ring, conj[x], core, r, r, r), conj_inv[y], r, r, r)
        arr[a] = m
    return EquivariantSheaf(g, ring, ranks, arr)


def random_module(g: FiniteGroupoid, ring: Ring, rng: random.Random, max_rank: int = 4) -> GpdModule:
    """A random non-degenerate module: sections of a random sheaf in a moved basis."""
    base = functor_S(random_sheaf(g, ring, rng, max_rank))
    n = base.dim
    if n == 0:
        return base
    t = _random_invertible(ring, n, rng)
    tinv = linalg.inverse(t, ring)
    act = {a: linalg.matmul(linalg.matmul(tinv, base.act[a]), t) for a in g.arrows}
    return GpdModule(g, ring, n, act)
