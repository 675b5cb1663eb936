"""Exact involutive coefficient rings.

Four rings are supported: the integers Z, the rationals Q, Z[1/p] (integers
with a chosen prime inverted, printed with p-power denominators) and the
Gaussian rationals Q(i).  Values are kept in canonical reduced form so that
equality is literal structural equality, and every ring op is exact.  The
only nontrivial involution is complex conjugation on Q(i).
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

__all__ = [
    "Ring",
    "Scalar",
    "ZZ",
    "QQ",
    "QI",
    "z_localized",
    "ScalarError",
    "parse_scalar",
    "scalar",
    "zero",
    "one",
    "inv_nat",
]


class ScalarError(ValueError):
    """Raised on malformed scalar input or ring violations."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Ring:
    """Descriptor of an exact involutive coefficient ring.

    kind is one of "Z", "Q", "Z1p", "Qi"; p is only set for Z1p.  The
    involution is "conj" exactly for the Gaussian rationals, "id" otherwise.
    """

    kind: str
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "Z1p", "Qi"):
            raise ScalarError(f"unknown ring kind {self.kind!r}")
        if self.kind == "Z1p":
            if self.p is None or not _is_prime(self.p):
                raise ScalarError(f"Z[1/p] needs a prime p, got {self.p!r}")
        elif self.p is not None:
            raise ScalarError(f"ring {self.kind} takes no prime parameter")

    @property
    def involution(self) -> str:
        return "conj" if self.kind == "Qi" else "id"

    @property
    def name(self) -> str:
        return {
            "Z": "Z",
            "Q": "Q",
            "Z1p": f"Z[1/{self.p}]",
            "Qi": "Q(i)",
        }[self.kind]

    def __repr__(self):
        return f"Ring({self.name})"


ZZ = Ring("Z")
QQ = Ring("Q")
QI = Ring("Qi")


def z_localized(p: int) -> Ring:
    return Ring("Z1p", p)


def _denominator_ok(ring: Ring, q: Fraction) -> bool:
    den = q.denominator
    if ring.kind == "Z":
        return den == 1
    if ring.kind == "Z1p":
        p = ring.p
        while den % p == 0:
            den //= p
        return den == 1
    return True


@dataclass(frozen=True)
class Scalar:
    """An exact element of one of the four coefficient rings.

    Stored as a pair of reduced Fractions (re, im); im is zero outside of
    Q(i).  Instances are immutable and safe to share.
    """

    ring: Ring
    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.re, Fraction) or not isinstance(self.im, Fraction):
            object.__setattr__(self, "re", Fraction(self.re))
            object.__setattr__(self, "im", Fraction(self.im))
        if self.ring.kind != "Qi" and self.im != 0:
            raise ScalarError(f"imaginary part not allowed in {self.ring.name}")
        if not _denominator_ok(self.ring, self.re) or not _denominator_ok(self.ring, self.im):
            raise ScalarError(f"{self.re}+{self.im}i has a denominator outside {self.ring.name}")

    # -- ring operations ---------------------------------------------------
    # Ring ops preserve the canonical-form invariants, so internal results
    # skip the constructor validation via _raw.

    def _check(self, other: "Scalar"):
        if self.ring != other.ring:
            raise ScalarError(f"ring mismatch: {self.ring.name} vs {other.ring.name}")

    def __add__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return _raw(self.ring, self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return _raw(self.ring, self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Scalar":
        return _raw(self.ring, -self.re, -self.im)

    def __mul__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        if self.im or other.im:
            return _raw(
                self.ring,
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        return _raw(self.ring, self.re * other.re, self.im)

    def star(self) -> "Scalar":
        """The ring involution: conjugation on Q(i), identity elsewhere."""
        if self.ring.kind == "Qi":
            return _raw(self.ring, self.re, -self.im)
        return self

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_one(self) -> bool:
        return self.re == 1 and self.im == 0

    def is_unit(self) -> bool:
        if self.is_zero():
            return False
        if self.ring.kind == "Z":
            return abs(self.re) == 1
        if self.ring.kind == "Z1p":
            num = abs(self.re.numerator)
            p = self.ring.p
            while num % p == 0:
                num //= p
            return num == 1
        return True

    def inverse(self) -> "Scalar":
        if not self.is_unit():
            raise ScalarError(f"{self} is not a unit in {self.ring.name}")
        n2 = self.re * self.re + self.im * self.im
        return _raw(self.ring, self.re / n2, -self.im / n2)

    def abs_envelope(self) -> Fraction:
        """|a| for rational rings; the exact over-estimate |a|+|b| on Q(i)."""
        return abs(self.re) + abs(self.im)

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    # -- text form ----------------------------------------------------------

    def __str__(self) -> str:
        if self.ring.kind == "Qi" and self.im != 0:
            re_part = _format_fraction(self.ring, self.re)
            im_abs = _format_fraction(self.ring, abs(self.im))
            sign = "+" if self.im > 0 else "-"
            im_part = "i" if abs(self.im) == 1 else f"{im_abs}i"
            if self.re == 0:
                return f"{im_part}" if self.im > 0 else f"-{im_part}"
            return f"{re_part}{sign}{im_part}"
        return _format_fraction(self.ring, self.re)

    def __repr__(self):
        return f"Scalar({self}, {self.ring.name})"


def _raw(ring: Ring, re: Fraction, im: Fraction) -> Scalar:
    s = object.__new__(Scalar)
    object.__setattr__(s, "ring", ring)
    object.__setattr__(s, "re", re)
    object.__setattr__(s, "im", im)
    return s


def _format_fraction(ring: Ring, q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    if ring.kind == "Z1p":
        p = ring.p
        den, k = q.denominator, 0
        while den % p == 0:
            den //= p
            k += 1
        if k >= 2:
            return f"{q.numerator}/{p}^{k}"
    return f"{q.numerator}/{q.denominator}"


_RAT_RE = _re.compile(r"^([+-]?\d+)(?:/(\d+)(?:\^(\d+))?)?$")


def _parse_fraction(text: str) -> Fraction:
    m = _RAT_RE.match(text.strip())
    if not m:
        raise ScalarError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if m.group(3) is not None:
        den = den ** int(m.group(3))
    if den == 0:
        raise ScalarError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def parse_scalar(ring: Ring, text: str) -> Scalar:
    """Parse the shared scalar grammar: `a`, `a/b`, `a/p^k`, `a+bi`, `a-bi`, `bi`, `i`."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ScalarError("empty scalar")
    if s.endswith("i") or s.endswith("I"):
        if ring.kind != "Qi":
            raise ScalarError(f"imaginary literal {text!r} outside Q(i)")
        body = s[:-1]
        split = -1
        for j in range(len(body) - 1, 0, -1):
            if body[j] in "+-":
                split = j
                break
        if split < 0:
            re_text, im_text = "0", body if body not in ("", "+", "-") else body + "1"
        else:
            re_text = body[:split]
            rest = body[split + 1 :]
            im_text = body[split] + (rest if rest else "1")
        return Scalar(ring, _parse_fraction(re_text), _parse_fraction(im_text))
    return Scalar(ring, _parse_fraction(s))


def scalar(ring: Ring, re, im=0) -> Scalar:
    """Convenience constructor from ints/Fractions."""
    return Scalar(ring, Fraction(re), Fraction(im))


_ZERO_CACHE = {}
_ONE_CACHE = {}


def zero(ring: Ring) -> Scalar:
    s = _ZERO_CACHE.get(ring)
    if s is None:
        s = _ZERO_CACHE[ring] = Scalar(ring, Fraction(0))
    return s


def one(ring: Ring) -> Scalar:
    s = _ONE_CACHE.get(ring)
    if s is None:
        s = _ONE_CACHE[ring] = Scalar(ring, Fraction(1))
    return s


def inv_nat(ring: Ring, n: int) -> Optional[Scalar]:
    """1/n when the positive integer n is invertible in the ring, else None."""
    if n < 1:
        raise ScalarError(f"inv_nat needs n >= 1, got {n}")
    if ring.kind == "Z":
        return one(ring) if n == 1 else None
    if ring.kind == "Z1p":
        m, p = n, ring.p
        while m % p == 0:
            m //= p
        if m != 1:
            return None
    return Scalar(ring, Fraction(1, n))
