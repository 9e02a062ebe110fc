"""Exact arithmetic for computable non-archimedean valued fields.

Three backends are supported: formal Laurent fractions over the rationals
in one variable t (integer exponents), the same with rational exponents
(puiseux), and exact rationals carrying the p-adic valuation.  The two
series backends have residue characteristic zero; the p-adic backend is
mixed-characteristic and exists to show where that assumption matters.

Norms are written multiplicatively as theta(e) with reversed exponent
order: theta(e1) < theta(e2) iff e1 > e2, and |t| = theta(1) < 1.  All
values are immutable and every operation is a pure function, so values
are safe to share between concurrent tasks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

T_ADIC = "t-adic"
PUISEUX = "puiseux"
P_ADIC = "p-adic"

_KINDS = (T_ADIC, PUISEUX, P_ADIC)

Q = Fraction


class BackendMismatchError(ValueError):
    """Operands belong to different field backends."""


class PDivisibleCountWarning(UserWarning):
    """An average was taken over a count of norm < 1.

    Possible only on the p-adic backend; averaging then inflates norms and
    the residue-characteristic-zero guarantees no longer apply.
    """


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# Value group


@dataclass(frozen=True, slots=True)
class NormValue:
    """A multiplicative norm: zero, or theta(exponent) with reversed order."""

    exponent: Fraction | None = None  # None encodes the zero norm

    @staticmethod
    def zero() -> "NormValue":
        return NormValue(None)

    @staticmethod
    def theta(e) -> "NormValue":
        return NormValue(_as_fraction(e))

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def __lt__(self, other: "NormValue") -> bool:
        if self.is_zero:
            return not other.is_zero
        if other.is_zero:
            return False
        return self.exponent > other.exponent  # reversed order

    def __le__(self, other: "NormValue") -> bool:
        return self == other or self < other

    def __gt__(self, other: "NormValue") -> bool:
        return other < self

    def __ge__(self, other: "NormValue") -> bool:
        return other <= self

    def __mul__(self, other: "NormValue") -> "NormValue":
        if self.is_zero or other.is_zero:
            return NormValue.zero()
        return NormValue(self.exponent + other.exponent)

    def __truediv__(self, other: "NormValue") -> "NormValue":
        if other.is_zero:
            raise ZeroDivisionError("division by the zero norm")
        if self.is_zero:
            return NormValue.zero()
        return NormValue(self.exponent - other.exponent)

    def __pow__(self, k: int) -> "NormValue":
        if self.is_zero:
            if k <= 0:
                raise ZeroDivisionError("zero norm to a non-positive power")
            return self
        return NormValue(self.exponent * k)

    def __repr__(self) -> str:
        return "Norm(0)" if self.is_zero else f"Theta({self.exponent})"


NORM_ONE = NormValue.theta(0)


def max_norms(norms: Iterable[NormValue]) -> NormValue:
    best = NormValue.zero()
    for n in norms:
        if best < n:
            best = n
    return best


@dataclass(frozen=True, slots=True)
class CutValue:
    """A Dedekind cut of norms: an infimum with an attained flag.

    The cut (r, attained) equals the value r; the cut (r, not attained)
    sits strictly between r and every norm above r (the infimum is only
    approached from above).  Hence (r, True) < (r, False) and a plain
    value v compares to a cut like the cut (v, True).
    """

    norm: NormValue
    attained: bool

    def _key(self):
        return (self.norm, 0 if self.attained else 1)

    def __lt__(self, other: "CutValue") -> bool:
        a, b = self._key(), other._key()
        if a[0] == b[0]:
            return a[1] < b[1]
        return a[0] < b[0]

    def __le__(self, other: "CutValue") -> bool:
        return self == other or self < other

    def __gt__(self, other: "CutValue") -> bool:
        return other < self

    def __ge__(self, other: "CutValue") -> bool:
        return other <= self

    def __repr__(self) -> str:
        tag = "attained" if self.attained else "approached"
        return f"Cut({self.norm!r}, {tag})"


def cut_of_value(v: NormValue) -> CutValue:
    return CutValue(v, True)


def value_gt_cut(v: NormValue, cut: CutValue) -> bool:
    """Whether the norm v lies strictly above the cut."""
    return v > cut.norm


def value_lt_cut(v: NormValue, cut: CutValue) -> bool:
    """Whether the norm v lies strictly below the cut."""
    if cut.attained:
        return v < cut.norm
    return v <= cut.norm


def value_le_cut(v: NormValue, cut: CutValue) -> bool:
    return not value_gt_cut(v, cut)


# ---------------------------------------------------------------------------
# Leading terms


@dataclass(frozen=True, slots=True)
class RVValue:
    """The leading-term datum rv(x): zero, or a norm exponent with a unit.

    For the mixed-characteristic backend the unit is reduced modulo p, so
    that rv(x) = rv(y) iff |x - y| < |x| holds structurally.
    """

    exponent: Fraction | None
    unit: Fraction | None
    prime: int | None = None

    def __post_init__(self):
        if (self.exponent is None) != (self.unit is None):
            raise ValueError("rv value must set both exponent and unit or neither")
        if self.unit is not None:
            if self.unit == 0:
                raise ValueError("rv unit must be nonzero")
            if self.prime is not None:
                digit = _padic_residue(self.unit, self.prime)
                object.__setattr__(self, "unit", Fraction(digit))

    @staticmethod
    def zero() -> "RVValue":
        return RVValue(None, None)

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    @property
    def norm(self) -> NormValue:
        return NormValue.zero() if self.is_zero else NormValue(self.exponent)

    def __mul__(self, other: "RVValue") -> "RVValue":
        if self.is_zero or other.is_zero:
            return RVValue.zero()
        if self.prime != other.prime:
            raise BackendMismatchError("rv values from different backends")
        return RVValue(self.exponent + other.exponent, self.unit * other.unit, self.prime)

    def __repr__(self) -> str:
        if self.is_zero:
            return "rv(0)"
        return f"rv(exp={self.exponent}, unit={self.unit})"


def _padic_residue(u: Fraction, p: int) -> int:
    """The image of a p-adic unit in the residue field, as an int in 1..p-1."""
    a, b = u.numerator, u.denominator
    if a % p == 0 or b % p == 0:
        raise ValueError(f"{u} is not a unit at p={p}")
    return (a * pow(b, -1, p)) % p


# ---------------------------------------------------------------------------
# Field descriptors and elements

# A generalized polynomial is a tuple of (exponent, coefficient) pairs with
# Fraction entries, sorted by exponent, all coefficients nonzero.
Poly = tuple[tuple[Fraction, Fraction], ...]

_ONE_POLY: Poly = ((Q(0), Q(1)),)


@dataclass(frozen=True, slots=True)
class FieldDescriptor:
    kind: str
    prime: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == P_ADIC:
            if self.prime is None or not _is_prime(self.prime):
                raise ValueError("p-adic backend needs a prime")
        elif self.prime is not None:
            raise ValueError(f"{self.kind} backend takes no prime")

    @property
    def is_series(self) -> bool:
        return self.kind in (T_ADIC, PUISEUX)

    @property
    def mixed_characteristic(self) -> bool:
        return self.kind == P_ADIC

    @property
    def dense_value_group(self) -> bool:
        return self.kind == PUISEUX

    def check_exponent(self, e: Fraction) -> Fraction:
        if self.kind == T_ADIC and e.denominator != 1:
            raise ValueError(f"t-adic exponents must be integers, got {e}")
        return e

    # -- element constructors ------------------------------------------------

    def zero(self) -> "FieldElement":
        if self.is_series:
            return FieldElement(self, (), _ONE_POLY)
        return FieldElement(self, rational=Q(0))

    def one(self) -> "FieldElement":
        return self.from_rational(Q(1))

    def from_rational(self, q) -> "FieldElement":
        q = _as_fraction(q)
        if self.is_series:
            num = () if q == 0 else ((Q(0), q),)
            return FieldElement(self, num, _ONE_POLY)
        return FieldElement(self, rational=q)

    def from_int(self, n: int) -> "FieldElement":
        return self.from_rational(Q(n))

    def monomial(self, exponent, coefficient=1) -> "FieldElement":
        """c * t^e for series backends, c * p^e for the p-adic backend."""
        e = self.check_exponent(_as_fraction(exponent))
        c = _as_fraction(coefficient)
        if self.is_series:
            num = () if c == 0 else ((e, c),)
            return FieldElement(self, num, _ONE_POLY)
        if e.denominator != 1:
            raise ValueError("p-adic exponents must be integers")
        return FieldElement(self, rational=c * Q(self.prime) ** int(e))

    def uniformizer(self) -> "FieldElement":
        return self.monomial(1)

    def from_terms(self, num_terms, den_terms=((0, 1),)) -> "FieldElement":
        """Build a series element from (exponent, coefficient) pairs."""
        if not self.is_series:
            raise ValueError("from_terms applies to series backends only")
        num = _normalize_terms(self, num_terms)
        den = _normalize_terms(self, den_terms)
        if not den:
            raise ZeroDivisionError("zero denominator")
        num, den = _canonical_fraction(num, den)
        return FieldElement(self, num, den)


def _normalize_terms(field: FieldDescriptor, terms) -> Poly:
    acc: dict[Fraction, Fraction] = {}
    for e, c in terms:
        e = field.check_exponent(_as_fraction(e))
        c = _as_fraction(c)
        if c == 0:
            continue
        acc[e] = acc.get(e, Q(0)) + c
    return tuple(sorted((e, c) for e, c in acc.items() if c != 0))


# -- polynomial helpers (sparse, Fraction exponents) ------------------------


def _padd(a: Poly, b: Poly) -> Poly:
    acc = dict(a)
    for e, c in b:
        s = acc.get(e, Q(0)) + c
        if s == 0:
            acc.pop(e, None)
        else:
            acc[e] = s
    return tuple(sorted(acc.items()))


def _pneg(a: Poly) -> Poly:
    return tuple((e, -c) for e, c in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    acc: dict[Fraction, Fraction] = {}
    for e1, c1 in a:
        for e2, c2 in b:
            e = e1 + e2
            s = acc.get(e, Q(0)) + c1 * c2
            if s == 0:
                acc.pop(e, None)
            else:
                acc[e] = s
    return tuple(sorted(acc.items()))


def _pshift(a: Poly, d: Fraction) -> Poly:
    return tuple((e + d, c) for e, c in a)


def _pscale(a: Poly, c: Fraction) -> Poly:
    if c == 0:
        return ()
    return tuple((e, k * c) for e, k in a)


def _ord(a: Poly) -> Fraction:
    return a[0][0]


def _pdivmod_int(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    """Division with remainder for integer-exponent polynomials."""
    quo: dict[Fraction, Fraction] = {}
    rem = a
    db = b[-1][0]
    lb = b[-1][1]
    while rem and rem[-1][0] >= db:
        da, la = rem[-1]
        k = da - db
        c = la / lb
        quo[k] = quo.get(k, Q(0)) + c
        rem = _padd(rem, _pneg(_pmul(((k, c),), b)))
    return tuple(sorted(quo.items())), rem


def _pgcd_int(a: Poly, b: Poly) -> Poly:
    """Monic gcd of integer-exponent polynomials over Q."""
    while b:
        _, r = _pdivmod_int(a, b)
        a, b = b, r
    return _pscale(a, 1 / a[-1][1])


def _canonical_fraction(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """Reduce to the canonical form: gcd-free, den of order 0 with constant
    coefficient 1.  Structural equality of canonical forms is field equality.
    """
    if not num:
        return (), _ONE_POLY
    # move the denominator's monomial content into the numerator
    d0 = _ord(den)
    if d0 != 0:
        den = _pshift(den, -d0)
        num = _pshift(num, -d0)
    if len(num) > 1 and len(den) > 1:
        # scale rational exponents to integers before running Euclid
        scale = 1
        for e, _ in num + den:
            scale = scale * e.denominator // math.gcd(scale, e.denominator)
        n0 = _ord(num)
        nshift = _pshift(num, -n0)
        if scale != 1:
            nshift = tuple((e * scale, c) for e, c in nshift)
            dint = tuple((e * scale, c) for e, c in den)
        else:
            dint = den
        g = _pgcd_int(nshift, dint)
        if len(g) > 1 or g[0][0] != 0:
            nshift, _ = _pdivmod_int(nshift, g)
            dint, _ = _pdivmod_int(dint, g)
            if scale != 1:
                nshift = tuple((e / scale, c) for e, c in nshift)
                dint = tuple((e / scale, c) for e, c in dint)
            num = _pshift(nshift, n0)
            den = dint
    lead = den[0][1]
    if lead != 1:
        den = _pscale(den, 1 / lead)
        num = _pscale(num, 1 / lead)
    return num, den


class FieldElement:
    """An exact element of a valued field, kept in canonical reduced form."""

    __slots__ = ("field", "num", "den", "rational")

    def __init__(self, field: FieldDescriptor, num: Poly = None, den: Poly = None,
                 rational: Fraction = None):
        self.field = field
        if field.is_series:
            if rational is not None:
                raise ValueError("series element built from a rational")
            self.num = num
            self.den = den
            self.rational = None
        else:
            self.num = None
            self.den = None
            self.rational = rational

    # -- basics --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        if self.field.is_series:
            return not self.num
        return self.rational == 0

    def __bool__(self) -> bool:
        return not self.is_zero

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldElement):
            return NotImplemented
        if self.field != other.field:
            return False
        if self.field.is_series:
            return self.num == other.num and self.den == other.den
        return self.rational == other.rational

    def __hash__(self) -> int:
        if self.field.is_series:
            return hash((self.field, self.num, self.den))
        return hash((self.field, self.rational))

    def _check(self, other: "FieldElement"):
        if not isinstance(other, FieldElement) or self.field != other.field:
            raise BackendMismatchError(
                f"mixed backends: {self.field} vs {getattr(other, 'field', other)}")

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        f = self.field
        if not f.is_series:
            return FieldElement(f, rational=self.rational + other.rational)
        if self.den == other.den:
            num, den = _canonical_fraction(_padd(self.num, other.num), self.den)
            return FieldElement(f, num, den)
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        num, den = _canonical_fraction(num, _pmul(self.den, other.den))
        return FieldElement(f, num, den)

    def __neg__(self) -> "FieldElement":
        f = self.field
        if not f.is_series:
            return FieldElement(f, rational=-self.rational)
        return FieldElement(f, _pneg(self.num), self.den)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return self + (-other)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        f = self.field
        if not f.is_series:
            return FieldElement(f, rational=self.rational * other.rational)
        num, den = _canonical_fraction(_pmul(self.num, other.num),
                                       _pmul(self.den, other.den))
        return FieldElement(f, num, den)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        if other.is_zero:
            raise ZeroDivisionError(f"division by zero in the {self.field.kind} field")
        f = self.field
        if not f.is_series:
            return FieldElement(f, rational=self.rational / other.rational)
        num, den = _canonical_fraction(_pmul(self.num, other.den),
                                       _pmul(self.den, other.num))
        return FieldElement(f, num, den)

    def scale(self, q) -> "FieldElement":
        """Multiply by an exact rational."""
        q = _as_fraction(q)
        f = self.field
        if not f.is_series:
            return FieldElement(f, rational=self.rational * q)
        num, den = _canonical_fraction(_pscale(self.num, q), self.den)
        return FieldElement(f, num, den)

    # -- valuation data --------------------------------------------------------

    def norm(self) -> NormValue:
        if self.is_zero:
            return NormValue.zero()
        if self.field.is_series:
            return NormValue(_ord(self.num))  # den has order 0
        return NormValue(Q(_padic_valuation(self.rational, self.field.prime)))

    def rv(self) -> RVValue:
        if self.is_zero:
            return RVValue.zero()
        f = self.field
        if f.is_series:
            # den is canonical with constant coefficient 1
            return RVValue(_ord(self.num), self.num[0][1])
        v = _padic_valuation(self.rational, f.prime)
        unit = self.rational / Q(f.prime) ** v
        return RVValue(Q(v), unit, f.prime)

    def norm_of_difference(self, other: "FieldElement") -> NormValue:
        """|self - other|, with a scan that avoids building the difference."""
        self._check(other)
        f = self.field
        if not f.is_series:
            return NormValue(Q(_padic_valuation(self.rational - other.rational,
                                                f.prime))) \
                if self.rational != other.rational else NormValue.zero()
        if self.den == other.den:
            e = _first_diff_exponent(self.num, other.num)
            return NormValue.zero() if e is None else NormValue(e)
        return (self - other).norm()

    # -- text form -------------------------------------------------------------

    def to_text(self) -> str:
        """Canonical text form used inside JSON payloads."""
        if not self.field.is_series:
            r = self.rational
            return f"{r.numerator}/{r.denominator}"
        if self.is_zero:
            return "(0)"
        return f"({_terms_text(self.num)})/({_terms_text(self.den)})"

    def __repr__(self) -> str:
        return f"<{self.field.kind} {self.to_text()}>"

    def sort_key(self):
        """Deterministic total order: by norm, then termwise on the form."""
        n = self.norm()
        head = (0, Q(0)) if n.is_zero else (1, -n.exponent)
        if self.field.is_series:
            return head + (self.num, self.den)
        return head + (self.rational,)


def _first_diff_exponent(a: Poly, b: Poly) -> Fraction | None:
    i = j = 0
    while i < len(a) and j < len(b):
        ea, ca = a[i]
        eb, cb = b[j]
        if ea < eb:
            return ea
        if eb < ea:
            return eb
        if ca != cb:
            return ea
        i += 1
        j += 1
    if i < len(a):
        return a[i][0]
    if j < len(b):
        return b[j][0]
    return None


def _terms_text(p: Poly) -> str:
    parts = []
    for e, c in p:
        cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
        es = str(e.numerator) if e.denominator == 1 else f"({e.numerator}/{e.denominator})"
        parts.append(f"{cs}*t^{es}")
    return " + ".join(parts)


def _padic_valuation(q: Fraction, p: int) -> int:
    if q == 0:
        raise ValueError("valuation of zero")
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    if v:
        return v
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


# ---------------------------------------------------------------------------
# Points and averages


@dataclass(frozen=True, slots=True)
class Point:
    """A tuple of field elements sharing one backend; norm is the max norm."""

    coords: tuple[FieldElement, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ValueError("points need at least one coordinate")
        f = self.coords[0].field
        for c in self.coords[1:]:
            if c.field != f:
                raise BackendMismatchError("point coordinates mix backends")

    @property
    def field(self) -> FieldDescriptor:
        return self.coords[0].field

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __len__(self):
        return len(self.coords)

    def __sub__(self, other: "Point") -> "Point":
        if len(other.coords) != len(self.coords):
            raise ValueError("dimension mismatch")
        return Point(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def norm(self) -> NormValue:
        return max_norms(c.norm() for c in self.coords)

    def norm_of_difference(self, other: "Point") -> NormValue:
        if len(other.coords) != len(self.coords):
            raise ValueError("dimension mismatch")
        return max_norms(a.norm_of_difference(b)
                         for a, b in zip(self.coords, other.coords))

    def drop(self, i: int) -> "Point":
        coords = self.coords[:i] + self.coords[i + 1:]
        return Point(coords)

    def sort_key(self):
        return tuple(c.sort_key() for c in self.coords)

    def to_text(self) -> list[str]:
        return [c.to_text() for c in self.coords]


def max_norm(x: Point) -> NormValue:
    return x.norm()


def norm(a: FieldElement) -> NormValue:
    return a.norm()


def rv(a: FieldElement) -> RVValue:
    return a.rv()


def integer_average(values: Sequence[FieldElement]) -> FieldElement:
    """Sum divided by the count.

    Warns when the count is not a unit in the backend, which happens only
    p-adically; the residue-characteristic-zero norm bound fails there.
    """
    values = list(values)
    if not values:
        raise ValueError("average of an empty sequence")
    field = values[0].field
    total = values[0]
    for v in values[1:]:
        total = total + v
    k = len(values)
    if field.mixed_characteristic and k % field.prime == 0:
        warnings.warn(
            f"averaging {k} values with |{k}|_{field.prime} < 1",
            PDivisibleCountWarning, stacklevel=2)
    return total.scale(Q(1, k))
