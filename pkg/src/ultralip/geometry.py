"""Balls, annuli, cells with center tuples, and exact distance cuts.

A one-dimensional cell is a center together with a finite union of
rv-boxes; membership of x is decided from rv(x - center).  Boxes are
either a single rv value (a fiber, geometrically an open ball) or an
annulus of norms with endpoint cuts and an optional unit constraint.
This is the largest class for which membership and distance infima are
exactly decidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .field import (
    BackendMismatchError,
    CutValue,
    FieldDescriptor,
    FieldElement,
    NormValue,
    Point,
    Q,
    RVValue,
    _padic_residue,
    cut_of_value,
)


class GeometryError(ValueError):
    pass


class RecenterError(GeometryError):
    """A box translation left the exactly representable class."""


class MinimalityError(GeometryError):
    """The fiber-box minimality precondition |lam_i| <= |lam_j| failed."""


# ---------------------------------------------------------------------------
# Endpoint cuts as annulus bounds
#
# As bounds the attained flag means endpoint inclusion: an attained lower
# cut allows |v| = r, a strict one does not, and symmetrically above.


def satisfies_lower(v: NormValue, cut: CutValue) -> bool:
    if cut.attained:
        return v >= cut.norm
    return v > cut.norm


def satisfies_upper(v: NormValue, cut: CutValue) -> bool:
    if cut.attained:
        return v <= cut.norm
    return v < cut.norm


def realizable_exponent_between(lower: CutValue, upper: CutValue,
                                field: FieldDescriptor) -> Fraction | None:
    """An exponent e with theta(e) inside both bounds, or None.

    Realizability depends on the backend: t-adic exponents are integers,
    puiseux exponents are dense rationals.
    """
    if upper.norm.is_zero:
        return None
    qu = upper.norm.exponent  # theta(e) <= upper  <=>  e >= qu (with flag)
    ql = None if lower.norm.is_zero else lower.norm.exponent
    if field.kind == "t-adic":
        e_min = math.ceil(qu) if upper.attained else math.floor(qu) + 1
        if ql is None:
            return Q(e_min)
        e_max = math.floor(ql) if lower.attained else math.ceil(ql) - 1
        if e_min > e_max:
            return None
        return Q(e_min)
    # dense exponents
    if ql is None:
        return qu if upper.attained else qu + 1
    if qu > ql:
        return None
    if qu == ql:
        return qu if (upper.attained and lower.attained) else None
    if upper.attained:
        return qu
    if lower.attained:
        return ql
    return (qu + ql) / 2


# ---------------------------------------------------------------------------
# Boxes


@dataclass(frozen=True, slots=True)
class ExactBox:
    """A single rv value; ExactBox(rv(0)) denotes the center point itself."""

    rv: RVValue


@dataclass(frozen=True, slots=True)
class AnnulusBox:
    """All rv values with norm between two endpoint cuts.

    An optional unit constraint restricts to leading units equal to the
    given nonzero rational; the zero rv belongs to the box only when the
    lower endpoint attains the zero norm and no unit constraint is set.
    """

    lower: CutValue
    upper: CutValue
    unit: Fraction | None = None

    def __post_init__(self):
        if self.upper < self.lower:
            raise GeometryError(f"annulus bounds out of order: {self}")
        if self.upper.norm.is_zero:
            raise GeometryError("annulus upper endpoint at the zero norm")
        if self.unit is not None and self.unit == 0:
            raise GeometryError("annulus unit constraint must be nonzero")

    @property
    def contains_zero(self) -> bool:
        return self.lower.norm.is_zero and self.lower.attained and self.unit is None


RVBox = ExactBox | AnnulusBox


def _units_equal(a: Fraction, b: Fraction, field: FieldDescriptor) -> bool:
    if field.mixed_characteristic:
        return _padic_residue(a, field.prime) == _padic_residue(b, field.prime)
    return a == b


def box_contains_rv(box: RVBox, v: RVValue, field: FieldDescriptor) -> bool:
    if isinstance(box, ExactBox):
        return box.rv == v
    if v.is_zero:
        return box.contains_zero
    n = v.norm
    if not (satisfies_lower(n, box.lower) and satisfies_upper(n, box.upper)):
        return False
    return box.unit is None or _units_equal(box.unit, v.unit, field)


def box_is_empty(box: RVBox, field: FieldDescriptor) -> bool:
    if isinstance(box, ExactBox):
        return False
    if box.contains_zero:
        return False
    return realizable_exponent_between(box.lower, box.upper, field) is None


def box_representative_rv(box: RVBox, field: FieldDescriptor) -> RVValue:
    """Some rv value inside the box (the box must be nonempty)."""
    if isinstance(box, ExactBox):
        return box.rv
    e = realizable_exponent_between(box.lower, box.upper, field)
    if e is None:
        if box.contains_zero:
            return RVValue.zero()
        raise GeometryError(f"empty box {box}")
    unit = box.unit if box.unit is not None else Q(1)
    return RVValue(e, unit, field.prime if field.mixed_characteristic else None)


def _box_min_cut(box: RVBox) -> CutValue:
    """The infimum cut of norms of members (symbolic endpoint read-off)."""
    if isinstance(box, ExactBox):
        return CutValue(box.rv.norm, True)
    return box.lower


def _norm_range_overlap(b1: AnnulusBox, b2: AnnulusBox,
                        field: FieldDescriptor,
                        strictly_above: NormValue | None = None) -> bool:
    lower = max(b1.lower, b2.lower)
    upper = min(b1.upper, b2.upper)
    if strictly_above is not None and not strictly_above.is_zero:
        floor_cut = CutValue(strictly_above, False)  # exclusive bound
        if floor_cut > lower:
            lower = floor_cut
    if upper < lower:
        return False
    return realizable_exponent_between(lower, upper, field) is not None


def _box_unit_set_at(box: RVBox, n: NormValue, field: FieldDescriptor):
    """Unit constraints at a given norm: None = all units, () = none, (u,) = one."""
    if isinstance(box, ExactBox):
        if not box.rv.is_zero and box.rv.norm == n:
            return (box.rv.unit,)
        return ()
    if satisfies_lower(n, box.lower) and satisfies_upper(n, box.upper):
        return None if box.unit is None else (box.unit,)
    return ()


def boxes_disjoint(b1: RVBox, b2: RVBox, field: FieldDescriptor) -> bool:
    """Whether two boxes are disjoint as subsets of RV."""
    if isinstance(b1, ExactBox):
        if isinstance(b2, ExactBox):
            return b1.rv != b2.rv
        return not box_contains_rv(b2, b1.rv, field)
    if isinstance(b2, ExactBox):
        return not box_contains_rv(b1, b2.rv, field)
    if b1.contains_zero and b2.contains_zero:
        return False
    if b1.unit is not None and b2.unit is not None \
            and not _units_equal(b1.unit, b2.unit, field):
        return True
    return not _norm_range_overlap(b1, b2, field)


# ---------------------------------------------------------------------------
# One-dimensional cells


@dataclass(frozen=True, slots=True)
class Cell1D:
    center: FieldElement
    boxes: tuple[RVBox, ...]

    def __post_init__(self):
        if not self.boxes:
            raise GeometryError("cell needs at least one box")
        field = self.center.field
        for b in self.boxes:
            if box_is_empty(b, field):
                raise GeometryError(f"box {b} is empty over {field.kind}")
        for i, a in enumerate(self.boxes):
            for b in self.boxes[i + 1:]:
                if not boxes_disjoint(a, b, field):
                    raise GeometryError(f"overlapping boxes {a} and {b}")

    @property
    def field(self) -> FieldDescriptor:
        return self.center.field

    def contains(self, x: FieldElement) -> bool:
        if x.field != self.field:
            raise BackendMismatchError("cell and point backends differ")
        v = (x - self.center).rv()
        return any(box_contains_rv(b, v, self.field) for b in self.boxes)


def rho(cell: Cell1D) -> CutValue:
    """The infimum cut of |x - center| over the cell (endpoint read-off)."""
    return min(_box_min_cut(b) for b in cell.boxes)


def cell_member(cell: Cell1D, box_index: int = 0,
                perturb: FieldElement | None = None) -> FieldElement:
    """A concrete member of the cell from the given box."""
    field = cell.field
    rv0 = box_representative_rv(cell.boxes[box_index], field)
    if rv0.is_zero:
        base = cell.center
    else:
        base = cell.center + field.monomial(rv0.exponent, rv0.unit)
    if perturb is not None:
        candidate = base + perturb
        if cell.contains(candidate):
            return candidate
    return base


# ---------------------------------------------------------------------------
# Distance cuts


def _dist_to_box(w: FieldElement, box: RVBox, field: FieldDescriptor) -> CutValue:
    """Infimum cut of |w - v| over rv-fiber members v of the box."""
    vw = w.rv()
    if box_contains_rv(box, vw, field):
        return CutValue(NormValue.zero(), True)
    n = w.norm()
    if isinstance(box, ExactBox):
        if box.rv.is_zero:
            return CutValue(n, True)
        fiber_norm = box.rv.norm
        if n == fiber_norm:
            return CutValue(n, True)
        return CutValue(max(n, fiber_norm), True)
    if w.is_zero:
        return box.lower  # norms of members, read off the lower endpoint
    if not satisfies_upper(n, box.upper):
        return CutValue(n, True)  # every member is smaller in norm
    if satisfies_lower(n, box.lower):
        return CutValue(n, True)  # same norm, unit mismatch
    return box.lower  # w below the norm range


def dist_to_cell(x: FieldElement, cell: Cell1D) -> CutValue:
    w = x - cell.center
    return min(_dist_to_box(w, b, cell.field) for b in cell.boxes)


def dist_to_points(x, points) -> CutValue:
    """Attained minimum distance to a finite nonempty point set."""
    best = None
    for p in points:
        d = x.norm_of_difference(p)
        if best is None or d < best:
            best = d
    if best is None:
        raise GeometryError("distance to an empty set")
    return CutValue(best, True)


def dist_to_set(x, targets) -> CutValue:
    """Infimum cut of |x - y| over a union of cells or a finite point set."""
    targets = list(targets)
    if not targets:
        raise GeometryError("distance to an empty union")
    if isinstance(targets[0], Cell1D):
        return min(dist_to_cell(x, c) for c in targets)
    return dist_to_points(x, targets)


# ---------------------------------------------------------------------------
# Cell intersection (exactly decidable)


def _common_rv_exists(b1: RVBox, b2: RVBox, field: FieldDescriptor,
                      strictly_above: NormValue | None = None) -> bool:
    """Whether some nonzero rv lies in both boxes (optionally with norm > bound)."""
    if isinstance(b1, ExactBox):
        if b1.rv.is_zero:
            return False
        if strictly_above is not None and not b1.rv.norm > strictly_above:
            return False
        return box_contains_rv(b2, b1.rv, field)
    if isinstance(b2, ExactBox):
        return _common_rv_exists(b2, b1, field, strictly_above)
    if b1.unit is not None and b2.unit is not None \
            and not _units_equal(b1.unit, b2.unit, field):
        return False
    return _norm_range_overlap(b1, b2, field, strictly_above)


def _shifted_unit_pair_exists(u1_set, u2_set, lam: Fraction,
                              field: FieldDescriptor) -> bool:
    """Whether units a in U1, b in U2 exist with a - lam = b and a != lam."""
    def ok(a: Fraction) -> bool:
        if field.mixed_characteristic:
            p = field.prime
            if (_padic_residue(a, p) - _padic_residue(lam, p)) % p == 0:
                return False
            b = Fraction((_padic_residue(a, p) - _padic_residue(lam, p)) % p)
        else:
            if a == lam:
                return False
            b = a - lam
        if u2_set is None:
            return True
        return _units_equal(b, u2_set[0], field)

    if u1_set == () or u2_set == ():
        return False
    if u1_set is not None:
        return ok(u1_set[0])
    # u1 unconstrained: solve from u2 or pick freely
    if u2_set is not None:
        b = u2_set[0]
        if field.mixed_characteristic:
            p = field.prime
            a = (_padic_residue(b, p) + _padic_residue(lam, p)) % p
            return a != 0
        a = b + lam
        return a != 0
    if field.mixed_characteristic:
        return field.prime > 2  # need a residue distinct from lam
    return True


def cells_intersect(c1: Cell1D, c2: Cell1D) -> bool:
    """Exact intersection test for two cells over the same backend."""
    if c1.field != c2.field:
        raise BackendMismatchError("cells from different backends")
    field = c1.field
    d = c2.center - c1.center
    if d.is_zero:
        return any(not boxes_disjoint(a, b, field)
                   for a in c1.boxes for b in c2.boxes)
    big = d.norm()
    rv_d = d.rv()
    rv_neg_d = (-d).rv()
    lam = d.rv().unit
    below_d = CutValue(big, False)  # exclusive upper bound: norms < |d|
    for b1 in c1.boxes:
        for b2 in c2.boxes:
            # |w| < |d|: then rv(w - d) = rv(-d)
            if box_contains_rv(b2, rv_neg_d, field) \
                    and _box_allows_norm_below(b1, below_d, field):
                return True
            # |w| > |d|: then rv(w - d) = rv(w)
            if _common_rv_exists(b1, b2, field, strictly_above=big):
                return True
            # |w| = |d|, rv(w) = rv(d): w - d is free with norm < |d|
            if box_contains_rv(b1, rv_d, field) \
                    and _box_allows_norm_below(b2, below_d, field):
                return True
            # |w| = |d|, rv(w) != rv(d): leading units subtract
            u1 = _box_unit_set_at(b1, big, field)
            u2 = _box_unit_set_at(b2, big, field)
            if _shifted_unit_pair_exists(u1, u2, lam, field):
                return True
    return False


def _box_allows_norm_below(box: RVBox, bound: CutValue,
                           field: FieldDescriptor) -> bool:
    """Whether the box has a member with norm strictly below |d| (0 included)."""
    if isinstance(box, ExactBox):
        if box.rv.is_zero:
            return True
        return satisfies_upper(box.rv.norm, bound)
    if box.contains_zero:
        return True
    upper = min(box.upper, bound)
    if upper < box.lower:
        return False
    return realizable_exponent_between(box.lower, upper, field) is not None


# ---------------------------------------------------------------------------
# Box translation (for skeleton re-centering)


def translate_box(box: RVBox, d: FieldElement) -> tuple[RVBox, ...]:
    """The set {v + d : rv(v) in box} as rv-boxes relative to the new origin.

    Raises RecenterError when the translated set is not a union of boxes,
    which happens exactly when |d| reaches into the box's norm range.
    """
    field = d.field
    if d.is_zero:
        return (box,)
    nd = d.norm()
    if isinstance(box, ExactBox):
        if box.rv.is_zero:
            return (ExactBox(d.rv()),)
        fiber_norm = box.rv.norm
        if nd < fiber_norm:
            return (box,)
        rep = field.monomial(box.rv.exponent, box.rv.unit)
        shifted = rep + d
        if shifted.is_zero or shifted.norm() < fiber_norm:
            # the shifted ball swallows the origin: |w| < fiber_norm
            return (
                ExactBox(RVValue.zero()),
                AnnulusBox(CutValue(NormValue.zero(), False),
                           CutValue(fiber_norm, False)),
            )
        if shifted.norm() == fiber_norm:
            return (ExactBox(shifted.rv()),)
        raise RecenterError(f"translation by {d!r} breaks fiber {box}")
    if cut_of_value(nd) < box.lower:
        return (box,)
    if box.unit is not None and box.lower.attained and nd == box.lower.norm:
        # split off the boundary fiber, which translates like an exact box,
        # and keep the rest of the annulus untouched
        boundary = ExactBox(RVValue(
            nd.exponent, box.unit,
            field.prime if field.mixed_characteristic else None))
        rest_lower = CutValue(box.lower.norm, False)
        parts = list(translate_box(boundary, d))
        if not (box.upper < rest_lower):
            rest = AnnulusBox(rest_lower, box.upper, box.unit)
            if not box_is_empty(rest, field):
                parts.append(rest)
        return tuple(parts)
    raise RecenterError(f"translation by {d!r} reaches into annulus {box}")


def recenter_cell(cell: Cell1D, new_center: FieldElement) -> Cell1D:
    """Present the same member set relative to a new center."""
    d = cell.center - new_center
    boxes: list[RVBox] = []
    for b in cell.boxes:
        boxes.extend(translate_box(b, d))
    return Cell1D(new_center, tuple(boxes))


# ---------------------------------------------------------------------------
# Multi-dimensional cells with affine 1-Lipschitz centers


@dataclass(frozen=True, slots=True)
class AffineCenter:
    """c(x) = constant + sum coeff_j * x_j over the earlier coordinates.

    1-Lipschitz iff every coefficient has norm at most one; enforced here.
    """

    coefficients: tuple[FieldElement, ...]
    constant: FieldElement

    def __post_init__(self):
        for c in self.coefficients:
            if c.norm() > NormValue.theta(0):
                raise GeometryError(f"center coefficient {c!r} has norm > 1")

    @property
    def field(self) -> FieldDescriptor:
        return self.constant.field

    def evaluate(self, prefix: Sequence[FieldElement]) -> FieldElement:
        if len(prefix) != len(self.coefficients):
            raise GeometryError("wrong number of coordinates for center")
        acc = self.constant
        for c, x in zip(self.coefficients, prefix):
            acc = acc + c * x
        return acc


def constant_center(field: FieldDescriptor, arity: int,
                    value: FieldElement | None = None) -> AffineCenter:
    if value is None:
        value = field.zero()
    return AffineCenter(tuple(field.zero() for _ in range(arity)), value)


@dataclass(frozen=True, slots=True)
class CellND:
    dimension: int
    centers: tuple[AffineCenter, ...]
    boxes: tuple[tuple[RVBox, ...], ...]

    def __post_init__(self):
        if self.dimension < 1 or len(self.centers) != self.dimension:
            raise GeometryError("one center per coordinate required")
        for i, c in enumerate(self.centers):
            if len(c.coefficients) != i:
                raise GeometryError(f"center {i} must depend on {i} coordinates")
        for tup in self.boxes:
            if len(tup) != self.dimension:
                raise GeometryError("box tuple arity mismatch")

    @property
    def field(self) -> FieldDescriptor:
        return self.centers[0].field

    def residues(self, x: Point) -> tuple[FieldElement, ...]:
        if x.dimension != self.dimension:
            raise GeometryError("dimension mismatch")
        out = []
        for i, c in enumerate(self.centers):
            out.append(x[i] - c.evaluate(x.coords[:i]))
        return tuple(out)

    def contains(self, x: Point) -> bool:
        if x.field != self.field:
            raise BackendMismatchError("cell and point backends differ")
        rvs = [w.rv() for w in self.residues(x)]
        for tup in self.boxes:
            if all(box_contains_rv(b, v, self.field) for b, v in zip(tup, rvs)):
                return True
        return False


def contains(cell, x) -> bool:
    """Membership for 1-D or n-D cells; Point inputs allowed for both."""
    if isinstance(cell, Cell1D):
        if isinstance(x, Point):
            if x.dimension != 1:
                raise GeometryError("dimension mismatch")
            x = x[0]
        return cell.contains(x)
    if not isinstance(x, Point):
        raise GeometryError("n-dimensional membership needs a Point")
    return cell.contains(x)


def delta_partition_index(x: Point) -> int:
    """The unique 1-based i with |x_i| <= |x_j| for j < i and < for j > i.

    Ties go to the later coordinate, mirroring the weak inequality against
    earlier coordinates in the coordinate-hyperplane partition.
    """
    norms = [c.norm() for c in x.coords]
    best = 0
    for i in range(1, len(norms)):
        if norms[i] <= norms[best]:
            best = i
    return best + 1


def straighten(cell: CellND, x: Point) -> Point:
    """(x_1 - c_1, ..., x_n - c_n(x_<n)); bi-Lipschitz with inverse below."""
    return Point(cell.residues(x))


def unstraighten(cell: CellND, y: Point) -> Point:
    if y.dimension != cell.dimension:
        raise GeometryError("dimension mismatch")
    coords: list[FieldElement] = []
    for i, c in enumerate(cell.centers):
        coords.append(y[i] + c.evaluate(coords[:i]))
    return Point(tuple(coords))


def fiber_box(box_tuple: Sequence[RVBox], centers: Sequence[FieldElement],
              i: int) -> CellND:
    """The common fiber of a twisted box under projection to the x_i axis.

    Takes a tuple of exact boxes with constant centers and a 1-based index
    whose norm is minimal among the tuple; returns the (n-1)-dimensional
    twisted box obtained by dropping that coordinate.
    """
    n = len(box_tuple)
    if not 1 <= i <= n:
        raise GeometryError(f"index {i} out of range 1..{n}")
    if len(centers) != n:
        raise GeometryError("one constant center per coordinate required")
    for b in box_tuple:
        if not isinstance(b, ExactBox):
            raise GeometryError("fiber projection needs exact boxes")
    k = i - 1
    ni = box_tuple[k].rv.norm
    for j, b in enumerate(box_tuple):
        if ni > b.rv.norm:
            raise MinimalityError(
                f"|lam_{i}| <= |lam_{j + 1}| fails: {ni!r} > {b.rv.norm!r}")
    field = centers[0].field
    rest_centers = tuple(c for j, c in enumerate(centers) if j != k)
    rest_boxes = tuple(b for j, b in enumerate(box_tuple) if j != k)
    return CellND(
        n - 1,
        tuple(constant_center(field, j, c) for j, c in enumerate(rest_centers)),
        (rest_boxes,),
    )


# ---------------------------------------------------------------------------
# Balls


@dataclass(frozen=True, slots=True)
class Ball:
    center: FieldElement
    radius: NormValue
    boundary: str = "open"

    def __post_init__(self):
        if self.boundary not in ("open", "closed"):
            raise GeometryError(f"bad boundary {self.boundary!r}")
        if self.boundary == "open" and self.radius.is_zero:
            raise GeometryError("open ball with zero radius is empty")

    @property
    def field(self) -> FieldDescriptor:
        return self.center.field

    def contains(self, x: FieldElement) -> bool:
        d = x.norm_of_difference(self.center)
        if self.boundary == "open":
            return d < self.radius
        return d <= self.radius
