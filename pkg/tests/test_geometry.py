"""Cells, boxes, distance cuts, and the coordinate helpers."""

from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from ultralip.field import (
    CutValue,
    FieldDescriptor,
    NormValue,
    Point,
)
from ultralip.geometry import (
    AffineCenter,
    AnnulusBox,
    Ball,
    Cell1D,
    CellND,
    ExactBox,
    GeometryError,
    MinimalityError,
    RecenterError,
    boxes_disjoint,
    cell_member,
    cells_intersect,
    constant_center,
    contains,
    delta_partition_index,
    dist_to_set,
    fiber_box,
    realizable_exponent_between,
    recenter_cell,
    rho,
    straighten,
    unstraighten,
)

T = FieldDescriptor("t-adic")
PX = FieldDescriptor("puiseux")
theta = NormValue.theta
ZERO = NormValue.zero()


def t(e, c=1):
    return T.monomial(e, c)


def cut(e, attained=True):
    n = ZERO if e is None else theta(e)
    return CutValue(n, attained)


def sphere_box(e):
    return AnnulusBox(cut(e), cut(e))


# -- membership ----------------------------------------------------------------


def test_contains_sphere():
    cell = Cell1D(T.zero(), (sphere_box(0),))
    assert cell.contains(T.one() + t(1))
    assert not cell.contains(t(1))


def test_contains_nd():
    cell = CellND(
        2,
        (constant_center(T, 0), AffineCenter((T.one(),), T.zero())),
        ((ExactBox(T.one().rv()), ExactBox(t(1).rv())),),
    )
    assert cell.contains(Point((T.one(), T.one() + t(1))))
    assert not cell.contains(Point((T.one(), T.one())))
    assert contains(cell, Point((T.one(), T.one() + t(1))))


def test_box_validation():
    with pytest.raises(GeometryError):
        AnnulusBox(cut(0), cut(2))  # bounds out of order
    with pytest.raises(GeometryError):
        AnnulusBox(cut(None), cut(None))  # upper endpoint at zero norm
    with pytest.raises(GeometryError):
        Cell1D(T.zero(), (sphere_box(0), sphere_box(0)))  # overlapping boxes
    with pytest.raises(GeometryError):
        # empty over the discrete backend: no integer exponent strictly
        # between 1 and 2
        Cell1D(T.zero(), (AnnulusBox(cut(2, False), cut(1, False)),))
    # the same annulus is nonempty over the dense backend
    Cell1D(PX.zero(), (AnnulusBox(cut(2, False), cut(1, False)),))


# -- rho -----------------------------------------------------------------------


def test_rho_endpoint_read_off():
    c1 = Cell1D(T.zero(), (AnnulusBox(cut(2), cut(1)),))
    assert rho(c1) == cut(2)
    c2 = Cell1D(T.zero(), (AnnulusBox(cut(2, False), cut(1)),))
    assert rho(c2) == cut(2, False)
    c3 = Cell1D(T.zero(), (AnnulusBox(cut(None, False), cut(1, False)),))
    assert rho(c3) == cut(None, False)  # punctured ball, infimum zero


def test_rho_multi_box_minimum():
    c = Cell1D(T.zero(), (sphere_box(3), ExactBox(t(1).rv())))
    assert rho(c) == cut(3)


def test_contains_consistent_with_rho():
    cell = Cell1D(t(1), (sphere_box(2), ExactBox(t(4).rv())))
    r = rho(cell)
    for i in range(len(cell.boxes)):
        m = cell_member(cell, i)
        assert cell.contains(m)
        d = m.norm_of_difference(cell.center)
        assert not d < r.norm


# -- distance cuts ---------------------------------------------------------------


def test_dist_to_point_set():
    # t^3 is strictly nearer to 0 than to t^2 in the distance order
    assert dist_to_set(t(3), [T.zero(), t(2)]) == cut(3)


def test_dist_from_center_equals_rho():
    cell = Cell1D(t(1), (sphere_box(1),))
    # distances from the center read off the same cut as rho
    assert dist_to_set(cell.center, [cell]) == rho(cell)


def test_dist_inside_is_zero():
    cell = Cell1D(T.zero(), (sphere_box(0),))
    assert dist_to_set(T.one(), [cell]) == cut(None, True)
    assert dist_to_set(t(2), [t(2), T.one()]) == cut(None, True)


def test_dist_above_and_unit_mismatch():
    cell = Cell1D(T.zero(), (ExactBox(t(1).rv()),))
    assert dist_to_set(T.one(), [cell]) == cut(0)  # above the fiber norm
    assert dist_to_set(t(1, 2), [cell]) == cut(1)  # same norm, other unit
    assert dist_to_set(t(1) + t(2), [cell]) == cut(None, True)  # inside


# -- delta partition -------------------------------------------------------------


def test_delta_partition_examples():
    assert delta_partition_index(Point((t(1), T.one()))) == 1
    assert delta_partition_index(Point((T.one(), t(1)))) == 2
    assert delta_partition_index(Point((T.one(), T.one()))) == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(min_value=-3, max_value=3), min_size=2, max_size=4))
def test_delta_partition_defining_inequalities(exps):
    x = Point(tuple(t(e) for e in exps))
    i = delta_partition_index(x) - 1
    ni = x[i].norm()
    for j in range(len(exps)):
        if j < i:
            assert ni <= x[j].norm()
        elif j > i:
            assert ni < x[j].norm()


# -- straighten -------------------------------------------------------------------


def _shear_cell():
    return CellND(
        2,
        (constant_center(T, 0), AffineCenter((T.one(),), T.zero())),
        ((ExactBox(T.one().rv()), ExactBox(t(1).rv())),),
    )


def test_straighten_examples():
    cell = _shear_cell()
    assert straighten(cell, Point((t(1), t(1)))) == Point((t(1), T.zero()))
    zero_cell = CellND(2, (constant_center(T, 0), constant_center(T, 1)),
                       ((ExactBox(t(1).rv()), ExactBox(t(1).rv())),))
    p = Point((t(1), T.one()))
    assert straighten(zero_cell, p) == p


@settings(max_examples=40, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_straighten_roundtrip(e1, e2):
    cell = _shear_cell()
    x = Point((t(e1) + T.one(), t(e2)))
    assert unstraighten(cell, straighten(cell, x)) == x


def test_straighten_maps_graph_to_hyperplane():
    cell = _shear_cell()
    for e in (-2, 0, 3):
        x1 = t(e) + T.from_int(2)
        x = Point((x1, x1))  # on the graph of c_2
        assert straighten(cell, x)[1].is_zero


def test_straighten_preserves_difference_norms():
    cell = _shear_cell()
    pts = [Point((t(a), t(b))) for a, b in [(0, 1), (1, 1), (2, 0), (-1, 2)]]
    for x in pts:
        for y in pts:
            assert straighten(cell, x).norm_of_difference(straighten(cell, y)) \
                == x.norm_of_difference(y)


# -- fiber boxes ------------------------------------------------------------------


def test_fiber_box_examples():
    zeros2 = (T.zero(), T.zero())
    fb = fiber_box((ExactBox(T.one().rv()), ExactBox(t(1).rv())), zeros2, 2)
    assert fb.dimension == 1
    assert fb.contains(Point((T.one() + t(2),)))
    assert not fb.contains(Point((t(1),)))

    with pytest.raises(MinimalityError):
        fiber_box((ExactBox(t(1).rv()), ExactBox(T.one().rv())), zeros2, 2)

    zeros3 = (T.zero(),) * 3
    fb3 = fiber_box((ExactBox(T.one().rv()), ExactBox(T.one().rv()),
                     ExactBox(t(1).rv())), zeros3, 3)
    assert fb3.dimension == 2
    assert fb3.contains(Point((T.one(), T.one() + t(3))))


def test_fiber_box_independent_of_representative():
    # both representatives of the projected coordinate see the same fiber
    big = CellND(2, (constant_center(T, 0), constant_center(T, 1)),
                 ((ExactBox(T.one().rv()), ExactBox(t(1).rv())),))
    fb = fiber_box((ExactBox(T.one().rv()), ExactBox(t(1).rv())),
                   (T.zero(), T.zero()), 2)
    for x2 in (t(1), t(1) + t(3)):
        for x1 in (T.one(), T.one() + t(2)):
            assert big.contains(Point((x1, x2))) == fb.contains(Point((x1,)))


# -- translation / recentering ------------------------------------------------------


def test_recenter_preserves_members():
    cell = Cell1D(t(3), sphere_boxes := (sphere_box(2),))
    # {|x - t^3| = theta(2)} = {|x| = theta(2)}
    moved = recenter_cell(cell, T.zero())
    assert moved.boxes == sphere_boxes
    for probe in (t(2), t(2) + t(5), t(2, 7), t(3)):
        assert cell.contains(probe) == moved.contains(probe)
    assert not moved.contains(t(1))


def test_recenter_fiber_unit_twist():
    # moving distance exactly the fiber norm twists the unit
    cell = Cell1D(T.zero(), (ExactBox(t(1).rv()),))
    moved = recenter_cell(cell, t(1, -1))
    assert moved.boxes == (ExactBox(t(1, 2).rv()),)
    for probe in (t(1), t(1) + t(2), t(2)):
        assert cell.contains(probe) == moved.contains(probe)


def test_recenter_swallows_origin():
    # re-centering at a member turns the fiber into a punctured-ball-plus-point
    cell = Cell1D(T.zero(), (ExactBox(t(1).rv()),))
    moved = recenter_cell(cell, t(1))
    for probe in (t(1), t(1) + t(2), t(2), T.one(), t(1, 2)):
        assert cell.contains(probe) == moved.contains(probe)


def test_recenter_error_when_too_far():
    cell = Cell1D(T.zero(), (ExactBox(t(2).rv()),))
    with pytest.raises(RecenterError):
        recenter_cell(cell, T.one())


# -- intersection ---------------------------------------------------------------


def _members(cell, extra=()):
    out = []
    for i in range(len(cell.boxes)):
        out.append(cell_member(cell, i))
        for p in extra:
            out.append(cell_member(cell, i, perturb=p))
    return [m for m in out if cell.contains(m)]


def test_cells_intersect_positive_and_negative():
    a = Cell1D(T.zero(), (sphere_box(0),))
    b = Cell1D(t(1), (sphere_box(0),))
    assert cells_intersect(a, b)  # the two spheres coincide as sets

    far = Cell1D(T.from_int(1), (ExactBox(t(1).rv()),))  # ball around 1 + t
    near = Cell1D(T.zero(), (ExactBox(t(2).rv()),))
    assert not cells_intersect(far, near)

    nested = Cell1D(T.zero(), (AnnulusBox(cut(5), cut(0)),))
    inner = Cell1D(T.zero(), (sphere_box(3),))
    assert cells_intersect(nested, inner)


@settings(max_examples=60, deadline=None)
@given(st.integers(-2, 2), st.integers(0, 3), st.integers(-2, 2),
       st.integers(0, 3), st.sampled_from([1, 2, 3, -1]))
def test_cells_intersect_agrees_with_sampling(e1, r1, c2e, r2, u):
    a = Cell1D(t(e1), (sphere_box(e1 + r1),))
    b = Cell1D(t(c2e, u) + T.one(), (sphere_box(c2e + r2),))
    claim = cells_intersect(a, b)
    probes = _members(a, extra=[t(8), t(9)]) + _members(b, extra=[t(8), t(9)])
    seen = any(a.contains(p) and b.contains(p) for p in probes)
    if seen:
        assert claim
    if not claim:
        assert not seen


def test_boxes_disjoint_units():
    b1 = AnnulusBox(cut(1), cut(1), unit=Q(2))
    b2 = AnnulusBox(cut(1), cut(1), unit=Q(3))
    b3 = AnnulusBox(cut(1), cut(1))
    assert boxes_disjoint(b1, b2, T)
    assert not boxes_disjoint(b1, b3, T)


# -- realizable exponents ---------------------------------------------------------


def test_realizable_exponents_discrete_vs_dense():
    assert realizable_exponent_between(cut(2, False), cut(1), T) == 1
    assert realizable_exponent_between(cut(2, False), cut(2, False), T) is None
    e = realizable_exponent_between(cut(2, False), cut(1, False), PX)
    assert e is not None and Q(1) < e < Q(2)


# -- balls ------------------------------------------------------------------------


def test_ball_membership():
    b = Ball(T.zero(), theta(1), "open")
    assert b.contains(t(2)) and b.contains(T.zero()) and not b.contains(t(1))
    c = Ball(T.zero(), theta(1), "closed")
    assert c.contains(t(1)) and not c.contains(T.one())
    with pytest.raises(GeometryError):
        Ball(T.zero(), ZERO, "open")
