"""Text and JSON forms for field elements, cells, functions, skeletons.

The element grammar is the canonical JSON-embedded representation:
p-adic elements are written "num/den"; series elements are written
"(c1*t^e1 + ...)/(d1*t^f1 + ...)" with rational coefficients and integer
or parenthesised rational exponents.  Parsing is strict about structure
but tolerant of whitespace and of omitting a trivial denominator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .field import (
    CutValue,
    FieldDescriptor,
    FieldElement,
    NormValue,
    Point,
    Q,
    RVValue,
)
from .geometry import AffineCenter, AnnulusBox, Cell1D, CellND, ExactBox, RVBox
from .lipschitz import FiniteFunction
from .extension import GraphBranch, GraphFamily
from .skeleton import Skeleton


class InstanceError(ValueError):
    """A located parsing or validation error in an instance payload."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# Rational and element text


def parse_rational(s, path="rational") -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        m = re.fullmatch(r"\s*(-?\d+)\s*(?:/\s*(-?\d+)\s*)?", s)
        if m:
            num = int(m.group(1))
            den = int(m.group(2)) if m.group(2) else 1
            if den == 0:
                raise InstanceError(path, "zero denominator")
            return Fraction(num, den)
    raise InstanceError(path, f"not a rational: {s!r}")


def emit_rational(q: Fraction):
    return int(q) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


_TERM_RE = re.compile(
    r"^(?:(?P<coef>-?\d+(?:/\d+)?)(?:\*(?P<tc>t(?:\^(?P<exp>-?\d+|\(-?\d+/-?\d+\)))?))?"
    r"|(?P<t>t(?:\^(?P<exp2>-?\d+|\(-?\d+/-?\d+\)))?))$")


def _parse_exponent(s: str | None, path: str) -> Fraction:
    if s is None:
        return Q(1)
    if s.startswith("("):
        s = s[1:-1]
    return parse_rational(s, path)


def _parse_terms(s: str, path: str) -> list[tuple[Fraction, Fraction]]:
    s = s.strip()
    if s in ("", "0"):
        return []
    terms = []
    for chunk in s.split("+"):
        chunk = chunk.replace(" ", "")
        if not chunk:
            raise InstanceError(path, "empty term")
        m = _TERM_RE.fullmatch(chunk)
        if not m:
            raise InstanceError(path, f"bad term {chunk!r}")
        if m.group("t"):
            coef = Q(1)
            exp = _parse_exponent(m.group("exp2"), path)
        else:
            coef = parse_rational(m.group("coef"), path)
            if m.group("tc"):
                exp = _parse_exponent(m.group("exp"), path)
            else:
                exp = Q(0)
        terms.append((exp, coef))
    return terms


def _split_fraction(s: str, path: str) -> tuple[str, str | None]:
    s = s.strip()
    if not s.startswith("("):
        return s, None
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                head, rest = s[1:i], s[i + 1:].strip()
                if not rest:
                    return head, None
                if rest.startswith("/"):
                    rest = rest[1:].strip()
                    if rest.startswith("(") and rest.endswith(")"):
                        return head, rest[1:-1]
                raise InstanceError(path, f"malformed fraction {s!r}")
    raise InstanceError(path, f"unbalanced parentheses in {s!r}")


def parse_element(field: FieldDescriptor, s, path="element") -> FieldElement:
    if not isinstance(s, str):
        raise InstanceError(path, f"expected an element string, got {type(s).__name__}")
    if field.is_series:
        num_s, den_s = _split_fraction(s, path)
        num = _parse_terms(num_s, path)
        den = _parse_terms(den_s, path) if den_s is not None else [(0, 1)]
        try:
            return field.from_terms(num, den)
        except (ValueError, ZeroDivisionError) as e:
            raise InstanceError(path, str(e))
    return field.from_rational(parse_rational(s, path))


def emit_element(e: FieldElement) -> str:
    return e.to_text()


def parse_point(field: FieldDescriptor, xs, n: int, path="point") -> Point:
    if not isinstance(xs, list) or len(xs) != n:
        raise InstanceError(path, f"expected a list of {n} coordinates")
    return Point(tuple(parse_element(field, x, f"{path}[{i}]")
                       for i, x in enumerate(xs)))


# ---------------------------------------------------------------------------
# Norms, cuts, boxes, cells


def parse_norm(obj, path="norm") -> NormValue:
    if obj is None:
        return NormValue.zero()
    return NormValue.theta(parse_rational(obj, path))


def emit_norm(n: NormValue):
    return None if n.is_zero else emit_rational(n.exponent)


def parse_cut(obj, path="cut") -> CutValue:
    if not isinstance(obj, dict) or "attained" not in obj:
        raise InstanceError(path, "expected {'ord': ..., 'attained': bool}")
    return CutValue(parse_norm(obj.get("ord"), f"{path}.ord"),
                    bool(obj["attained"]))


def emit_cut(c: CutValue) -> dict:
    return {"ord": emit_norm(c.norm), "attained": c.attained}


def parse_box(field: FieldDescriptor, obj, path="box") -> RVBox:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise InstanceError(path, "expected {'exact': ...} or {'annulus': ...}")
    if "exact" in obj:
        body = obj["exact"]
        if body.get("ord") is None:
            return ExactBox(RVValue.zero())
        exp = parse_rational(body["ord"], f"{path}.ord")
        unit = parse_rational(body.get("unit", 1), f"{path}.unit")
        return ExactBox(RVValue(
            field.check_exponent(exp), unit,
            field.prime if field.mixed_characteristic else None))
    if "annulus" in obj:
        body = obj["annulus"]
        unit = body.get("unit")
        return AnnulusBox(
            parse_cut(body["lower"], f"{path}.lower"),
            parse_cut(body["upper"], f"{path}.upper"),
            None if unit is None else parse_rational(unit, f"{path}.unit"))
    raise InstanceError(path, f"unknown box kind {list(obj)!r}")


def emit_box(b: RVBox) -> dict:
    if isinstance(b, ExactBox):
        if b.rv.is_zero:
            return {"exact": {"ord": None, "unit": None}}
        return {"exact": {"ord": emit_rational(b.rv.exponent),
                          "unit": emit_rational(b.rv.unit)}}
    return {"annulus": {
        "lower": emit_cut(b.lower),
        "upper": emit_cut(b.upper),
        "unit": None if b.unit is None else emit_rational(b.unit)}}


def parse_cell(field: FieldDescriptor, obj, path="cell") -> Cell1D:
    if not isinstance(obj, dict) or "center" not in obj or "boxes" not in obj:
        raise InstanceError(path, "expected {'center': ..., 'boxes': [...]}")
    center = parse_element(field, obj["center"], f"{path}.center")
    boxes = tuple(parse_box(field, b, f"{path}.boxes[{i}]")
                  for i, b in enumerate(obj["boxes"]))
    try:
        return Cell1D(center, boxes)
    except ValueError as e:
        raise InstanceError(path, str(e))


def emit_cell(c: Cell1D) -> dict:
    return {"center": emit_element(c.center),
            "boxes": [emit_box(b) for b in c.boxes]}


def parse_affine_center(field: FieldDescriptor, obj,
                        path="center") -> AffineCenter:
    """Affine-record form: {'coefficients': [...], 'constant': elem}."""
    if not isinstance(obj, dict) or "constant" not in obj:
        raise InstanceError(path, "expected {'coefficients': [...], 'constant': ...}")
    coeffs = tuple(parse_element(field, c, f"{path}.coefficients[{i}]")
                   for i, c in enumerate(obj.get("coefficients", [])))
    constant = parse_element(field, obj["constant"], f"{path}.constant")
    try:
        return AffineCenter(coeffs, constant)
    except ValueError as e:
        raise InstanceError(path, str(e))


def emit_affine_center(c: AffineCenter) -> dict:
    return {"coefficients": [emit_element(x) for x in c.coefficients],
            "constant": emit_element(c.constant)}


def parse_cellnd(field: FieldDescriptor, obj, path="cell") -> CellND:
    """An n-dimensional cell: affine-record centers and box tuples."""
    if not isinstance(obj, dict) or "centers" not in obj or "boxes" not in obj:
        raise InstanceError(path, "expected {'centers': [...], 'boxes': [[...]]}")
    centers = tuple(parse_affine_center(field, c, f"{path}.centers[{i}]")
                    for i, c in enumerate(obj["centers"]))
    boxes = tuple(
        tuple(parse_box(field, b, f"{path}.boxes[{i}][{j}]")
              for j, b in enumerate(row))
        for i, row in enumerate(obj["boxes"]))
    try:
        return CellND(len(centers), centers, boxes)
    except ValueError as e:
        raise InstanceError(path, str(e))


def emit_cellnd(c: CellND) -> dict:
    return {"centers": [emit_affine_center(x) for x in c.centers],
            "boxes": [[emit_box(b) for b in row] for row in c.boxes]}


# ---------------------------------------------------------------------------
# Finite functions, skeletons, families


def parse_finite_function(field: FieldDescriptor, obj,
                          path="function") -> FiniteFunction:
    if not isinstance(obj, dict) or "n" not in obj or "entries" not in obj:
        raise InstanceError(path, "expected {'n': int, 'entries': [...]}")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise InstanceError(f"{path}.n", "domain dimension must be a positive int")
    entries = []
    for i, ent in enumerate(obj["entries"]):
        p = parse_point(field, ent.get("x"), n, f"{path}.entries[{i}].x")
        v = parse_element(field, ent.get("fx"), f"{path}.entries[{i}].fx")
        entries.append((p, v))
    try:
        return FiniteFunction(n, tuple(entries))
    except ValueError as e:
        raise InstanceError(path, str(e))


def emit_finite_function(f: FiniteFunction) -> dict:
    return {"n": f.n,
            "entries": [{"x": p.to_text(), "fx": emit_element(v)}
                        for p, v in f.entries]}


def emit_skeleton(s: Skeleton, cells) -> dict:
    cells = list(cells)
    return {
        "levels": [{"radius": emit_cut(lv.radius),
                    "points": [emit_element(p) for p in lv.points]}
                   for lv in s.levels],
        "attachments": [{"cell": cells.index(cell), "point": emit_element(pt)}
                        for cell, pt in s.attachments],
    }


def parse_field(obj, path="field") -> FieldDescriptor:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InstanceError(path, "expected {'kind': ..., 'prime': ...?}")
    try:
        return FieldDescriptor(obj["kind"], obj.get("prime"))
    except ValueError as e:
        raise InstanceError(f"{path}.kind", str(e))


def emit_field(f: FieldDescriptor) -> dict:
    out = {"kind": f.kind}
    if f.prime is not None:
        out["prime"] = f.prime
    return out


# ---------------------------------------------------------------------------
# Whole instances


TASKS = ("extend-finite", "extend-cell", "extend-graphs", "glue", "skeleton")


@dataclass(frozen=True)
class Instance:
    task: str
    field: FieldDescriptor
    function: FiniteFunction | None = None
    cells: tuple[Cell1D, ...] | None = None
    pieces: tuple[tuple[FieldElement, FieldElement], ...] | None = None
    family: GraphFamily | None = None
    parts: tuple[FiniteFunction, ...] | None = None
    glue_a: FiniteFunction | None = None
    glue_b: tuple[Point, ...] | None = None
    raw: dict | None = None


def parse_instance(data) -> Instance:
    """Validate a JSON instance into typed values, or raise a located error."""
    if isinstance(data, (bytes, str)):
        import json
        try:
            data = json.loads(data)
        except ValueError as e:
            raise InstanceError("$", f"not valid JSON: {e}")
    if not isinstance(data, dict):
        raise InstanceError("$", "instance must be a JSON object")
    task = data.get("task")
    if task not in TASKS:
        raise InstanceError("$.task", f"unknown task {task!r}; expected one of {TASKS}")
    field = parse_field(data.get("field"), "$.field")

    if task == "extend-finite":
        fn = parse_finite_function(field, data.get("function"), "$.function")
        return Instance(task, field, function=fn, raw=data)

    if task in ("extend-cell", "skeleton"):
        cells_obj = data.get("cells")
        if not isinstance(cells_obj, list) or not cells_obj:
            raise InstanceError("$.cells", "expected a nonempty list of cells")
        cells = tuple(parse_cell(field, c, f"$.cells[{i}]")
                      for i, c in enumerate(cells_obj))
        pieces = None
        if task == "extend-cell":
            pieces_obj = data.get("pieces")
            if not isinstance(pieces_obj, list) or len(pieces_obj) != len(cells):
                raise InstanceError("$.pieces", "expected one piece per cell")
            pieces = tuple(
                (parse_element(field, p.get("slope"), f"$.pieces[{i}].slope"),
                 parse_element(field, p.get("intercept"), f"$.pieces[{i}].intercept"))
                for i, p in enumerate(pieces_obj))
        return Instance(task, field, cells=cells, pieces=pieces, raw=data)

    if task == "extend-graphs":
        cells_obj = data.get("base_cells")
        if not isinstance(cells_obj, list) or not cells_obj:
            raise InstanceError("$.base_cells", "expected a nonempty list of cells")
        cells = tuple(parse_cell(field, c, f"$.base_cells[{i}]")
                      for i, c in enumerate(cells_obj))
        branches_obj = data.get("branches")
        if not isinstance(branches_obj, list) or len(branches_obj) != len(cells):
            raise InstanceError("$.branches", "expected one branch list per cell")
        branches = []
        for i, brs in enumerate(branches_obj):
            row = []
            for j, br in enumerate(brs):
                path = f"$.branches[{i}][{j}]"
                row.append(GraphBranch(
                    parse_element(field, br.get("phi_slope"), f"{path}.phi_slope"),
                    parse_element(field, br.get("phi_intercept"),
                                  f"{path}.phi_intercept"),
                    parse_element(field, br.get("value_slope"),
                                  f"{path}.value_slope"),
                    parse_element(field, br.get("value_intercept"),
                                  f"{path}.value_intercept")))
            branches.append(tuple(row))
        try:
            family = GraphFamily(cells, tuple(branches))
        except ValueError as e:
            raise InstanceError("$.branches", str(e))
        return Instance(task, field, family=family, raw=data)

    # glue: either a list of parts or an (a, b) vanishing payload
    if "parts" in data:
        parts_obj = data["parts"]
        if not isinstance(parts_obj, list) or not parts_obj:
            raise InstanceError("$.parts", "expected a nonempty list")
        parts = tuple(parse_finite_function(field, p, f"$.parts[{i}]")
                      for i, p in enumerate(parts_obj))
        if len({p.n for p in parts}) != 1:
            raise InstanceError("$.parts", "parts mix dimensions")
        return Instance(task, field, parts=parts, raw=data)
    if "a" in data and "b" in data:
        a = parse_finite_function(field, data["a"], "$.a")
        b_obj = data["b"]
        if not isinstance(b_obj, list):
            raise InstanceError("$.b", "expected a list of points")
        b = tuple(parse_point(field, xs, a.n, f"$.b[{i}]")
                  for i, xs in enumerate(b_obj))
        return Instance(task, field, glue_a=a, glue_b=b, raw=data)
    raise InstanceError("$", "glue needs either 'parts' or 'a' and 'b'")


def emit_instance(inst: Instance) -> dict:
    """Structural emission; parse(emit(x)) reproduces x."""
    out: dict = {"task": inst.task, "field": emit_field(inst.field)}
    if inst.function is not None:
        out["function"] = emit_finite_function(inst.function)
    if inst.cells is not None:
        key = "cells"
        out[key] = [emit_cell(c) for c in inst.cells]
    if inst.pieces is not None:
        out["pieces"] = [{"slope": emit_element(a), "intercept": emit_element(b)}
                         for a, b in inst.pieces]
    if inst.family is not None:
        out["base_cells"] = [emit_cell(c) for c in inst.family.base_cells]
        out["branches"] = [
            [{"phi_slope": emit_element(br.phi_slope),
              "phi_intercept": emit_element(br.phi_intercept),
              "value_slope": emit_element(br.value_slope),
              "value_intercept": emit_element(br.value_intercept)}
             for br in row]
            for row in inst.family.branches]
    if inst.parts is not None:
        out["parts"] = [emit_finite_function(p) for p in inst.parts]
    if inst.glue_a is not None:
        out["a"] = emit_finite_function(inst.glue_a)
        out["b"] = [p.to_text() for p in inst.glue_b]
    return out
