"""Validators: outer visibility, right-angle crossings, slope discipline, density.

Each check returns a ValidationReport rather than raising, including when the
drawing is malformed at the arrangement level (overlapping or improperly
incident edges): those become violations of the corresponding kind, so a
caller can always distinguish "invalid drawing" from "valid drawing that
fails this property".  Checks never mutate anything and may run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arrangement import build_arrangement, point_enclosed_by_walk, proper_crossings
from .drawing import Drawing
from .errors import ImproperIncidence, OverlappingEdges
from .geometry import SlopeClass, dot, format_rational
from .graphs import Graph

OUTER_HIDDEN_VERTEX = "OUTER_HIDDEN_VERTEX"
NON_RIGHT_CROSSING = "NON_RIGHT_CROSSING"
BAD_SLOPE = "BAD_SLOPE"
DENSITY_EXCEEDED = "DENSITY_EXCEEDED"
OVERLAPPING_EDGES = "OVERLAPPING_EDGES"
IMPROPER_INCIDENCE = "IMPROPER_INCIDENCE"

VIOLATION_KINDS = (
    OUTER_HIDDEN_VERTEX,
    NON_RIGHT_CROSSING,
    BAD_SLOPE,
    DENSITY_EXCEEDED,
    OVERLAPPING_EDGES,
    IMPROPER_INCIDENCE,
)


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "witness": self.witness}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "verdict": "pass" if self.ok else "fail",
            "violations": [v.to_json() for v in self.violations],
        }

    def merged_with(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.violations + other.violations)


def _point_witness(p) -> list[str]:
    return [format_rational(p.x), format_rational(p.y)]


def _malformed(exc) -> ValidationReport:
    kind = OVERLAPPING_EDGES if isinstance(exc, OverlappingEdges) else IMPROPER_INCIDENCE
    witness = {"message": exc.message}
    witness.update(exc.details)
    return ValidationReport([Violation(kind, witness)])


def check_outer(d: Drawing) -> ValidationReport:
    """Every vertex must lie on the boundary of the unbounded cell."""
    segs = d.segments()
    try:
        arr = build_arrangement(segs)
    except (OverlappingEdges, ImproperIncidence) as exc:
        return _malformed(exc)

    violations: list[Violation] = []
    on_outer = {arr.points[v] for v in arr.outer_incident_vertices()}
    isolated = [v for v in range(d.graph.n) if d.graph.degree(v) == 0]
    for v in isolated:
        p = d.point_of(v)
        hit = next((e for e, s in enumerate(segs) if s.contains(p)), None)
        if hit is not None:
            violations.append(
                Violation(
                    IMPROPER_INCIDENCE,
                    {"vertex": v, "edge": hit, "point": _point_witness(p)},
                )
            )
            continue
        enclosed = any(
            point_enclosed_by_walk(p, arr.walk_arcs(arr.component_outer_face[c]))
            for c in range(arr.n_components)
        )
        if enclosed:
            violations.append(Violation(OUTER_HIDDEN_VERTEX, {"vertex": v}))
    for v in range(d.graph.n):
        if d.graph.degree(v) > 0 and d.point_of(v) not in on_outer:
            violations.append(Violation(OUTER_HIDDEN_VERTEX, {"vertex": v}))
    return ValidationReport(violations)


def check_rac(d: Drawing) -> ValidationReport:
    """Every proper crossing must be at an exact right angle."""
    try:
        pairs = proper_crossings(d.segments())
    except (OverlappingEdges, ImproperIncidence) as exc:
        return _malformed(exc)
    violations = [
        Violation(
            NON_RIGHT_CROSSING,
            {"edges": [i, j], "point": _point_witness(p)},
        )
        for i, j, p in pairs
        if dot(d.segment(i).direction, d.segment(j).direction) != 0
    ]
    return ValidationReport(violations)


_SLOPE_UP = SlopeClass(False, Fraction(1))
_SLOPE_DOWN = SlopeClass(False, Fraction(-1))


def check_aprac(d: Drawing) -> ValidationReport:
    """Right angles plus: every crossing-involved edge has slope +1 or -1."""
    try:
        pairs = proper_crossings(d.segments())
    except (OverlappingEdges, ImproperIncidence) as exc:
        return _malformed(exc)
    violations = [
        Violation(
            NON_RIGHT_CROSSING,
            {"edges": [i, j], "point": _point_witness(p)},
        )
        for i, j, p in pairs
        if dot(d.segment(i).direction, d.segment(j).direction) != 0
    ]
    involved = sorted({e for i, j, _ in pairs for e in (i, j)})
    for e in involved:
        cls = SlopeClass.of(d.segment(e).direction)
        if cls != _SLOPE_UP and cls != _SLOPE_DOWN:
            violations.append(Violation(BAD_SLOPE, {"edge": e, "slope": str(cls)}))
    return ValidationReport(violations)


def check_density(g: Graph) -> ValidationReport:
    """Necessary edge-count bound for outer drawings with right-angle crossings.

    Integer form 2m <= 5n - 8; failing it certifies the graph has no such
    drawing, passing certifies nothing.  Trivially passes for n < 2.
    """
    if g.n < 2:
        return ValidationReport()
    if 2 * g.m <= 5 * g.n - 8:
        return ValidationReport()
    return ValidationReport(
        [
            Violation(
                DENSITY_EXCEEDED,
                {"n": g.n, "m": g.m, "bound": f"{Fraction(5 * g.n - 8, 2)}"},
            )
        ]
    )


def check_all(d: Drawing) -> ValidationReport:
    """Outer + right angles + density, all violations combined.

    Slope discipline is not part of this bundle: it is an extra guarantee
    some constructions offer, checked separately via check_aprac.
    """
    try:
        build_arrangement(d.segments())
    except (OverlappingEdges, ImproperIncidence) as exc:
        # report the malformation once, not once per sub-check
        return _malformed(exc).merged_with(check_density(d.graph))
    report = check_outer(d).merged_with(check_rac(d))
    return report.merged_with(check_density(d.graph))
