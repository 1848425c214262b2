"""Constructive outer right-angle drawing for series-parallel graphs of maximum degree four.

The construction walks the decomposition tree top-down.  Every parallel node
owns a reserved region shaped from the circle that has the node's pole segment
as diameter: any crossing placed on that circle between an edge incident to one
pole and an edge incident to the other pole is exactly right-angled, so all
crossings are emitted on pole circles and verified with rational arithmetic.

Parallel nodes with two or three branches spend crossings in two ways: a pair
of "hook" edges stripped from opposite poles crossing on the pole circle, and
an "escape" edge that leaves through a previously drawn anchor edge, crossing
it at the perpendicular foot point (which lies on the pole circle by the
inscribed right-angle property).  Escapes need a cleared pocket behind the
anchor edge; pockets are provisioned by the parent before the child is
scheduled and are tracked explicitly so the checker can confirm them.

Series nodes subdivide their pole segment into slots, one per child.  Child
parallel nodes that will themselves need an escape ("needy" children) get a
bent slot whose shared path vertex is raised off the axis (or dipped into the
cleared quad below a trapezoid strip) so the neighbouring real edge becomes a
crossable anchor.  All free constants below (inflation factor, hook tip
offset, trapezoid heights, bend slopes, escape extension, crossing-point
candidates) are admissible choices: any values passing the runtime fit checks
give a correct drawing, and every placement is re-verified exactly before it
is committed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .arrangement import build_arrangement, point_enclosed_by_walk, proper_crossings
from .drawing import Drawing
from .errors import (
    DegreeExceeded,
    ImproperIncidence,
    InvariantViolation,
    OverlappingEdges,
)
from .geometry import (
    IntersectionKind,
    Point,
    Segment,
    cross,
    dist2,
    dot,
    format_rational,
    midpoint,
    seg_intersection,
    sub,
)
from .graphs import Graph
from .spqr import SpqrNode, SpqrTree, build_sp_tree, reroot_for_drawing
from .validate import (
    IMPROPER_INCIDENCE,
    NON_RIGHT_CROSSING,
    OUTER_HIDDEN_VERTEX,
    OVERLAPPING_EDGES,
    ValidationReport,
    Violation,
)

MAX_DEGREE_Q4 = 4

#: extra violation kinds used by the mid-construction checker
RESERVED_REGION_NOT_OUTER = "RESERVED_REGION_NOT_OUTER"
RESERVED_REGIONS_OVERLAP = "RESERVED_REGIONS_OVERLAP"
EMPTY_REGION_MALFORMED = "EMPTY_REGION_MALFORMED"

_F = Fraction
_HALF = _F(1, 2)
#: margin circle radius = (1 + _INFLATE) * pole circle radius
_INFLATE = _F(1, 4)
#: hook tips sit this far past the crossing along the hook (times shrink)
_HOOK_OVER = _F(1, 8)
#: escape tips overshoot the crossed anchor by this fraction (times shrink)
_ESCAPE_OVER = _F(1, 16)
#: trapezoid strip height and abscissas of the strip feet
_STRIP_H = _F(3, 8)
_STRIP_X0 = _F(7, 16)
_STRIP_X1 = _F(9, 16)
#: successively smaller layouts tried until every fit check passes
_SHRINKS = (
    _F(1),
    _F(1, 2),
    _F(1, 4),
    _F(1, 8),
    _F(1, 16),
    _F(1, 64),
    _F(1, 256),
    _F(1, 1024),
    _F(1, 4096),
)
#: candidate crossing points (a, b) on the unit pole circle, b*b == a*(1-a);
#: later entries hug a pole so hooks can dodge inherited cuts on tilted slots
_CROSS_PTS = (
    (_F(1, 2), _F(1, 2)),
    (_F(4, 5), _F(2, 5)),
    (_F(1, 5), _F(2, 5)),
    (_F(9, 10), _F(3, 10)),
    (_F(1, 10), _F(3, 10)),
    (_F(16, 17), _F(4, 17)),
    (_F(1, 17), _F(4, 17)),
)


def _rot90(p: Point) -> Point:
    return Point(-p.y, p.x)


def _pw(p: Point) -> list[str]:
    return [format_rational(p.x), format_rational(p.y)]


def _reflect(p: Point, through: Point) -> Point:
    return Point(2 * through.x - p.x, 2 * through.y - p.y)


# ---------------------------------------------------------------------------
# half-planes, frames and reserved regions


@dataclass(frozen=True)
class HalfPlane:
    """Open half-plane a*x + b*y > c used to cut reserved regions apart."""

    a: Fraction
    b: Fraction
    c: Fraction

    def holds(self, p: Point) -> bool:
        return self.a * p.x + self.b * p.y > self.c

    def value(self, p: Point) -> Fraction:
        return self.a * p.x + self.b * p.y - self.c


def _hp_line(p: Point, q: Point, keep: Point) -> HalfPlane:
    """Half-plane bounded by line(p, q) keeping the side of ``keep``."""

    n = _rot90(sub(q, p))
    c = n.x * p.x + n.y * p.y
    v = n.x * keep.x + n.y * keep.y - c
    if v == 0:
        raise InvariantViolation("degenerate half-plane request", point=_pw(keep))
    if v < 0:
        return HalfPlane(-n.x, -n.y, -c)
    return HalfPlane(n.x, n.y, c)


def _beyond(p: Point, q: Point, from_pt: Point) -> HalfPlane:
    """Half-plane strictly across line(p, q) as seen from ``from_pt``."""

    return _hp_line(p, q, _reflect(from_pt, q))


def _perp_hp(at_pt: Point, axis: Point, keep: Point) -> HalfPlane:
    """Half-plane bounded by the perpendicular to ``axis`` at ``at_pt``."""

    c = axis.x * at_pt.x + axis.y * at_pt.y
    v = axis.x * keep.x + axis.y * keep.y - c
    if v == 0:
        raise InvariantViolation("degenerate half-plane request", point=_pw(keep))
    if v < 0:
        return HalfPlane(-axis.x, -axis.y, -c)
    return HalfPlane(axis.x, axis.y, c)


def _hp_same(h1: HalfPlane, h2: HalfPlane) -> bool:
    # equal up to positive scaling
    if h1.a * h2.b != h2.a * h1.b:
        return False
    if h1.a != 0 or h2.a != 0:
        if h1.a * h2.a < 0 or (h1.a == 0) != (h2.a == 0):
            return False
        return h1.c * h2.a == h2.c * h1.a if h1.a != 0 else h1.c == h2.c == 0
    if h1.b * h2.b < 0 or (h1.b == 0) != (h2.b == 0):
        return False
    return h1.c * h2.b == h2.c * h1.b if h1.b != 0 else True


@dataclass(frozen=True)
class _Frame:
    """Affine frame of a pole segment: at(a, b) = o + a*d + b*n with n = side*rot90(d)."""

    o: Point
    d: Point
    n: Point

    def at(self, a: Fraction, b: Fraction) -> Point:
        return Point(self.o.x + a * self.d.x + b * self.n.x,
                     self.o.y + a * self.d.y + b * self.n.y)

    def locate(self, p: Point) -> tuple[Fraction, Fraction]:
        dd = dot(self.d, self.d)
        rel = sub(p, self.o)
        return dot(rel, self.d) / dd, dot(rel, self.n) / dd


def _frame(pa: Point, pb: Point, side: int) -> _Frame:
    d = sub(pb, pa)
    if d.x == 0 and d.y == 0:
        raise InvariantViolation("coincident poles", point=_pw(pa))
    r = _rot90(d)
    return _Frame(pa, d, Point(side * r.x, side * r.y))


@dataclass(frozen=True)
class ReservedRegionC:
    """Free-side claim of a pending node, carved from its inflated pole circle.

    The claim is the intersection of the closed margin disk, the open band
    between the perpendiculars at the poles, the closed free half-plane of the
    pole line (so the pole segment itself belongs to the claim, the poles do
    not) and the open half-plane cuts separating it from sibling claims.
    """

    poles: tuple[Point, Point]
    side: int
    inflate: Fraction = _INFLATE
    cuts: tuple[HalfPlane, ...] = ()

    def frame(self) -> _Frame:
        return _frame(self.poles[0], self.poles[1], self.side)

    def center(self) -> Point:
        return midpoint(self.poles[0], self.poles[1])

    def radius2(self) -> Fraction:
        # squared world radius of the margin circle
        return ((1 + self.inflate) / 2) ** 2 * dist2(self.poles[0], self.poles[1])

    def contains(self, p: Point) -> bool:
        fr = self.frame()
        a, b = fr.locate(p)
        if b < 0 or not 0 < a < 1:
            return False
        if (a - _HALF) ** 2 + b * b > ((1 + self.inflate) / 2) ** 2:
            return False
        return all(h.holds(p) for h in self.cuts)

    def _linear_constraints(self, strict_side: bool) -> list[tuple[HalfPlane, bool]]:
        # (half-plane, strict) list describing band, side and cuts
        pa, pb = self.poles
        d = sub(pb, pa)
        n = _rot90(d)
        out: list[tuple[HalfPlane, bool]] = []
        out.append((HalfPlane(d.x, d.y, dot(d, pa)), True))  # a > 0
        out.append((HalfPlane(-d.x, -d.y, -dot(d, pb)), True))  # a < 1
        sn = Point(self.side * n.x, self.side * n.y)
        out.append((HalfPlane(sn.x, sn.y, sn.x * pa.x + sn.y * pa.y), strict_side))
        for h in self.cuts:
            out.append((h, True))
        return out

    def hits_point(self, p: Point) -> bool:
        """Point lies in the open core (strict side, so pole-line touches pass)."""

        for h, strict in self._linear_constraints(strict_side=True):
            v = h.value(p)
            if v < 0 or (strict and v == 0):
                return False
        fr = self.frame()
        a, b = fr.locate(p)
        return (a - _HALF) ** 2 + b * b < ((1 + self.inflate) / 2) ** 2

    def hits_segment(self, s: Segment) -> Optional[Point]:
        """A witness point where the open segment body enters the open core."""

        p0, dv = s.a, s.direction
        lo, hi = _F(0), _F(1)
        for h, _strict in self._linear_constraints(strict_side=True):
            f0 = h.value(p0)
            fd = h.a * dv.x + h.b * dv.y
            if fd == 0:
                if f0 <= 0:
                    return None
            elif fd > 0:
                lo = max(lo, -f0 / fd)
            else:
                hi = min(hi, -f0 / fd)
        if lo >= hi:
            return None
        # quadratic margin-disk constraint q(t) < 0 somewhere on the interval
        fr = self.frame()
        a0, b0 = fr.locate(p0)
        dd = dot(fr.d, fr.d)
        ad = dot(dv, fr.d) / dd
        bd = dot(dv, fr.n) / dd

        def q(t: Fraction) -> Fraction:
            a = a0 + t * ad
            b = b0 + t * bd
            return (a - _HALF) ** 2 + b * b - ((1 + self.inflate) / 2) ** 2

        lead = ad * ad + bd * bd
        if lead == 0:
            t_best = lo
        else:
            vertex = -((a0 - _HALF) * ad + b0 * bd) / lead
            t_best = min(max(vertex, lo), hi)
        if q(t_best) >= 0:
            return None
        mid = (lo + hi) / 2
        t = t_best
        for _ in range(128):
            if lo < t < hi:
                return s.point_at(t)
            t = (t + mid) / 2
        return None

    def boundary_arc_point(self) -> Optional[Point]:
        """A rational point of the claim on its margin circle, if any survives the cuts."""

        fr = self.frame()
        r = (1 + self.inflate) / 2
        for t in (_F(1), _F(1, 2), _F(2), _F(2, 3), _F(3, 2), _F(2, 5), _F(5, 2),
                  _F(3, 5), _F(5, 3), _F(4, 5), _F(5, 4), _F(6, 7), _F(7, 6)):
            den = 1 + t * t
            a = _HALF + r * (1 - t * t) / den
            b = r * 2 * t / den
            if not 0 < a < 1 or b <= 0:
                continue
            p = fr.at(a, b)
            if all(h.holds(p) for h in self.cuts):
                return p
        return None

    def _side_of_line(self, hp: HalfPlane) -> tuple[int, bool]:
        """Which side of hp's boundary the whole claim is on: (+1/-1/0, strict)."""

        for own, strict in self._linear_constraints(strict_side=False):
            if _hp_same(own, hp):
                return 1, strict
            if _hp_same(HalfPlane(-own.a, -own.b, -own.c), hp):
                return -1, strict
        c = self.center()
        lhs = hp.value(c)
        rr = self.radius2() * (hp.a * hp.a + hp.b * hp.b)
        if lhs > 0 and lhs * lhs >= rr:
            return 1, lhs * lhs > rr
        if lhs < 0 and lhs * lhs >= rr:
            return -1, lhs * lhs > rr
        return 0, False

    def disjoint_from(self, other: "ReservedRegionC") -> bool:
        candidates: list[HalfPlane] = []
        for reg in (self, other):
            for h, _ in reg._linear_constraints(strict_side=False):
                candidates.append(h)
        # radical axis separates two disjoint disks
        c1, c2 = self.center(), other.center()
        n = Point(2 * (c2.x - c1.x), 2 * (c2.y - c1.y))
        if n.x != 0 or n.y != 0:
            cval = (dot(c2, c2) - other.radius2()) - (dot(c1, c1) - self.radius2())
            candidates.append(HalfPlane(n.x, n.y, cval))
        for hp in candidates:
            s1, strict1 = self._side_of_line(hp)
            s2, strict2 = other._side_of_line(hp)
            if s1 * s2 == -1 and (strict1 or strict2):
                return True
        return False


@dataclass(frozen=True)
class EmptyRegion:
    """Polygonal pocket that the construction promises to keep free of drawing.

    ``corners`` walk the boundary; edge i runs corners[i] -> corners[i+1].
    ``aligned[i]`` names a drawn edge the boundary edge must lie along, and
    ``include[i]`` asks for the open boundary edge itself to stay empty too
    (used for the ray an eventual escape edge will follow).
    """

    shape: str  # "triangle" | "trapezoid"
    corners: tuple[Point, ...]
    aligned: tuple[Optional[int], ...]
    include: tuple[bool, ...]

    def edge_count(self) -> int:
        return len(self.corners)


@dataclass(frozen=True)
class PendingQ4:
    region: ReservedRegionC
    empty: Optional[EmptyRegion]
    tag: str


@dataclass
class DrawStateQ4:
    """Snapshot of a partial drawing: placed points, drawn edges, pending claims."""

    coords: dict[int, Point]
    drawn: dict[int, Segment]
    pending: list[PendingQ4]


@dataclass
class DrawStatsQ4:
    """Counters proving the linear-work claims of the construction."""

    tree_nodes: int = 0
    nodes_processed: int = 0
    crossings_emitted: int = 0
    max_emissions_per_node: int = 0


# ---------------------------------------------------------------------------
# invariant checker


def _check_empty_region(er: EmptyRegion, state: DrawStateQ4, out: list[Violation]) -> None:
    k = er.edge_count()
    witness = {"corners": [_pw(c) for c in er.corners]}
    if er.shape not in ("triangle", "trapezoid") or k != (3 if er.shape == "triangle" else 4):
        out.append(Violation(EMPTY_REGION_MALFORMED, {"note": "bad shape", **witness}))
        return
    if len(er.aligned) != k or len(er.include) != k:
        out.append(Violation(EMPTY_REGION_MALFORMED, {"note": "bad annotations", **witness}))
        return
    # convex, consistently oriented, nondegenerate
    signs = []
    for i in range(k):
        a, b, c = er.corners[i], er.corners[(i + 1) % k], er.corners[(i + 2) % k]
        signs.append(cross(sub(b, a), sub(c, b)))
    if any(s == 0 for s in signs) or len({s > 0 for s in signs}) != 1:
        out.append(Violation(EMPTY_REGION_MALFORMED, {"note": "not strictly convex", **witness}))
        return
    inward = 1 if signs[0] > 0 else -1
    planes: list[HalfPlane] = []
    for i in range(k):
        a, b = er.corners[i], er.corners[(i + 1) % k]
        n = _rot90(sub(b, a))
        n = Point(inward * n.x, inward * n.y)
        planes.append(HalfPlane(n.x, n.y, n.x * a.x + n.y * a.y))
        eid = er.aligned[i]
        if eid is not None:
            segm = state.drawn.get(eid)
            if segm is None or not (segm.contains(a) and segm.contains(b)):
                out.append(Violation(EMPTY_REGION_MALFORMED,
                                     {"note": "boundary not aligned with drawn edge",
                                      "edge": eid, **witness}))
                return
    # triangle pockets need a sharp corner at the anchor pole (second corner)
    if er.shape == "triangle":
        s, t, x = er.corners
        if dot(sub(s, t), sub(x, t)) <= 0:
            out.append(Violation(EMPTY_REGION_MALFORMED,
                                 {"note": "anchor angle not acute", **witness}))
            return
    # open interior must not meet any drawn edge
    for eid, segm in state.drawn.items():
        p0, dv = segm.a, segm.direction
        lo, hi = _F(0), _F(1)
        ok = True
        for h in planes:
            f0 = h.value(p0)
            fd = h.a * dv.x + h.b * dv.y
            if fd == 0:
                if f0 <= 0:
                    ok = False
                    break
            elif fd > 0:
                lo = max(lo, -f0 / fd)
            else:
                hi = min(hi, -f0 / fd)
        if ok and lo < hi:
            out.append(Violation(EMPTY_REGION_MALFORMED,
                                 {"note": "pocket interior occupied", "edge": eid,
                                  "point": _pw(segm.point_at((lo + hi) / 2)), **witness}))
            return
    # requested boundary rays must be empty as well (shared endpoints aside)
    for i in range(k):
        if not er.include[i]:
            continue
        a, b = er.corners[i], er.corners[(i + 1) % k]
        ray = Segment(a, b)
        for eid, segm in state.drawn.items():
            if er.aligned[i] == eid:
                continue
            inter = seg_intersection(ray, segm)
            if inter.kind is IntersectionKind.EMPTY:
                continue
            if inter.kind is not IntersectionKind.OVERLAP and inter.point in (a, b):
                continue
            out.append(Violation(EMPTY_REGION_MALFORMED,
                                 {"note": "reserved ray occupied", "edge": eid, **witness}))
            return


def assert_invariants_q4(state: DrawStateQ4) -> ValidationReport:
    """Exact mid-construction audit of the degree-four invariants.

    Checks, in order: pending claims hold no foreign drawing, claims are
    pairwise disjoint, promised pockets are well-formed and empty, every
    crossing so far is right-angled, edges neither overlap nor end on foreign
    edge interiors, and every placed vertex (and every claim) still reaches
    the outer cell.
    """

    violations: list[Violation] = []
    eids = sorted(state.drawn)
    segs = [state.drawn[e] for e in eids]

    for pend in state.pending:
        reg = pend.region
        witness = {"poles": [_pw(reg.poles[0]), _pw(reg.poles[1])], "tag": pend.tag}
        for eid, segm in zip(eids, segs):
            hit = reg.hits_segment(segm)
            if hit is not None:
                violations.append(Violation(RESERVED_REGION_NOT_OUTER,
                                            {"edge": eid, "point": _pw(hit), **witness}))
        for v, p in state.coords.items():
            if reg.hits_point(p):
                violations.append(Violation(RESERVED_REGION_NOT_OUTER,
                                            {"vertex": v, "point": _pw(p), **witness}))

    for i in range(len(state.pending)):
        for k in range(i + 1, len(state.pending)):
            r1, r2 = state.pending[i].region, state.pending[k].region
            if not r1.disjoint_from(r2):
                violations.append(Violation(RESERVED_REGIONS_OVERLAP, {
                    "first": [_pw(r1.poles[0]), _pw(r1.poles[1])],
                    "second": [_pw(r2.poles[0]), _pw(r2.poles[1])],
                }))

    for pend in state.pending:
        needs_empty = pend.tag in ("P3", "S-strip", "S-hook", "S-esc")
        if pend.empty is None:
            if needs_empty:
                violations.append(Violation(EMPTY_REGION_MALFORMED,
                                            {"note": "missing pocket", "tag": pend.tag}))
            continue
        _check_empty_region(pend.empty, state, violations)

    for i, k, p in proper_crossings(segs):
        if dot(segs[i].direction, segs[k].direction) != 0:
            violations.append(Violation(NON_RIGHT_CROSSING,
                                        {"edges": [eids[i], eids[k]], "point": _pw(p)}))

    arr = None
    if segs:
        try:
            arr = build_arrangement(segs)
        except OverlappingEdges as exc:
            violations.append(Violation(OVERLAPPING_EDGES,
                                        {"message": exc.message, **exc.details}))
        except ImproperIncidence as exc:
            violations.append(Violation(IMPROPER_INCIDENCE,
                                        {"message": exc.message, **exc.details}))

    if arr is not None:
        on_outer = {arr.points[i] for i in arr.outer_incident_vertices()}
        endpoint_pts = {s.a for s in segs} | {s.b for s in segs}

        def enclosed(p: Point) -> bool:
            return any(
                point_enclosed_by_walk(p, arr.walk_arcs(arr.component_outer_face[c]))
                for c in range(arr.n_components)
            )

        for v, p in sorted(state.coords.items()):
            if p in endpoint_pts:
                if p not in on_outer:
                    violations.append(Violation(OUTER_HIDDEN_VERTEX, {"vertex": v}))
            elif any(s.contains(p) for s in segs):
                violations.append(Violation(IMPROPER_INCIDENCE,
                                            {"vertex": v, "point": _pw(p)}))
            elif enclosed(p):
                violations.append(Violation(OUTER_HIDDEN_VERTEX, {"vertex": v}))
        for pend in state.pending:
            w = pend.region.boundary_arc_point()
            if w is None:
                violations.append(Violation(RESERVED_REGION_NOT_OUTER, {
                    "note": "no free boundary arc",
                    "poles": [_pw(pend.region.poles[0]), _pw(pend.region.poles[1])],
                }))
            elif enclosed(w):
                violations.append(Violation(RESERVED_REGION_NOT_OUTER, {
                    "note": "claim separated from outer cell",
                    "poles": [_pw(pend.region.poles[0]), _pw(pend.region.poles[1])],
                    "point": _pw(w),
                }))

    return ValidationReport(violations)


# ---------------------------------------------------------------------------
# construction plumbing


@dataclass(frozen=True)
class _Asset:
    """A drawn edge an escape may cross, plus the cleared land behind it."""

    eid: int
    anchor: int  # vertex at the pole the asset is incident to
    far: Point  # position of the other endpoint of the drawn asset edge
    zone: tuple[HalfPlane, ...]


@dataclass
class _JobQ4:
    kind: str  # "P" | "S"
    node: Optional[SpqrNode]
    children: list
    path: list[int]
    va: int
    vb: int
    side: int
    region: ReservedRegionC
    asset_a: Optional[_Asset]
    asset_b: Optional[_Asset]
    quad: tuple[HalfPlane, ...]  # dip budget for trapezoid strips, else ()
    empty: Optional[EmptyRegion]
    tag: str
    key: int
    q_done: bool = False


class _Retry(Exception):
    """A layout candidate failed a fit check; try the next shrink."""


def _prune_cuts(cuts: Iterable[HalfPlane], pa: Point, pb: Point) -> tuple[HalfPlane, ...]:
    # keep cuts that could still clip the child's doubled margin disk
    c = midpoint(pa, pb)
    r2 = dist2(pa, pb) * ((1 + _INFLATE) / 2) ** 2 * 4
    kept = []
    for h in cuts:
        lhs = h.value(c)
        if lhs > 0 and lhs * lhs > r2 * (h.a * h.a + h.b * h.b):
            continue
        kept.append(h)
    return tuple(kept)


def _side_away(pa: Point, pb: Point, pt: Point) -> int:
    c = cross(sub(pb, pa), sub(pt, pa))
    if c == 0:
        raise InvariantViolation("cannot orient region away from collinear point",
                                 point=_pw(pt))
    return -1 if c > 0 else 1


def _foot(s: Point, t: Point, f: Point) -> tuple[Point, Fraction]:
    """Perpendicular foot of s on line(t, f) and its parameter along t->f."""

    d = sub(f, t)
    u = dot(sub(s, t), d) / dot(d, d)
    return Point(t.x + u * d.x, t.y + u * d.y), u


def _needy_p(node: SpqrNode) -> bool:
    s_kids = [c for c in node.children if c.kind == "S"]
    if len(s_kids) >= 3:
        return True
    if len(s_kids) == 2 and len(node.children) == 2:
        a, b = s_kids
        pa, pb = node.poles
        ok = (_end_is_q(a, pa) and _end_is_q(b, pb)) or (_end_is_q(b, pa) and _end_is_q(a, pb))
        return not ok
    return False


def _oriented(node: SpqrNode, s_vertex: int) -> tuple[list, list[int]]:
    path = node.path_vertices or []
    if path and path[0] == s_vertex:
        return list(node.children), list(path)
    if path and path[-1] == s_vertex:
        return list(reversed(node.children)), list(reversed(path))
    raise InvariantViolation(f"series path does not start or end at pole {s_vertex}")


def _end_is_q(nu: SpqrNode, pole: int) -> bool:
    kids, _ = _oriented(nu, pole)
    return kids[0].kind == "Q"


class _RunQ4:
    def __init__(self, g: Graph, tree: SpqrTree, check: bool,
                 on_state: Optional[Callable[[DrawStateQ4], None]]):
        self.g = g
        self.tree = tree
        self.check = check
        self.on_state = on_state
        self.coords: dict[int, Point] = {}
        self.used: dict[Point, int] = {}
        self.drawn: dict[int, Segment] = {}
        self.crossed: dict[int, list[Point]] = {}
        self.jobs: list[_JobQ4] = []
        self.emissions: dict[int, int] = {}
        self.processed: set[int] = set()
        self.crossings = 0

    # -- bookkeeping ---------------------------------------------------

    def _bump(self, key: int, n: int = 1) -> None:
        self.emissions[key] = self.emissions.get(key, 0) + n

    def _mark(self, node: SpqrNode) -> None:
        self.processed.add(id(node))

    def _place(self, v: int, p: Point, key: int) -> None:
        old = self.coords.get(v)
        if old is not None:
            if old != p:
                raise InvariantViolation(f"vertex {v} placed twice", vertex=v)
            return
        clash = self.used.get(p)
        if clash is not None:
            raise InvariantViolation(
                f"vertices {clash} and {v} placed at the same point", point=_pw(p))
        self.coords[v] = p
        self.used[p] = v
        self._bump(key)

    def _edge(self, u: int, v: int, key: int) -> None:
        eid = self.g.edge_id(u, v)
        if eid in self.drawn:
            raise InvariantViolation(f"edge {eid} drawn twice", edge=eid)
        self.drawn[eid] = Segment(self.coords[u], self.coords[v])
        self._bump(key)

    def _push(self, job: _JobQ4) -> None:
        self.jobs.append(job)
        self._bump(job.key)

    def _cross_mark(self, u1: int, v1: int, u2: int, v2: int, p: Point,
                    fr: _Frame, key: int) -> None:
        e1 = self.g.edge_id(u1, v1)
        e2 = self.g.edge_id(u2, v2)
        s1, s2 = self.drawn[e1], self.drawn[e2]
        for s in (s1, s2):
            if not s.contains(p) or p == s.a or p == s.b:
                raise InvariantViolation("crossing point not interior to edge",
                                         edges=[e1, e2], point=_pw(p))
        if dot(s1.direction, s2.direction) != 0:
            raise InvariantViolation("emitted crossing is not right-angled",
                                     edges=[e1, e2], point=_pw(p))
        a, b = fr.locate(p)
        if b * b != a * (1 - a):
            raise InvariantViolation("emitted crossing is off the pole circle",
                                     edges=[e1, e2], point=_pw(p))
        for e in (e1, e2):
            if p in self.crossed.setdefault(e, []):
                raise InvariantViolation("edge crossed twice at one point",
                                         edges=[e1, e2], point=_pw(p))
            self.crossed[e].append(p)
        self.crossings += 1
        self._bump(key)

    def _state(self) -> DrawStateQ4:
        pending = [PendingQ4(j.region, j.empty, j.tag) for j in self.jobs]
        return DrawStateQ4(dict(self.coords), dict(self.drawn), pending)

    def _after_node(self) -> None:
        if self.on_state is None and not self.check:
            return
        state = self._state()
        if self.on_state is not None:
            self.on_state(state)
        if self.check:
            report = assert_invariants_q4(state)
            if not report.ok:
                raise InvariantViolation(
                    "construction invariant violated",
                    violations=[v.to_json() for v in report.violations])

    # -- plan-time fit checks -------------------------------------------

    def _points_fit(self, pts: Iterable[Point], cuts: Iterable[HalfPlane], fr: _Frame) -> bool:
        r2 = ((1 + _INFLATE) / 2) ** 2
        seen = set()
        for p in pts:
            if p in self.used or p in seen:
                return False
            seen.add(p)
            a, b = fr.locate(p)
            if (a - _HALF) ** 2 + b * b > r2:
                return False
            for h in cuts:
                if not h.holds(p):
                    return False
        return True

    @staticmethod
    def _zone_fit(zone: Iterable[HalfPlane], pts: Iterable[Point]) -> bool:
        return all(h.holds(p) for p in pts for h in zone)

    # -- initial cycle ----------------------------------------------------

    def _init(self) -> None:
        root = self.tree.root
        mu_s = root.children[0]
        p_idx = None
        for i, child in enumerate(mu_s.children):
            if child.kind == "P":
                p_idx = i
        if p_idx is None:
            raise InvariantViolation("no parallel node under the root series node")
        path = mu_s.path_vertices
        l = len(path) - 1
        seq = path[p_idx + 1:] + path[:p_idx + 1]
        owners = mu_s.children[p_idx + 1:] + [root] + mu_s.children[:p_idx]
        mu_p = mu_s.children[p_idx]

        self._place(seq[0], Point(_F(0), _F(0)), id(mu_p))
        for k in range(1, l):
            # outward bulge 2k(l-k) keeps the anchor foot clear of chain vertices
            self._place(seq[k], Point(_F(2 * k * (l - k)), _F(k)), id(owners[k - 1]))
        self._place(seq[l], Point(_F(0), _F(l)), id(mu_p))
        for k in range(l):
            self._edge(seq[k], seq[k + 1], id(owners[k]))
            self._mark(owners[k])
        self._mark(root)
        self._mark(mu_s)

        va, vb = seq[0], seq[l]
        pa, pb = self.coords[va], self.coords[vb]
        far_v = seq[l - 1]
        far = self.coords[far_v]
        zone = (_beyond(pb, far, pa),)
        asset = _Asset(self.g.edge_id(far_v, vb), vb, far, zone)
        region = ReservedRegionC((pa, pb), 1)
        s_kids = [c for c in mu_p.children if c.kind == "S"]
        empty = None
        if len(s_kids) == 3 or _needy_p(mu_p):
            empty = self._corridor(pa, pb, asset)
        self._push(_JobQ4("P", mu_p, [], [], va, vb, 1, region,
                          None, asset, (), empty, f"P{len(s_kids)}", id(mu_p)))

    def _corridor(self, s_pos: Point, t_pos: Point, asset: _Asset) -> EmptyRegion:
        x_star, u = _foot(s_pos, t_pos, asset.far)
        if not 0 < u < 1:
            raise InvariantViolation("anchor edge unusable: foot outside it",
                                     point=_pw(x_star))
        return EmptyRegion("triangle", (s_pos, t_pos, x_star),
                           (None, asset.eid, None), (False, False, True))

    # -- main loop --------------------------------------------------------

    def run(self) -> Drawing:
        self._init()
        self._after_node()
        while self.jobs:
            job = self.jobs.pop()
            if job.kind == "P":
                self._do_p(job)
            else:
                self._do_s(job)
            self._after_node()
        if set(self.drawn) != set(range(self.g.m)):
            raise InvariantViolation("construction did not draw every edge exactly once")
        return Drawing.of(self.g, self.coords)

    # -- parallel nodes ---------------------------------------------------

    def _do_p(self, job: _JobQ4) -> None:
        node = job.node
        s_kids = [c for c in node.children if c.kind == "S"]
        q_kid = next((c for c in node.children if c.kind == "Q"), None)
        if not 1 <= len(s_kids) <= 3:
            raise InvariantViolation(
                f"parallel node with {len(s_kids)} series children exceeds degree budget")
        if job.asset_a is not None and job.asset_b is None:
            # normalise: keep the anchor edge at the vb pole
            job.va, job.vb = job.vb, job.va
            job.side = -job.side
            job.asset_b, job.asset_a = job.asset_a, None
        if q_kid is not None:
            if not job.q_done:
                self._edge(job.va, job.vb, job.key)
            self._mark(q_kid)
        for shrink in _SHRINKS:
            try:
                if len(s_kids) == 1:
                    self._try_trapezoid(job, s_kids[0], q_kid, shrink)
                elif len(s_kids) == 2 and _needy_p(node):
                    self._try_escape_diameter(job, s_kids, shrink)
                elif len(s_kids) == 2:
                    self._try_hooks(job, s_kids, shrink)
                else:
                    self._try_three(job, s_kids, shrink)
                self._mark(node)
                return
            except _Retry:
                continue
        raise InvariantViolation("no layout fits the granted claim",
                                 poles=[_pw(job.region.poles[0]), _pw(job.region.poles[1])])

    def _fr(self, job: _JobQ4) -> _Frame:
        return _frame(self.coords[job.va], self.coords[job.vb], job.side)

    # -- hooks: two stripped edges crossing on the pole circle -------------

    def _plan_hooks(self, job: _JobQ4, va: int, vb: int, fr: _Frame, nu_a, nu_b,
                    shrink: Fraction, extra_cuts: tuple[HalfPlane, ...]) -> Optional[dict]:
        kids_a, path_a = _oriented(nu_a, va)
        kids_b, path_b = _oriented(nu_b, vb)
        if kids_a[0].kind != "Q" or kids_b[0].kind != "Q":
            return None
        cuts_here = job.region.cuts + extra_cuts
        tau = 1 + _HOOK_OVER * shrink
        for ca, cb in _CROSS_PTS:
            c_pt = fr.at(ca, cb)
            tip_a = fr.at(tau * ca, tau * cb)
            tip_b = fr.at(1 - tau * (1 - ca), tau * cb)
            if self._points_fit((c_pt, tip_a, tip_b), cuts_here, fr):
                return {"kids_a": kids_a, "path_a": path_a, "kids_b": kids_b,
                        "path_b": path_b, "c": c_pt, "tip_a": tip_a, "tip_b": tip_b}
        return None

    def _apply_hooks(self, job: _JobQ4, va: int, vb: int, fr: _Frame, nu_a, nu_b,
                     plan: dict, extra_cuts: tuple[HalfPlane, ...]) -> None:
        pa, pb = self.coords[va], self.coords[vb]
        x_a, x_b = plan["path_a"][1], plan["path_b"][1]
        c_pt, tip_a, tip_b = plan["c"], plan["tip_a"], plan["tip_b"]

        self._place(x_a, tip_a, job.key)
        self._place(x_b, tip_b, job.key)
        self._edge(va, x_a, job.key)
        self._edge(vb, x_b, job.key)
        self._cross_mark(va, x_a, vb, x_b, c_pt, fr, job.key)
        self._mark(plan["kids_a"][0])
        self._mark(plan["kids_b"][0])

        hook_a = self.g.edge_id(va, x_a)
        hook_b = self.g.edge_id(vb, x_b)
        split_a = _perp_hp(c_pt, fr.d, pb)  # nu_a's remainder stays on vb's side
        split_b = _perp_hp(c_pt, fr.d, pa)
        pole_line = _hp_line(pa, pb, fr.at(_HALF, _F(1)))
        zone_a = (_beyond(pa, tip_a, pb), split_a) + job.region.cuts + extra_cuts
        zone_b = (_beyond(pb, tip_b, pa), split_b) + job.region.cuts + extra_cuts

        specs = (
            (nu_a, plan["kids_a"], plan["path_a"], vb, x_a, split_a,
             _hp_line(pa, tip_a, pb), _Asset(hook_a, x_a, pa, zone_a), hook_a, hook_b),
            (nu_b, plan["kids_b"], plan["path_b"], va, x_b, split_b,
             _hp_line(pb, tip_b, pa), _Asset(hook_b, x_b, pb, zone_b), hook_b, hook_a),
        )
        for nu, kids, path, old_v, tip_v, split, hook_cut, tip_asset, own_eid, sib_eid in specs:
            rest_kids = list(reversed(kids[1:]))
            rest_path = list(reversed(path[1:]))
            r_pa, r_pb = self.coords[old_v], self.coords[tip_v]
            r_side = _side_away(r_pa, r_pb, c_pt)
            cuts = _prune_cuts(job.region.cuts + extra_cuts + (split, pole_line, hook_cut),
                               r_pa, r_pb)
            sliver = EmptyRegion("triangle", (r_pa, r_pb, c_pt),
                                 (None, own_eid, sib_eid), (False, False, False))
            self._push(_JobQ4("S", nu, rest_kids, rest_path, old_v, tip_v, r_side,
                              ReservedRegionC((r_pa, r_pb), r_side, _INFLATE, cuts),
                              None, tip_asset, (), sliver, "S-hook", id(nu)))

    # -- escapes: leave through a drawn anchor edge -------------------------

    def _plan_escape(self, job: _JobQ4, va: int, vb: int, fr: _Frame, nu,
                     shrink: Fraction) -> dict:
        asset = job.asset_b
        if asset is None:
            raise InvariantViolation("escape requested without an anchor edge")
        if asset.anchor != vb:
            raise InvariantViolation("anchor edge is not incident to the far pole")
        kids, path = _oriented(nu, va)
        if kids[0].kind != "Q":
            raise InvariantViolation("escaping branch has no strippable end edge")
        s_pos, t_pos = self.coords[va], self.coords[vb]
        x_star, u = _foot(s_pos, t_pos, asset.far)
        if not 0 < u < 1:
            raise InvariantViolation("anchor foot outside the drawn anchor edge",
                                     point=_pw(x_star))
        over = _ESCAPE_OVER * shrink
        z1 = Point(x_star.x + over * (x_star.x - s_pos.x),
                   x_star.y + over * (x_star.y - s_pos.y))
        if z1 in self.used or not self._zone_fit(asset.zone, (z1,)):
            raise _Retry
        a, b = fr.locate(z1)
        if (a - _HALF) ** 2 + b * b > ((1 + _INFLATE) / 2) ** 2:
            raise _Retry
        return {"nu": nu, "kids": kids, "path": path, "x_star": x_star, "z1": z1,
                "s_pos": s_pos, "t_pos": t_pos, "asset": asset}

    def _apply_escape(self, job: _JobQ4, va: int, vb: int, fr: _Frame, plan: dict) -> None:
        asset = plan["asset"]
        kids, path = plan["kids"], plan["path"]
        y = path[1]
        z1, x_star = plan["z1"], plan["x_star"]
        s_pos, t_pos = plan["s_pos"], plan["t_pos"]

        self._place(y, z1, job.key)
        self._edge(va, y, job.key)
        self._cross_mark(va, y, asset.anchor,
                         self._other_endpoint(asset.eid, asset.anchor),
                         x_star, fr, job.key)
        self._mark(kids[0])

        rest_kids = list(reversed(kids[1:]))
        rest_path = list(reversed(path[1:]))
        far_line = _hp_line(t_pos, asset.far, z1)
        esc_line_cut = _hp_line(s_pos, z1, t_pos)  # keep the remainder off the escape line
        cuts = _prune_cuts(job.region.cuts + asset.zone + (far_line, esc_line_cut),
                           t_pos, z1)
        r_side = _side_away(t_pos, z1, s_pos)
        escape_eid = self.g.edge_id(va, y)
        z_zone = (_hp_line(s_pos, z1, _reflect(t_pos, z1)),) + asset.zone
        z_asset = _Asset(escape_eid, y, s_pos, z_zone)
        sliver = EmptyRegion("triangle", (t_pos, z1, x_star),
                             (None, escape_eid, asset.eid), (False, False, False))
        self._push(_JobQ4("S", plan["nu"], rest_kids, rest_path, vb, y, r_side,
                          ReservedRegionC((t_pos, z1), r_side, _INFLATE, cuts),
                          None, z_asset, (), sliver, "S-esc", id(plan["nu"])))

    def _other_endpoint(self, eid: int, v: int) -> int:
        u, w = self.g.edges[eid]
        return w if u == v else u

    # -- the four parallel-node layouts -------------------------------------

    def _try_hooks(self, job: _JobQ4, s_kids: list, shrink: Fraction) -> None:
        va, vb = job.va, job.vb
        fr = self._fr(job)
        found = False
        for nu_a, nu_b in ((s_kids[0], s_kids[1]), (s_kids[1], s_kids[0])):
            if not (_end_is_q(nu_a, va) and _end_is_q(nu_b, vb)):
                continue
            found = True
            plan = self._plan_hooks(job, va, vb, fr, nu_a, nu_b, shrink, ())
            if plan is not None:
                self._apply_hooks(job, va, vb, fr, nu_a, nu_b, plan, ())
                return
        if not found:
            raise InvariantViolation("two-branch node admits no stripped orientation")
        raise _Retry

    def _try_three(self, job: _JobQ4, s_kids: list, shrink: Fraction) -> None:
        va, vb = job.va, job.vb
        fr = self._fr(job)
        if job.asset_b is None:
            raise InvariantViolation("three-branch node scheduled without an anchor edge")
        for nu in s_kids:
            for pole in (va, vb):
                if not _end_is_q(nu, pole):
                    raise InvariantViolation("three-branch node with a compound end edge")
        nu_a, nu_b, nu_mid = s_kids
        pa, pb = self.coords[va], self.coords[vb]
        near_cut = _hp_line(pb, job.asset_b.far, pa)
        hooks = self._plan_hooks(job, va, vb, fr, nu_a, nu_b, shrink, (near_cut,))
        if hooks is None:
            raise _Retry
        esc = self._plan_escape(job, va, vb, fr, nu_mid, shrink)
        if esc["z1"] in (hooks["c"], hooks["tip_a"], hooks["tip_b"]):
            raise _Retry
        self._apply_hooks(job, va, vb, fr, nu_a, nu_b, hooks, (near_cut,))
        self._apply_escape(job, va, vb, fr, esc)

    def _try_escape_diameter(self, job: _JobQ4, s_kids: list, shrink: Fraction) -> None:
        va, vb = job.va, job.vb
        fr = self._fr(job)
        good = None
        bad = None
        for nu in s_kids:
            if _end_is_q(nu, va) and _end_is_q(nu, vb):
                good = nu
            else:
                bad = nu
        if good is None or bad is None:
            raise InvariantViolation("unstrippable two-branch node lacks a clean branch")
        if job.asset_b is None:
            raise InvariantViolation("unstrippable two-branch node lacks an anchor edge")
        pa, pb = self.coords[va], self.coords[vb]
        esc = self._plan_escape(job, va, vb, fr, good, shrink)
        self._apply_escape(job, va, vb, fr, esc)
        # the unstripped branch keeps the whole pole chord, short of the anchor
        near_cut = _hp_line(pb, job.asset_b.far, pa)
        kids, path = _oriented(bad, va)
        cuts = _prune_cuts(job.region.cuts + (near_cut,), pa, pb)
        self._push(_JobQ4("S", bad, kids, path, va, vb, job.side,
                          ReservedRegionC((pa, pb), job.side, _INFLATE, cuts),
                          None, None, (), None, "S-diam", id(bad)))

    # -- single-branch nodes: trapezoid over the pole edge -----------------

    def _try_trapezoid(self, job: _JobQ4, nu, q_kid, shrink: Fraction) -> None:
        if q_kid is None:
            raise InvariantViolation("single-branch parallel node without its real pole edge")
        va, vb = job.va, job.vb
        fr = self._fr(job)
        kids, path = _oriented(nu, va)
        k = len(kids)
        pa, pb = self.coords[va], self.coords[vb]
        cuts = job.region.cuts

        if k == 2:
            w = path[1]
            top = fr.at(_HALF, _STRIP_H * shrink)
            if not self._points_fit((top,), cuts, fr):
                raise _Retry
            self._place(w, top, job.key)
            self._leg(job, fr, kids[0], va, w, towards=pb, cuts=cuts)
            self._leg(job, fr, kids[1], vb, w, towards=pa, cuts=cuts)
            self._mark(nu)
            return

        if k == 3 and kids[1].kind == "P" and _needy_p(kids[1]):
            self._solo_quad(job, nu, fr, kids, path, shrink)
            return

        s1 = fr.at(_STRIP_X0, _STRIP_H * shrink)
        t1 = fr.at(_STRIP_X1, _STRIP_H * shrink)
        if not self._points_fit((s1, t1), cuts, fr):
            raise _Retry
        v1, v2 = path[1], path[k - 1]
        self._place(v1, s1, job.key)
        self._place(v2, t1, job.key)
        leg1_eid = self._leg(job, fr, kids[0], va, v1, towards=pb, cuts=cuts)
        leg2_eid = self._leg(job, fr, kids[-1], vb, v2, towards=pa, cuts=cuts)

        pole_eid = self.g.edge_id(va, vb)
        pole_line = _hp_line(pa, pb, s1)
        below_strip = _hp_line(s1, t1, pa)
        leg1_line = _hp_line(pa, s1, t1)
        leg2_line = _hp_line(pb, t1, s1)
        quad = (pole_line, below_strip, leg1_line, leg2_line)
        strip_cuts = _prune_cuts(cuts + (pole_line, leg1_line, leg2_line), s1, t1)
        er = EmptyRegion("trapezoid", (pa, pb, t1, s1),
                         (pole_eid, leg2_eid, None, leg1_eid),
                         (False, False, False, False))
        strip_side = _side_away(s1, t1, pa)
        self._push(_JobQ4("S", nu, kids[1:-1], path[1:k], v1, v2, strip_side,
                          ReservedRegionC((s1, t1), strip_side, _INFLATE, strip_cuts),
                          None, None, quad, er, "S-strip", id(nu)))

    def _leg(self, job: _JobQ4, fr: _Frame, end_kid, pole_v: int, top_v: int,
             towards: Point, cuts: tuple[HalfPlane, ...]) -> Optional[int]:
        """Draw or schedule one trapezoid leg; returns the real edge id if drawn."""

        p_pole, p_top = self.coords[pole_v], self.coords[top_v]
        if end_kid.kind == "Q":
            self._edge(pole_v, top_v, job.key)
            self._mark(end_kid)
            return self.g.edge_id(pole_v, top_v)
        if _needy_p(end_kid):
            # a leg with an escaping branch would blow the pole's degree budget
            raise InvariantViolation("trapezoid leg cannot host an escaping branch")
        leg_q = next((c for c in end_kid.children if c.kind == "Q"), None)
        eid = None
        q_done = False
        if leg_q is not None:
            self._edge(pole_v, top_v, job.key)
            eid = self.g.edge_id(pole_v, top_v)
            q_done = True
        side = -_side_away(p_pole, p_top, towards)  # face the inside of the trapezoid
        pole_line = _hp_line(self.coords[job.va], self.coords[job.vb], fr.at(_HALF, _F(1)))
        mid_cut = _perp_hp(fr.at(_HALF, _F(0)), fr.d, p_pole)
        leg_cuts = _prune_cuts(cuts + (pole_line, mid_cut), p_pole, p_top)
        s_count = len([c for c in end_kid.children if c.kind == "S"])
        self._push(_JobQ4("P", end_kid, [], [], pole_v, top_v, side,
                          ReservedRegionC((p_pole, p_top), side, _INFLATE, leg_cuts),
                          None, None, (), None, f"P{s_count}", id(end_kid), q_done=q_done))
        return eid

    def _solo_quad(self, job: _JobQ4, nu, fr: _Frame, kids, path, shrink: Fraction) -> None:
        """Reshaped trapezoid for a lone needy child squeezed between two real legs."""

        va, vb = job.va, job.vb
        pa, pb = self.coords[va], self.coords[vb]
        if kids[0].kind != "Q" or kids[2].kind != "Q":
            raise InvariantViolation("reshaped trapezoid requires real leg edges")
        v1, v2 = path[1], path[2]
        # admissible choice: lopsided tops make the second leg a usable anchor
        q1 = fr.at(_F(5, 8), _F(1, 4) * shrink)
        q2 = fr.at(_STRIP_X1, _STRIP_H * shrink)
        if not self._points_fit((q1, q2), job.region.cuts, fr):
            raise _Retry
        x_star, u = _foot(q1, q2, pb)
        if not 0 < u < 1:
            raise _Retry
        self._place(v1, q1, job.key)
        self._place(v2, q2, job.key)
        self._edge(va, v1, job.key)
        self._edge(vb, v2, job.key)
        self._mark(kids[0])
        self._mark(kids[2])
        leg2_eid = self.g.edge_id(vb, v2)
        pole_line = _hp_line(pa, pb, q2)
        zone = (_beyond(pb, q2, q1), pole_line) + job.region.cuts
        asset = _Asset(leg2_eid, v2, pb, zone)
        side = _side_away(q1, q2, pb)
        cuts = _prune_cuts(job.region.cuts + (pole_line, _hp_line(pb, q2, pa)), q1, q2)
        er = EmptyRegion("triangle", (q1, q2, x_star),
                         (None, leg2_eid, None), (False, False, True))
        s_count = len([c for c in kids[1].children if c.kind == "S"])
        self._push(_JobQ4("P", kids[1], [], [], v1, v2, side,
                          ReservedRegionC((q1, q2), side, _INFLATE, cuts),
                          None, asset, (), er, f"P{s_count}", id(kids[1])))
        self._mark(nu)

    # -- series nodes -------------------------------------------------------

    def _do_s(self, job: _JobQ4) -> None:
        for shrink in _SHRINKS:
            try:
                self._try_s(job, shrink)
                if job.node is not None:
                    self._mark(job.node)
                return
            except _Retry:
                continue
        raise InvariantViolation("no slot layout fits the granted claim",
                                 poles=[_pw(job.region.poles[0]), _pw(job.region.poles[1])])

    def _try_s(self, job: _JobQ4, shrink: Fraction) -> None:
        kids = job.children
        path = job.path
        j = len(kids)
        if j == 0 or len(path) != j + 1:
            raise InvariantViolation("malformed series job")
        va, vb = job.va, job.vb
        pa, pb = self.coords[va], self.coords[vb]
        fr = _frame(pa, pb, job.side)

        if j == 1:
            if kids[0].kind == "Q":
                self._edge(va, vb, job.key)
                self._mark(kids[0])
                return
            self._slot_p(job, fr, kids[0], va, vb, job.asset_a, job.asset_b, ())
            return

        needy = [kid.kind == "P" and _needy_p(kid) for kid in kids]
        # bent slots: anchor slope above 1 keeps the perpendicular foot interior
        rise = (1 + shrink / 2) / j
        beta: dict[int, Fraction] = {}  # path-vertex index -> signed offset
        mode: dict[int, str] = {}  # needy slot -> "asc" | "dip1" | "dipend"
        for i in range(1, j + 1):
            if not needy[i - 1]:
                continue
            if i == j and job.asset_b is not None:
                continue  # escapes through the inherited end anchor, no bend needed
            if i == 1 and job.asset_a is not None:
                continue
            if i == 1 and job.quad:
                if kids[1].kind != "Q":
                    raise InvariantViolation("needy slot without a crossable neighbour edge")
                beta[1] = -rise
                mode[1] = "dip1"
            elif i == j and job.quad:
                if kids[j - 2].kind != "Q":
                    raise InvariantViolation("needy slot without a crossable neighbour edge")
                beta[j - 1] = -rise
                mode[j] = "dipend"
            elif i < j and kids[i].kind == "Q":
                beta[i] = rise
                mode[i] = "asc"
            else:
                raise InvariantViolation("needy slot without a crossable neighbour edge")

        pos: dict[int, Point] = {0: pa, j: pb}
        flat_pts: list[Point] = []
        dip_pts: list[Point] = []
        for i in range(1, j):
            p = fr.at(_F(i, j), beta.get(i, _F(0)))
            pos[i] = p
            (dip_pts if beta.get(i, _F(0)) < 0 else flat_pts).append(p)
        if not self._points_fit(flat_pts, job.region.cuts, fr):
            raise _Retry
        for p in dip_pts:
            # dips live in the cleared quad below the strip, not in the claim
            if p in self.used or not all(h.holds(p) for h in job.quad):
                raise _Retry
            if not all(h.holds(p) for h in job.region.cuts):
                raise _Retry

        pole_line = _hp_line(pa, pb, fr.at(_HALF, _F(1)))

        def alpha_hp(num: int, keep_num: int) -> HalfPlane:
            # half-plane bounded by the lattice perpendicular at num/j,
            # keeping the side of keep_num/(2j)
            return _perp_hp(fr.at(_F(num, j), _F(0)), fr.d,
                            fr.at(_F(keep_num, 2 * j), _F(0)))

        # mint one anchor asset per bent slot; pre-verify the escape feet
        mint_zone: dict[int, list[HalfPlane]] = {}
        mint_edge: dict[int, tuple[int, int, Point]] = {}
        feet: dict[int, Point] = {}
        punch_owners: dict[int, list[int]] = {}  # punched slot -> needy slots
        for i, m in mode.items():
            if m == "asc":
                t_v, f_v = path[i], path[i + 1]
                t_p, f_p, s_p = pos[i], pos[i + 1], pos[i - 1]
                planes = [_beyond(t_p, f_p, s_p),
                          alpha_hp(i, 2 * i + 1), alpha_hp(i + 1, 2 * i + 1), pole_line]
                punch_owners.setdefault(i + 1, []).append(i)
            elif m == "dip1":
                t_v, f_v = path[1], path[2]
                t_p, f_p, s_p = pos[1], pos[2], pa
                planes = [_beyond(t_p, f_p, s_p),
                          alpha_hp(1, 3), alpha_hp(2, 3)] + list(job.quad[:2])
                punch_owners.setdefault(2, []).append(1)
            else:  # dipend
                t_v, f_v = path[j - 1], path[j - 2]
                t_p, f_p, s_p = pos[j - 1], pos[j - 2], pb
                planes = [_beyond(t_p, f_p, s_p),
                          alpha_hp(j - 1, 2 * j - 3), alpha_hp(j - 2, 2 * j - 3)]
                planes += list(job.quad[:2])
                punch_owners.setdefault(j - 1, []).append(j)
            x_star, u = _foot(s_p, t_p, f_p)
            if not 0 < u < 1:
                raise InvariantViolation("bent slot anchor foot escaped its edge",
                                         point=_pw(x_star))
            feet[i] = x_star
            mint_zone[i] = planes
            mint_edge[i] = (t_v, f_v, f_p)
        # two escapes through one edge must keep to their own half of it
        for owners in punch_owners.values():
            if len(owners) == 2:
                i1, i2 = owners
                f1, f2 = feet[i1], feet[i2]
                if f1 == f2:
                    raise InvariantViolation("shared anchor feet coincide")
                fm = midpoint(f1, f2)
                axis = sub(f2, f1)
                mint_zone[i1].append(_perp_hp(fm, axis, f1))
                mint_zone[i2].append(_perp_hp(fm, axis, f2))
        mints: dict[int, _Asset] = {}
        for i, planes in mint_zone.items():
            t_v, f_v, f_p = mint_edge[i]
            mints[i] = _Asset(self.g.edge_id(t_v, f_v), t_v, f_p,
                              tuple(planes) + job.region.cuts)

        for i in range(1, j):
            self._place(path[i], pos[i], id(kids[i - 1]))

        for i in range(1, j + 1):
            kid = kids[i - 1]
            u_v, w_v = path[i - 1], path[i]
            if kid.kind == "Q":
                self._edge(u_v, w_v, id(kid))
                self._mark(kid)
                continue
            asset_a = job.asset_a if i == 1 else None
            asset_b = job.asset_b if i == j else None
            extra: tuple[HalfPlane, ...] = ()
            m = mode.get(i)
            if m == "asc":
                asset_b = mints[i]
                extra = (alpha_hp(i - 1, 2 * i - 1), alpha_hp(i, 2 * i - 1))
            elif m == "dip1":
                asset_b = mints[1]
                extra = (alpha_hp(1, 1),)
            elif m == "dipend":
                asset_a = mints[j]
                extra = (alpha_hp(j - 1, 2 * j - 1),)
            self._slot_p(job, fr, kid, u_v, w_v, asset_a, asset_b, extra)

    def _slot_p(self, job: _JobQ4, fr: _Frame, kid, u_v: int, w_v: int,
                asset_a: Optional[_Asset], asset_b: Optional[_Asset],
                extra_cuts: tuple[HalfPlane, ...]) -> None:
        pa, pb = self.coords[u_v], self.coords[w_v]
        d = sub(pb, pa)
        s = dot(_rot90(d), fr.n)
        if s == 0:
            raise InvariantViolation("degenerate slot direction")
        side = 1 if s > 0 else -1
        cuts = _prune_cuts(job.region.cuts + extra_cuts, pa, pb)
        s_count = len([c for c in kid.children if c.kind == "S"])
        empty = None
        asset = asset_b if asset_b is not None else asset_a
        if asset is not None and (s_count == 3 or _needy_p(kid)):
            if asset is asset_b:
                empty = self._corridor(pa, pb, asset)
            else:
                empty = self._corridor(pb, pa, asset)
        self._push(_JobQ4("P", kid, [], [], u_v, w_v, side,
                          ReservedRegionC((pa, pb), side, _INFLATE, cuts),
                          asset_a, asset_b, (), empty, f"P{s_count}", id(kid)))


# ---------------------------------------------------------------------------
# driver


def _cycle_order(g: Graph) -> list[int]:
    order = [0]
    prev = -1
    while len(order) < g.n:
        cur = order[-1]
        nxt = [w for w in g.neighbors(cur) if w != prev]
        prev = cur
        order.append(nxt[0])
    return order


def draw_outer_rac_subquartic(g: Graph, *, check_invariants: bool = False,
                              stats: Optional[DrawStatsQ4] = None,
                              on_state: Optional[Callable[[DrawStateQ4], None]] = None) -> Drawing:
    """Draw a biconnected series-parallel graph of maximum degree four.

    Every vertex ends on the outer cell and every crossing is exactly
    right-angled; the result passes the outer and right-angle validators with
    rational arithmetic.  ``check_invariants`` (or the environment variable
    ``OUTRAC_CHECK_INVARIANTS=1``) re-audits the full invariant set after every
    processed decomposition node.  ``stats`` collects work counters and
    ``on_state`` observes every intermediate state.
    """

    for v in range(g.n):
        if g.degree(v) > MAX_DEGREE_Q4:
            raise DegreeExceeded(
                f"vertex {v} has degree {g.degree(v)}, above the limit of {MAX_DEGREE_Q4}",
                vertex=v, degree=g.degree(v))
    check = check_invariants or os.environ.get("OUTRAC_CHECK_INVARIANTS", "") == "1"
    tree = build_sp_tree(g)
    tree_nodes = sum(1 for _ in tree.nodes())

    if tree.count("P") == 0:
        if g.m == 1:
            u, w = g.edges[0]
            coords = {u: Point(_F(0), _F(1)), w: Point(_F(0), _F(0))}
        else:
            coords = {v: Point(_F(i), _F(i * i)) for i, v in enumerate(_cycle_order(g))}
        drawing = Drawing.of(g, coords)
        if stats is not None:
            stats.tree_nodes = tree_nodes
            stats.nodes_processed = tree_nodes
            stats.crossings_emitted = 0
            stats.max_emissions_per_node = min(2, g.m)
        if check:
            report = assert_invariants_q4(
                DrawStateQ4(dict(coords), dict(enumerate(drawing.segments())), []))
            if not report.ok:
                raise InvariantViolation(
                    "construction invariant violated",
                    violations=[v.to_json() for v in report.violations])
        return drawing

    tree = reroot_for_drawing(tree)
    run = _RunQ4(g, tree, check, on_state)
    drawing = run.run()
    if len(run.processed) != tree_nodes:
        raise InvariantViolation(
            f"processed {len(run.processed)} of {tree_nodes} decomposition nodes")
    if stats is not None:
        stats.tree_nodes = tree_nodes
        stats.nodes_processed = len(run.processed)
        stats.crossings_emitted = run.crossings
        stats.max_emissions_per_node = max(run.emissions.values(), default=0)
    return drawing
