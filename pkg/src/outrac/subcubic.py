"""Outer drawings of subcubic series-parallel graphs with slope-locked crossings.

The construction walks the decomposition tree top-down.  Every tree node owns a
reserved region -- a half-strip to the left of its vertical pole segment -- and
draws its skeleton inside that region, handing disjoint sub-regions to its
children.  Parallel nodes with two series children spend exactly one crossing,
realised by a slope +1 and a slope -1 edge; everything else is crossing-free.
All coordinates stay rational throughout.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .arrangement import build_arrangement, point_enclosed_by_walk, proper_crossings
from .drawing import Drawing
from .errors import (
    DegreeExceeded,
    ImproperIncidence,
    InvariantViolation,
    OverlappingEdges,
)
from .geometry import Point, Segment, SlopeClass, dot, format_rational
from .graphs import Graph
from .spqr import SpqrNode, SpqrTree, build_sp_tree, reroot_for_drawing
from .validate import (
    BAD_SLOPE,
    IMPROPER_INCIDENCE,
    NON_RIGHT_CROSSING,
    OUTER_HIDDEN_VERTEX,
    OVERLAPPING_EDGES,
    ValidationReport,
    Violation,
)

MAX_DEGREE = 3

# Violation kinds specific to mid-construction snapshots.
VIRTUAL_EDGE_NOT_VERTICAL = "VIRTUAL_EDGE_NOT_VERTICAL"
RESERVED_REGION_OCCUPIED = "RESERVED_REGION_OCCUPIED"

_UP = SlopeClass(False, Fraction(1))
_DOWN = SlopeClass(False, Fraction(-1))


@dataclass(frozen=True)
class ReservedRegionV:
    """Half-strip reserved for one pending subtree.

    ``poles = (s, t)`` with s meant to sit directly above t.  The region is
    every point with x at most the pole-line x whose y lies strictly between
    the two pole heights.  Verticality is an invariant checked by
    :func:`assert_invariants`, not enforced here, so that broken states can be
    represented and reported.
    """

    poles: tuple[Point, Point]

    @property
    def line_x(self) -> Fraction:
        return self.poles[0].x

    @property
    def y_top(self) -> Fraction:
        return self.poles[0].y

    @property
    def y_bottom(self) -> Fraction:
        return self.poles[1].y

    @property
    def is_vertical(self) -> bool:
        s, t = self.poles
        return s.x == t.x and s.y > t.y

    def contains(self, p: Point) -> bool:
        return p.x <= self.line_x and self.y_bottom < p.y < self.y_top

    def pole_segment(self) -> Segment:
        return Segment(self.poles[0], self.poles[1])

    def intrusion(self, segment: Segment) -> Optional[Point]:
        """A point where ``segment`` enters the region off the pole edge.

        Points on the pole line itself count as the pole edge and are allowed.
        Returns None when the segment stays clear.
        """
        px, lo, hi = self.line_x, self.y_bottom, self.y_top
        a, b = segment.a, segment.b
        if a.x > px and b.x > px:
            return None
        if a.x > px or b.x > px:
            t = (px - a.x) / (b.x - a.x)
            cut = segment.point_at(t)
            a, b = (cut, b) if a.x > px else (a, cut)
        if a.x == px and b.x == px:
            return None
        if a.y > b.y:
            a, b = b, a
        if b.y <= lo or a.y >= hi:
            return None
        if a.y < lo:
            t = (lo - a.y) / (b.y - a.y)
            a = Point(a.x + t * (b.x - a.x), lo)
        if b.y > hi:
            t = (hi - a.y) / (b.y - a.y)
            b = Point(a.x + t * (b.x - a.x), hi)
        if a.y == b.y and (a.y == lo or a.y == hi):
            return None
        mid = Point((a.x + b.x) / 2, (a.y + b.y) / 2)
        return mid if self.contains(mid) and mid.x < px else None


@dataclass
class DrawState:
    """Snapshot of a construction in progress."""

    coords: dict[int, Point]
    drawn: dict[int, Segment]  # real edge id -> placed segment
    pending: list[ReservedRegionV]


@dataclass
class DrawStats:
    """Counters proving the linear-work claims of the construction."""

    tree_nodes: int = 0
    nodes_processed: int = 0
    crossings_emitted: int = 0
    max_emissions_per_node: int = 0


def _pw(p: Point) -> list[str]:
    return [format_rational(p.x), format_rational(p.y)]


def assert_invariants(state: DrawState) -> ValidationReport:
    """Check the four construction invariants on a mid-run snapshot.

    Pending virtual edges must be vertical; reserved regions must be free of
    foreign geometry; crossings so far must be right angles between slope +1
    and slope -1 edges; every placed vertex must touch the outer cell.
    """
    violations: list[Violation] = []

    good_regions: list[ReservedRegionV] = []
    for region in state.pending:
        if region.is_vertical:
            good_regions.append(region)
        else:
            s, t = region.poles
            violations.append(
                Violation(VIRTUAL_EDGE_NOT_VERTICAL, {"poles": [_pw(s), _pw(t)]})
            )

    eids = sorted(state.drawn)
    segs = [state.drawn[e] for e in eids]
    for region in good_regions:
        pole_pts = set(region.poles)
        for e, sgm in zip(eids, segs):
            if {sgm.a, sgm.b} == pole_pts:
                continue  # the region's own pole edge
            hit = region.intrusion(sgm)
            if hit is not None:
                violations.append(
                    Violation(
                        RESERVED_REGION_OCCUPIED,
                        {"edge": e, "point": _pw(hit), "poles": [_pw(p) for p in region.poles]},
                    )
                )
        for v in sorted(state.coords):
            p = state.coords[v]
            if p not in pole_pts and p.x <= region.line_x and region.y_bottom < p.y < region.y_top:
                violations.append(
                    Violation(RESERVED_REGION_OCCUPIED, {"vertex": v, "point": _pw(p)})
                )

    for i, j, p in proper_crossings(segs):
        s1, s2 = segs[i], segs[j]
        if dot(s1.direction, s2.direction) != 0:
            violations.append(
                Violation(NON_RIGHT_CROSSING, {"edges": [eids[i], eids[j]], "point": _pw(p)})
            )
            continue
        for idx in (i, j):
            if SlopeClass.of_segment(segs[idx]) not in (_UP, _DOWN):
                violations.append(Violation(BAD_SLOPE, {"edge": eids[idx], "point": _pw(p)}))

    arr = None
    if segs:
        try:
            arr = build_arrangement(segs)
        except (OverlappingEdges, ImproperIncidence) as exc:
            witness = {"message": exc.message}
            witness.update(exc.details)
            kind = OVERLAPPING_EDGES if isinstance(exc, OverlappingEdges) else IMPROPER_INCIDENCE
            violations.append(Violation(kind, witness))
    if arr is not None:
        on_outer = {arr.points[i] for i in arr.outer_incident_vertices()}
        endpoint_pts = {q for s in segs for q in (s.a, s.b)}
        for v in sorted(state.coords):
            p = state.coords[v]
            if p in endpoint_pts:
                if p not in on_outer:
                    violations.append(Violation(OUTER_HIDDEN_VERTEX, {"vertex": v}))
                continue
            hit = next((e for e, s in zip(eids, segs) if s.contains(p)), None)
            if hit is not None:
                violations.append(
                    Violation(IMPROPER_INCIDENCE, {"vertex": v, "edge": hit, "point": _pw(p)})
                )
                continue
            enclosed = any(
                point_enclosed_by_walk(p, arr.walk_arcs(arr.component_outer_face[c]))
                for c in range(arr.n_components)
            )
            if enclosed:
                violations.append(Violation(OUTER_HIDDEN_VERTEX, {"vertex": v}))
    return ValidationReport(violations)


@dataclass
class _Job:
    kind: str  # "P" | "S"
    node: Optional[SpqrNode]  # P jobs
    children: list[SpqrNode]  # S jobs
    path: list[int]  # S jobs
    s: int  # top pole vertex
    t: int  # bottom pole vertex
    region: ReservedRegionV
    key: int  # stats bucket (id of the owning tree node)


class _Run:
    def __init__(self, g: Graph, tree: SpqrTree, check: bool, on_state):
        self.g = g
        self.tree = tree
        self.check = check
        self.on_state = on_state
        self.coords: dict[int, Point] = {}
        self.drawn: dict[int, Segment] = {}
        self.jobs: list[_Job] = []
        self.emissions: dict[int, int] = {}
        self.processed: set[int] = set()
        self.crossings = 0

    # -- bookkeeping ------------------------------------------------------

    def _bump(self, key: int, n: int = 1) -> None:
        self.emissions[key] = self.emissions.get(key, 0) + n

    def _mark(self, node: SpqrNode) -> None:
        self.processed.add(id(node))

    def _place(self, v: int, p: Point, key: int) -> None:
        old = self.coords.get(v)
        if old is not None and old != p:
            raise InvariantViolation(f"vertex {v} placed twice", vertex=v)
        self.coords[v] = p
        self._bump(key)

    def _edge(self, u: int, v: int, key: int) -> None:
        eid = self.g.edge_id(u, v)
        self.drawn[eid] = Segment(self.coords[u], self.coords[v])
        self._bump(key)

    def _push(self, job: _Job) -> None:
        self.jobs.append(job)
        self._bump(job.key)

    def _state(self) -> DrawState:
        return DrawState(dict(self.coords), dict(self.drawn), [j.region for j in self.jobs])

    def _after_node(self) -> None:
        if self.on_state is None and not self.check:
            return
        state = self._state()
        if self.on_state is not None:
            self.on_state(state)
        if self.check:
            report = assert_invariants(state)
            if not report.ok:
                raise InvariantViolation(
                    "construction invariant violated",
                    violations=[v.to_json() for v in report.violations],
                )

    # -- node handlers ----------------------------------------------------

    @staticmethod
    def _oriented(node: SpqrNode, s_vertex: int) -> tuple[list[SpqrNode], list[int]]:
        path = node.path_vertices or []
        if path and path[0] == s_vertex:
            return list(node.children), list(path)
        if not path or path[-1] != s_vertex:
            raise InvariantViolation(f"series path does not start or end at pole {s_vertex}")
        return list(reversed(node.children)), list(reversed(path))

    def _init_chain(self) -> None:
        """Draw the long way around the outermost cycle as a convex chain.

        The unique parallel child of the top series node gets a vertical pole
        segment on the line x = 0; the remaining cycle edges bulge to the
        right of it, leaving the whole left half-strip free.
        """
        root = self.tree.root
        mu_s = root.children[0]
        p_idx = next(i for i, c in enumerate(mu_s.children) if c.kind == "P")
        path = mu_s.path_vertices or []
        l = len(path) - 1
        seq = path[p_idx + 1:] + path[: p_idx + 1]
        owners: list[SpqrNode] = [mu_s.children[j] for j in range(p_idx + 1, l)]
        owners.append(root)
        owners.extend(mu_s.children[j] for j in range(p_idx))
        mu_p = mu_s.children[p_idx]
        h = Fraction(l)
        self._place(seq[0], Point(Fraction(0), Fraction(0)), id(mu_p))
        for k in range(1, l):
            self._place(seq[k], Point(Fraction(k * (l - k)), Fraction(k)), id(owners[k - 1]))
        self._place(seq[l], Point(Fraction(0), h), id(mu_p))
        for k, owner in enumerate(owners):
            self._edge(seq[k], seq[k + 1], id(owner))
            self._mark(owner)
        self._mark(root)
        self._mark(mu_s)
        region = ReservedRegionV((self.coords[path[p_idx]], self.coords[path[p_idx + 1]]))
        self._push(
            _Job("P", mu_p, [], [], path[p_idx], path[p_idx + 1], region, id(mu_p))
        )

    def _do_s(self, job: _Job) -> None:
        children, path = job.children, job.path
        sp, tp = self.coords[job.s], self.coords[job.t]
        k = len(children)
        x, length = sp.x, sp.y - tp.y
        cuts = [Point(x, sp.y - length * j / k) for j in range(k + 1)]
        for j in range(1, k):
            self._place(path[j], cuts[j], id(children[j - 1]))
        for j, child in enumerate(children):
            if set(child.poles) != {path[j], path[j + 1]}:
                raise InvariantViolation("series child poles out of path order")
            if child.kind == "Q":
                self._edge(path[j], path[j + 1], id(child))
                self._mark(child)
            elif child.kind == "P":
                region = ReservedRegionV((cuts[j], cuts[j + 1]))
                self._push(
                    _Job("P", child, [], [], path[j], path[j + 1], region, id(child))
                )
            else:
                raise InvariantViolation("series node adjacent to series node")

    def _strip(self, node: SpqrNode, s_vertex: int) -> tuple[list[SpqrNode], list[int]]:
        """Orient a series child and check its pole edges are real edges."""
        children, path = self._oriented(node, s_vertex)
        if children[0].kind != "Q" or children[-1].kind != "Q":
            raise InvariantViolation(
                "pole-incident edges of a parallel node's series child must be real"
            )
        return children, path

    def _do_p(self, job: _Job) -> None:
        node = job.node
        assert node is not None
        self._mark(node)
        kids = node.children
        if len(kids) != 2:
            raise InvariantViolation(
                f"parallel node with {len(kids)} children exceeds the degree bound"
            )
        kinds = sorted(c.kind for c in kids)
        sp, tp = self.coords[job.s], self.coords[job.t]
        x, length = sp.x, sp.y - tp.y
        key = id(node)

        if kinds == ["Q", "S"]:
            q = next(c for c in kids if c.kind == "Q")
            sc = next(c for c in kids if c.kind == "S")
            self._edge(job.s, job.t, id(q))  # the real edge takes the pole segment
            self._mark(q)
            self._mark(sc)
            children, path = self._strip(sc, job.s)
            if len(children) == 2:
                w = path[1]
                self._place(w, Point(x - length / 2, (sp.y + tp.y) / 2), key)
                self._edge(job.s, w, id(children[0]))
                self._edge(w, job.t, id(children[1]))
                self._mark(children[0])
                self._mark(children[1])
            else:
                s2, t2 = path[1], path[-2]
                self._place(s2, Point(x - length / 2, sp.y - length / 4), key)
                self._place(t2, Point(x - length / 2, tp.y + length / 4), key)
                self._edge(job.s, s2, id(children[0]))
                self._edge(job.t, t2, id(children[-1]))
                self._mark(children[0])
                self._mark(children[-1])
                region = ReservedRegionV((self.coords[s2], self.coords[t2]))
                self._push(
                    _Job("S", None, children[1:-1], path[1:-1], s2, t2, region, id(sc))
                )
            return

        if kinds != ["S", "S"]:
            raise InvariantViolation(
                "parallel node children must be one series plus one edge, or two series"
            )
        self.crossings += 1
        xx = x - length * 5 / 8
        heights = {
            "cross_s": tp.y + length * 3 / 8,  # far end of the slope +1 edge from s
            "free_s": tp.y + length / 8,
            "cross_t": sp.y - length * 3 / 8,  # far end of the slope -1 edge from t
            "free_t": sp.y - length / 8,
        }

        def branch(child: SpqrNode, cross_at_s: bool) -> None:
            children, path = self._strip(child, job.s)
            self._mark(child)
            if len(children) == 2:
                w = path[1]
                y = heights["cross_s"] if cross_at_s else heights["cross_t"]
                self._place(w, Point(xx, y), key)
                self._edge(job.s, w, id(children[0]))
                self._edge(job.t, w, id(children[-1]))
                self._mark(children[0])
                self._mark(children[-1])
                return
            hi_v, lo_v = path[1], path[-2]
            if cross_at_s:
                top, bottom = heights["cross_s"], heights["free_s"]
            else:
                top, bottom = heights["free_t"], heights["cross_t"]
            self._place(hi_v, Point(xx, top), key)
            self._place(lo_v, Point(xx, bottom), key)
            self._edge(job.s, hi_v, id(children[0]))
            self._edge(job.t, lo_v, id(children[-1]))
            self._mark(children[0])
            self._mark(children[-1])
            region = ReservedRegionV((self.coords[hi_v], self.coords[lo_v]))
            self._push(
                _Job("S", None, children[1:-1], path[1:-1], hi_v, lo_v, region, id(child))
            )

        branch(kids[0], True)
        branch(kids[1], False)

    # -- driver -----------------------------------------------------------

    def run(self) -> Drawing:
        self._init_chain()
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


def _cycle_order(g: Graph) -> list[int]:
    order = [0]
    prev = -1
    while len(order) < g.n:
        nbrs = g.neighbors(order[-1])
        nxt = nbrs[1] if nbrs[0] == prev else nbrs[0]
        prev = order[-1]
        order.append(nxt)
    return order


def draw_outer_aprac_subcubic(
    g: Graph,
    *,
    check_invariants: bool = False,
    stats: Optional[DrawStats] = None,
    on_state: Optional[Callable[[DrawState], None]] = None,
) -> Drawing:
    """Drawing with all vertices outer-visible and slope-locked right-angle crossings.

    Requires a simple biconnected series-parallel graph of maximum degree 3.
    ``check_invariants`` (or the environment flag OUTRAC_CHECK_INVARIANTS=1)
    re-validates the construction state after every node and aborts on the
    first violation.  ``stats`` is filled with work counters when given;
    ``on_state`` receives a snapshot after each processed node.
    """
    for v in range(g.n):
        if g.degree(v) > MAX_DEGREE:
            raise DegreeExceeded(
                f"vertex {v} has degree {g.degree(v)}, above the limit of {MAX_DEGREE}",
                vertex=v,
                degree=g.degree(v),
            )
    check = check_invariants or os.environ.get("OUTRAC_CHECK_INVARIANTS", "") == "1"
    tree = build_sp_tree(g)
    tree_nodes = sum(1 for _ in tree.nodes())

    if tree.count("P") == 0:
        # No parallel composition: the graph is a single edge or a cycle.
        if g.m == 1:
            u, v = g.edges[0]
            coords = {u: Point(Fraction(0), Fraction(1)), v: Point(Fraction(0), Fraction(0))}
        else:
            order = _cycle_order(g)
            coords = {v: Point(Fraction(i), Fraction(i * i)) for i, v in enumerate(order)}
        if stats is not None:
            stats.tree_nodes = tree_nodes
            stats.nodes_processed = tree_nodes
            stats.crossings_emitted = 0
            stats.max_emissions_per_node = min(2, g.m)
        drawing = Drawing.of(g, coords)
        if check:
            report = assert_invariants(DrawState(dict(coords), dict(enumerate(drawing.segments())), []))
            if not report.ok:
                raise InvariantViolation(
                    "construction invariant violated",
                    violations=[v.to_json() for v in report.violations],
                )
        return drawing

    tree = reroot_for_drawing(tree)
    run = _Run(g, tree, check, on_state)
    drawing = run.run()
    if len(run.processed) != tree_nodes:
        raise InvariantViolation(
            f"processed {len(run.processed)} of {tree_nodes} decomposition nodes"
        )
    if stats is not None:
        stats.tree_nodes = tree_nodes
        stats.nodes_processed = len(run.processed)
        stats.crossings_emitted = run.crossings
        stats.max_emissions_per_node = max(run.emissions.values(), default=0)
    return drawing
