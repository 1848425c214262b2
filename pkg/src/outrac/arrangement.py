"""Planar arrangements of segments, computed exactly.

Splits input segments at their proper crossings, builds the induced plane
graph (vertices, arcs, clockwise rotations), traces its faces, and identifies
the boundary of the unbounded cell — including the case of several disjoint
or nested connected components.

T-junctions (an endpoint interior to another segment) and collinear overlaps
are rejected outright: drawings containing them are malformed, and every
consumer here wants that surfaced, not smoothed over.

Crossing detection is a bounding-volume hierarchy over exact rational boxes
followed by exact segment intersection on the surviving candidate pairs.
No floats anywhere, so behaviour is identical at any coordinate scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Optional

from .errors import ImproperIncidence, InvariantViolation, OverlappingEdges
from .geometry import IntersectionKind, Point, Segment, cross, sub

Box = tuple[Fraction, Fraction, Fraction, Fraction]
Dart = tuple[int, int]  # (tail vertex id, head vertex id)

_LEAF_SIZE = 8


def _boxes_disjoint(a: Box, b: Box) -> bool:
    return a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1]


def _box_union(a: Box, b: Box) -> Box:
    return (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))


@dataclass(slots=True)
class _BvhNode:
    box: Box
    items: Optional[list[int]]
    left: Optional["_BvhNode"] = None
    right: Optional["_BvhNode"] = None


def _build_bvh(indices: list[int], boxes: list[Box]) -> _BvhNode:
    box = boxes[indices[0]]
    for i in indices[1:]:
        box = _box_union(box, boxes[i])
    if len(indices) <= _LEAF_SIZE:
        return _BvhNode(box, indices)
    axis = 0 if box[2] - box[0] >= box[3] - box[1] else 1
    indices.sort(key=lambda i: boxes[i][axis] + boxes[i][axis + 2])
    mid = len(indices) // 2
    return _BvhNode(box, None, _build_bvh(indices[:mid], boxes), _build_bvh(indices[mid:], boxes))


def _candidate_pairs(root: _BvhNode) -> Iterable[tuple[int, int]]:
    stack = [(root, root)]
    while stack:
        a, b = stack.pop()
        if _boxes_disjoint(a.box, b.box):
            continue
        if a is b:
            if a.items is not None:
                items = a.items
                for i in range(len(items)):
                    for j in range(i + 1, len(items)):
                        x, y = items[i], items[j]
                        yield (x, y) if x < y else (y, x)
            else:
                stack += [(a.left, a.left), (a.right, a.right), (a.left, a.right)]
        elif a.items is not None and b.items is not None:
            for i in a.items:
                for j in b.items:
                    yield (i, j) if i < j else (j, i)
        elif a.items is not None:
            stack += [(a, b.left), (a, b.right)]
        else:
            stack += [(a.left, b), (a.right, b)]


def proper_crossings(segments: list[Segment]) -> list[tuple[int, int, Point]]:
    """All proper pairwise crossings, as (i, j, point) with i < j.

    Shared endpoints are fine and not reported.  Raises ImproperIncidence for
    T-junctions and OverlappingEdges for collinear overlaps, carrying the
    offending segment indices.
    """
    from .geometry import seg_intersection

    if len(segments) < 2:
        return []
    boxes = [s.bbox() for s in segments]
    root = _build_bvh(list(range(len(segments))), boxes)
    out = []
    for i, j in _candidate_pairs(root):
        if _boxes_disjoint(boxes[i], boxes[j]):
            continue
        r = seg_intersection(segments[i], segments[j])
        if r.kind is IntersectionKind.PROPER_CROSSING:
            out.append((i, j, r.point))
        elif r.kind is IntersectionKind.TOUCH:
            raise ImproperIncidence(
                f"segment {j} meets segment {i} at {r.point} without a shared endpoint",
                segments=[i, j],
                point=[str(r.point.x), str(r.point.y)],
            )
        elif r.kind is IntersectionKind.OVERLAP:
            raise OverlappingEdges(
                f"segments {i} and {j} overlap along a common line",
                segments=[i, j],
            )
    out.sort()
    return out


def point_enclosed_by_walk(p: Point, walk_arcs: list[tuple[Point, Point]]) -> bool:
    """Even-odd parity of a rightward ray from p against a closed walk.

    Arcs are counted with multiplicity, so a walk that covers an arc twice
    (both sides of a tree branch) contributes nothing, as it should.
    The caller guarantees p does not lie on any arc.
    """
    parity = False
    for a, b in walk_arcs:
        if (a.y > p.y) != (b.y > p.y):
            t = (p.y - a.y) / (b.y - a.y)
            if a.x + t * (b.x - a.x) > p.x:
                parity = not parity
    return parity


@dataclass(slots=True)
class Face:
    darts: list[Dart]
    area2: Fraction  # doubled signed area; > 0 bounded, < 0 unbounded side
    component: int

    def vertex_cycle(self) -> list[int]:
        return [u for u, _ in self.darts]


@dataclass
class Arrangement:
    segments: list[Segment]
    points: list[Point]            # vertex id -> location
    kinds: list[str]               # "endpoint" | "crossing"
    point_ids: dict[Point, int]
    dart_seg: dict[Dart, int]      # both orientations of every arc
    rotations: dict[int, list[int]]  # clockwise neighbour order
    faces: list[Face]
    component_of: list[int]        # vertex id -> component index
    n_components: int
    component_outer_face: list[int]  # component -> index into faces
    outer_cell_faces: list[int]    # walks bounding the one unbounded cell
    crossings: list[tuple[int, int, int]]  # (seg i, seg j, vertex id)

    @property
    def n_arcs(self) -> int:
        return len(self.dart_seg) // 2

    def walk_points(self, face_index: int) -> list[Point]:
        return [self.points[u] for u, _ in self.faces[face_index].darts]

    def walk_arcs(self, face_index: int) -> list[tuple[Point, Point]]:
        return [(self.points[u], self.points[v]) for u, v in self.faces[face_index].darts]

    def outer_cell_vertices(self) -> set[int]:
        out: set[int] = set()
        for fi in self.outer_cell_faces:
            for u, v in self.faces[fi].darts:
                out.add(u)
                out.add(v)
        return out

    def outer_incident_vertices(self) -> set[int]:
        """Segment endpoints (not crossings) on the unbounded cell's boundary."""
        return {v for v in self.outer_cell_vertices() if self.kinds[v] == "endpoint"}


def _clockwise_rotation(base: Point, neighbours: list[tuple[int, Point]]) -> list[int]:
    def half(d: Point) -> int:
        return 0 if (d.y > 0 or (d.y == 0 and d.x > 0)) else 1

    def cmp(a, b):
        da, db = sub(a[1], base), sub(b[1], base)
        ha, hb = half(da), half(db)
        if ha != hb:
            return -1 if ha < hb else 1
        c = cross(da, db)
        if c > 0:
            return -1
        if c < 0:
            return 1
        raise InvariantViolation(f"two arcs leave {base} in the same direction")

    ccw = sorted(neighbours, key=cmp_to_key(cmp))
    return [i for i, _ in reversed(ccw)]


def build_arrangement(segments: list[Segment]) -> Arrangement:
    crossings_raw = proper_crossings(segments)

    splits: dict[int, set[Point]] = {}
    for i, j, p in crossings_raw:
        splits.setdefault(i, set()).add(p)
        splits.setdefault(j, set()).add(p)

    points: list[Point] = []
    kinds: list[str] = []
    point_ids: dict[Point, int] = {}

    def vid(p: Point, kind: str) -> int:
        got = point_ids.get(p)
        if got is not None:
            if kinds[got] != kind:
                # cannot happen once touches are rejected; guard stays anyway
                raise InvariantViolation(f"point {p} is both an endpoint and a crossing")
            return got
        point_ids[p] = len(points)
        points.append(p)
        kinds.append(kind)
        return len(points) - 1

    dart_seg: dict[Dart, int] = {}
    neighbours: dict[int, set[int]] = {}
    for si, s in enumerate(segments):
        chain = [s.a] + sorted(splits.get(si, ()), key=s.param_of) + [s.b]
        ids = [vid(p, "endpoint" if p in (s.a, s.b) else "crossing") for p in chain]
        for u, v in zip(ids, ids[1:]):
            dart_seg[(u, v)] = si
            dart_seg[(v, u)] = si
            neighbours.setdefault(u, set()).add(v)
            neighbours.setdefault(v, set()).add(u)

    rotations = {
        v: _clockwise_rotation(points[v], [(u, points[u]) for u in nbrs])
        for v, nbrs in neighbours.items()
    }

    # next dart along a face: after arriving u->v, leave along the dart that
    # follows (v->u) in the clockwise rotation at v
    next_dart: dict[Dart, Dart] = {}
    for v, rot in rotations.items():
        k = len(rot)
        for i, u in enumerate(rot):
            next_dart[(u, v)] = (v, rot[(i + 1) % k])

    # connected components
    component_of = [-1] * len(points)
    n_components = 0
    for start in range(len(points)):
        if component_of[start] != -1:
            continue
        stack = [start]
        component_of[start] = n_components
        while stack:
            u = stack.pop()
            for w in neighbours.get(u, ()):
                if component_of[w] == -1:
                    component_of[w] = n_components
                    stack.append(w)
        n_components += 1

    # face tracing
    faces: list[Face] = []
    seen: set[Dart] = set()
    for start in dart_seg:
        if start in seen:
            continue
        walk = []
        d = start
        while True:
            seen.add(d)
            walk.append(d)
            d = next_dart[d]
            if d == start:
                break
        area2 = sum(cross(points[u], points[v]) for u, v in walk)
        faces.append(Face(walk, area2, component_of[start[0]]))

    # per-component outer walk + Euler self-check
    comp_faces: dict[int, list[int]] = {}
    for fi, f in enumerate(faces):
        comp_faces.setdefault(f.component, []).append(fi)
    comp_vertices: dict[int, int] = {}
    for c in component_of:
        comp_vertices[c] = comp_vertices.get(c, 0) + 1
    comp_arcs: dict[int, int] = {}
    for (u, v), _ in dart_seg.items():
        comp_arcs[component_of[u]] = comp_arcs.get(component_of[u], 0) + 1

    component_outer_face = [-1] * n_components
    for c in range(n_components):
        fis = comp_faces.get(c, [])
        vc = comp_vertices.get(c, 0)
        ec = comp_arcs.get(c, 0) // 2
        if vc - ec + len(fis) != 2:
            raise InvariantViolation(
                f"component {c} violates Euler's relation: v={vc} e={ec} f={len(fis)}"
            )
        negative = [fi for fi in fis if faces[fi].area2 < 0]
        if len(negative) == 1:
            component_outer_face[c] = negative[0]
        elif not negative and len(fis) == 1 and faces[fis[0]].area2 == 0:
            component_outer_face[c] = fis[0]  # acyclic component: one flat walk
        else:
            raise InvariantViolation(f"component {c} has no unique unbounded walk")

    # a component is enclosed if a point of it lies inside the outer walk of
    # another component; only non-enclosed components bound the unbounded cell
    rep_vertex = {}
    for v, c in enumerate(component_of):
        rep_vertex.setdefault(c, v)
    outer_cell_faces = []
    for c in range(n_components):
        rep = points[rep_vertex[c]]
        enclosed = False
        for d in range(n_components):
            if d == c:
                continue
            arcs = [
                (points[u], points[v])
                for u, v in faces[component_outer_face[d]].darts
            ]
            if point_enclosed_by_walk(rep, arcs):
                enclosed = True
                break
        if not enclosed:
            outer_cell_faces.append(component_outer_face[c])

    crossings = [(i, j, point_ids[p]) for i, j, p in crossings_raw]

    return Arrangement(
        segments=segments,
        points=points,
        kinds=kinds,
        point_ids=point_ids,
        dart_seg=dart_seg,
        rotations=rotations,
        faces=faces,
        component_of=component_of,
        n_components=n_components,
        component_outer_face=component_outer_face,
        outer_cell_faces=outer_cell_faces,
        crossings=crossings,
    )
