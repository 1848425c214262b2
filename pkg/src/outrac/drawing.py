"""Straight-line drawings and their crossing structure.

A drawing maps every graph vertex to an exact rational point.  On top of that
sit the crossing graph (which pairs of edges properly cross), its connected
components ("blocks", after restricting to edges involved in at least one
crossing), the perpendicular slope bipartition of each block, and the block
outline — the closed walk around a block's outer boundary, whose endpoint
cycle drives the planarization step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .arrangement import Arrangement, build_arrangement, proper_crossings
from .errors import InvariantViolation, NotRac, OutlineError, ParseError
from .geometry import (
    Point,
    Segment,
    SlopeClass,
    dot,
    format_rational,
    parse_rational,
    sub,
)
from .graphs import Graph


@dataclass(frozen=True)
class Drawing:
    graph: Graph
    coords: tuple[Point, ...]
    _vertex_at: dict[Point, int] = field(compare=False, repr=False)

    @staticmethod
    def of(graph: Graph, coords) -> "Drawing":
        """Build from a vertex -> Point mapping (dict or sequence)."""
        if isinstance(coords, dict):
            missing = [v for v in range(graph.n) if v not in coords]
            if missing:
                raise InvariantViolation(f"vertices without coordinates: {missing}")
            seq = tuple(coords[v] for v in range(graph.n))
        else:
            seq = tuple(coords)
            if len(seq) != graph.n:
                raise InvariantViolation(
                    f"{len(seq)} coordinates for {graph.n} vertices"
                )
        lookup: dict[Point, int] = {}
        for v, p in enumerate(seq):
            if not isinstance(p, Point):
                raise InvariantViolation(f"coordinate of vertex {v} is not a Point")
            if p in lookup:
                raise InvariantViolation(
                    f"vertices {lookup[p]} and {v} coincide at {p}"
                )
            lookup[p] = v
        return Drawing(graph, seq, lookup)

    def point_of(self, v: int) -> Point:
        return self.coords[v]

    def vertex_at(self, p: Point) -> int:
        got = self._vertex_at.get(p)
        if got is None:
            raise KeyError(f"no vertex at {p}")
        return got

    def segment(self, eid: int) -> Segment:
        u, v = self.graph.edges[eid]
        return Segment(self.coords[u], self.coords[v])

    def segments(self) -> list[Segment]:
        return [self.segment(e) for e in range(self.graph.m)]

    def arrangement(self) -> Arrangement:
        return build_arrangement(self.segments())

    # ------------------------------------------------------------------ JSON

    def to_json(self) -> dict:
        return {
            "format": "outrac-drawing",
            "version": 1,
            "graph": self.graph.to_json(),
            "coords": {
                str(v): [format_rational(p.x), format_rational(p.y)]
                for v, p in enumerate(self.coords)
            },
        }

    @staticmethod
    def from_json(doc: dict) -> "Drawing":
        if not isinstance(doc, dict):
            raise ParseError("drawing document must be a JSON object")
        if doc.get("format") != "outrac-drawing":
            raise ParseError(f"bad format tag {doc.get('format')!r}, expected 'outrac-drawing'")
        if doc.get("version") != 1:
            raise ParseError(f"unsupported drawing format version {doc.get('version')!r}")
        graph = Graph.from_json(doc.get("graph"))
        raw = doc.get("coords")
        if not isinstance(raw, dict):
            raise ParseError("field 'coords' must be an object")
        coords: dict[int, Point] = {}
        for key, val in raw.items():
            try:
                v = int(key)
            except ValueError:
                raise ParseError(f"coords key {key!r} is not a vertex id") from None
            if not (0 <= v < graph.n):
                raise ParseError(f"coords key {key!r} out of range")
            if not (isinstance(val, list) and len(val) == 2):
                raise ParseError(f"coords[{key}] must be a two-element list")
            coords[v] = Point(parse_rational(val[0]), parse_rational(val[1]))
        if len(coords) != graph.n:
            missing = sorted(set(range(graph.n)) - set(coords))
            raise ParseError(f"coords missing vertices {missing}")
        return Drawing.of(graph, coords)


def save_drawing(d: Drawing) -> bytes:
    return (json.dumps(d.to_json(), indent=1) + "\n").encode("utf-8")


def load_drawing(data: bytes) -> Drawing:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid UTF-8 JSON: {exc}") from exc
    return Drawing.from_json(doc)


# ---------------------------------------------------------- crossing graph


@dataclass
class CrossingGraph:
    n_edges: int
    pairs: list[tuple[int, int, Point]]  # (edge i, edge j, crossing point), i < j
    adj: dict[int, set[int]]

    def crossing_involved(self) -> set[int]:
        return set(self.adj)

    def components(self) -> list[set[int]]:
        """Connected components over crossing-involved edges, deterministic order."""
        seen: set[int] = set()
        out: list[set[int]] = []
        for start in sorted(self.adj):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                e = stack.pop()
                for f in self.adj[e]:
                    if f not in comp:
                        comp.add(f)
                        stack.append(f)
            seen |= comp
            out.append(comp)
        return out


def crossing_graph(d: Drawing) -> CrossingGraph:
    """One node per edge; adjacency = proper crossings in the drawing.

    Overlaps and improper incidences among the drawn segments raise.
    """
    pairs = proper_crossings(d.segments())
    adj: dict[int, set[int]] = {}
    for i, j, _ in pairs:
        adj.setdefault(i, set()).add(j)
        adj.setdefault(j, set()).add(i)
    return CrossingGraph(d.graph.m, pairs, adj)


# ------------------------------------------------------------------ blocks


@dataclass(frozen=True)
class Block:
    edge_ids: frozenset[int]
    b1: frozenset[int]            # edges of the lexicographically smaller class
    b2: frozenset[int]
    slope1: SlopeClass
    slope2: SlopeClass


def blocks(d: Drawing) -> list[Block]:
    """Crossing components with their perpendicular slope bipartition.

    Only defined for drawings where every crossing is at a right angle;
    raises NotRac otherwise.
    """
    cg = crossing_graph(d)
    for i, j, p in cg.pairs:
        if dot(d.segment(i).direction, d.segment(j).direction) != 0:
            raise NotRac(
                f"edges {i} and {j} cross at {p} at a non-right angle",
                edges=[i, j],
            )
    out: list[Block] = []
    for comp in cg.components():
        by_class: dict[SlopeClass, set[int]] = {}
        for e in comp:
            by_class.setdefault(SlopeClass.of(d.segment(e).direction), set()).add(e)
        classes = sorted(by_class, key=SlopeClass.sort_key)
        if len(classes) != 2 or not classes[0].is_perpendicular_to(classes[1]):
            raise InvariantViolation(
                f"crossing component {sorted(comp)} does not split into two"
                " perpendicular slope classes"
            )
        out.append(
            Block(
                frozenset(comp),
                frozenset(by_class[classes[0]]),
                frozenset(by_class[classes[1]]),
                classes[0],
                classes[1],
            )
        )
    out.sort(key=lambda b: min(b.edge_ids))
    return out


# ----------------------------------------------------------------- outline


@dataclass
class Outline:
    block: Block
    endpoint_cycle: list[int]             # graph vertex ids, clockwise outer order
    walk: list[tuple[Point, Point]]       # boundary arcs, clockwise (outer cell on the left)


def outline(d: Drawing, b: Block) -> Outline:
    """Closed walk around the outer boundary of one block.

    Traced clockwise, so the unbounded cell stays on the left of the walk.
    The sequence of original vertices met along the walk must visit each
    block endpoint exactly once; a drawing that breaks this was not a valid
    outer drawing, and the failure is reported as a diagnostic.
    """
    eids = sorted(b.edge_ids)
    arr = build_arrangement([d.segment(e) for e in eids])
    if arr.n_components != 1:
        raise InvariantViolation("block edges do not form one crossing-connected piece")
    face = arr.faces[arr.component_outer_face[0]]
    cycle: list[int] = []
    for u, _ in face.darts:
        if arr.kinds[u] == "endpoint":
            cycle.append(d.vertex_at(arr.points[u]))
    expected = {w for e in eids for w in d.graph.edges[e]}
    if len(cycle) != len(set(cycle)) or set(cycle) != expected:
        raise OutlineError(
            "outline walk does not visit each block endpoint exactly once",
            block=sorted(b.edge_ids),
            visits=cycle,
        )
    walk = [(arr.points[u], arr.points[v]) for u, v in face.darts]
    return Outline(b, cycle, walk)
