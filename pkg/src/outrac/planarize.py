"""Re-embed an outer drawing with right-angle crossings as a planar graph.

The construction works block by block: one slope set of every crossing block
keeps its geometric embedding, while the other set is lifted over the outer
boundary and re-attached on the outside.  Combinatorially that means: at each
vertex, remove the lifted edges from the clockwise rotation and re-insert
them, in reversed order, into the angular gap that faces the unbounded cell.
Mirroring reverses orientation, which is why the lifted edges cannot cross
each other outside, and the lifted set never crossed the kept set's
non-crossing edges to begin with — so the result is a planar rotation system
on exactly the original vertices and edges.

The output is combinatorial on purpose: the lift has no faithful straight-line
realization in general, so emitting coordinates would over-claim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .arrangement import build_arrangement
from .drawing import Drawing, blocks
from .errors import InvariantViolation, MalformedRotation, ParseError
from .graphs import Graph
from .validate import check_outer, check_rac


@dataclass
class RotationSystem:
    """Clockwise cyclic order of incident edge ids around every vertex."""

    rotations: dict[int, list[int]]

    def to_json(self) -> dict:
        return {
            "format": "outrac-embedding",
            "version": 1,
            "rotations": {str(v): list(r) for v, r in sorted(self.rotations.items())},
        }

    @staticmethod
    def from_json(doc: dict) -> "RotationSystem":
        if not isinstance(doc, dict):
            raise ParseError("embedding document must be a JSON object")
        if doc.get("format") != "outrac-embedding":
            raise ParseError(
                f"bad format tag {doc.get('format')!r}, expected 'outrac-embedding'"
            )
        if doc.get("version") != 1:
            raise ParseError(f"unsupported embedding format version {doc.get('version')!r}")
        raw = doc.get("rotations")
        if not isinstance(raw, dict):
            raise ParseError("field 'rotations' must be an object")
        rotations: dict[int, list[int]] = {}
        for key, val in raw.items():
            try:
                v = int(key)
            except ValueError:
                raise ParseError(f"rotations key {key!r} is not a vertex id") from None
            if not (isinstance(val, list) and all(isinstance(e, int) for e in val)):
                raise ParseError(f"rotations[{key}] must be a list of edge ids")
            rotations[v] = list(val)
        return RotationSystem(rotations)


def save_embedding(r: RotationSystem) -> bytes:
    return (json.dumps(r.to_json(), indent=1) + "\n").encode("utf-8")


def load_embedding(data: bytes) -> RotationSystem:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid UTF-8 JSON: {exc}") from exc
    return RotationSystem.from_json(doc)


def check_planarity(g: Graph, r: RotationSystem) -> bool:
    """Genus-0 test: trace all faces, check v - e + f = 2 per component."""
    if set(r.rotations) != set(range(g.n)):
        raise MalformedRotation(
            "rotation system must cover exactly the graph's vertices",
            got=sorted(r.rotations),
            expected=g.n,
        )
    for v in range(g.n):
        rot = r.rotations[v]
        incident = {g.edge_id(v, w) for w in g.neighbors(v)}
        if len(rot) != len(set(rot)) or set(rot) != incident:
            raise MalformedRotation(
                f"rotation of vertex {v} does not list its incident edges once each",
                vertex=v,
                got=rot,
                expected=sorted(incident),
            )

    # index positions once; a dart is (tail vertex, edge id)
    pos = {(v, e): i for v in range(g.n) for i, e in enumerate(r.rotations[v])}

    def other(e: int, v: int) -> int:
        a, b = g.edges[e]
        return b if v == a else a

    faces_of_component: dict[int, int] = {}
    seen: set[tuple[int, int]] = set()
    component = _graph_components(g)
    for v in range(g.n):
        for e in r.rotations[v]:
            if (v, e) in seen:
                continue
            # trace one face: after arriving at w along e, leave on the
            # clockwise successor of e in w's rotation
            dart = (v, e)
            while dart not in seen:
                seen.add(dart)
                tail, edge = dart
                w = other(edge, tail)
                rot = r.rotations[w]
                dart = (w, rot[(pos[(w, edge)] + 1) % len(rot)])
            faces_of_component[component[v]] = faces_of_component.get(component[v], 0) + 1

    counts: dict[int, list[int]] = {}
    for v in range(g.n):
        c = component[v]
        counts.setdefault(c, [0, 0])[0] += 1
    for a, _ in g.edges:
        counts[component[a]][1] += 1
    for c, (n_c, m_c) in counts.items():
        f_c = faces_of_component.get(c, 1)  # isolated vertex: one face
        if n_c - m_c + f_c != 2:
            return False
    return True


def _graph_components(g: Graph) -> list[int]:
    comp = [-1] * g.n
    next_id = 0
    for start in range(g.n):
        if comp[start] != -1:
            continue
        comp[start] = next_id
        stack = [start]
        while stack:
            v = stack.pop()
            for w in g.neighbors(v):
                if comp[w] == -1:
                    comp[w] = next_id
                    stack.append(w)
        next_id += 1
    return comp


def planarize(d: Drawing) -> RotationSystem:
    """Planar rotation system for the graph of a valid outer-RAC drawing."""
    arr = build_arrangement(d.segments())
    report = check_outer(d).merged_with(check_rac(d))
    if not report.ok:
        raise InvariantViolation(
            "drawing is not outer-RAC", violations=[v.to_json() for v in report.violations]
        )

    moved = {e for b in blocks(d) for e in b.b2}

    # the clockwise dart that the unbounded cell's walk uses to leave each
    # vertex point; the lifted edges are re-inserted right before it
    depart: dict[int, int] = {}
    for fi in arr.outer_cell_faces:
        darts = arr.faces[fi].darts
        for k, (_, v) in enumerate(darts):
            if arr.kinds[v] == "endpoint" and v not in depart:
                nxt = darts[(k + 1) % len(darts)]
                depart[v] = arr.dart_seg[nxt]

    rotations: dict[int, list[int]] = {}
    for vert in range(d.graph.n):
        if d.graph.degree(vert) == 0:
            rotations[vert] = []
            continue
        p = arr.point_ids[d.point_of(vert)]
        cw = [arr.dart_seg[(p, q)] for q in arr.rotations[p]]
        i = cw.index(depart[p])
        linear = cw[i:] + cw[:i]
        kept = [e for e in linear if e not in moved]
        lifted = [e for e in linear if e in moved]
        rotations[vert] = kept + lifted[::-1]

    rs = RotationSystem(rotations)
    if not check_planarity(d.graph, rs):
        raise InvariantViolation(
            "re-embedding did not yield a planar rotation system"
        )
    return rs
