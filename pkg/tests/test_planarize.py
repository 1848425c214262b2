"""Planar re-embedding of outer drawings and the rotation-system checker."""

import pytest

from outrac.drawing import Drawing
from outrac.errors import (
    InvariantViolation,
    MalformedRotation,
    OverlappingEdges,
    ParseError,
)
from outrac.geometry import pt
from outrac.graphs import Graph
from outrac.planarize import (
    RotationSystem,
    check_planarity,
    load_embedding,
    planarize,
    save_embedding,
)


def draw(n, edges, coords):
    return Drawing.of(Graph.from_edges(n, edges), [pt(x, y) for x, y in coords])


def k4_square():
    return draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (0, 1), (1, 0), (1, 1)],
    )


def square_chain(k):
    """k unit squares side by side, each with both diagonals."""
    edges = []
    for i in range(k):
        a, b, c, d = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        edges += [(a, b), (a, c), (b, d), (a, d), (b, c)]
    edges.append((2 * k, 2 * k + 1))
    coords = []
    for i in range(k + 1):
        coords += [(i, 0), (i, 1)]
    return draw(2 * k + 2, edges, coords)


def trace_faces(g, rs):
    """Independent face count: walk every dart once with the successor rule."""
    pos = {(v, e): i for v in rs.rotations for i, e in enumerate(rs.rotations[v])}
    seen = set()
    faces = 0
    for start in pos:
        if start in seen:
            continue
        faces += 1
        dart = start
        while dart not in seen:
            seen.add(dart)
            tail, edge = dart
            a, b = g.edges[edge]
            w = b if tail == a else a
            rot = rs.rotations[w]
            dart = (w, rot[(pos[(w, edge)] + 1) % len(rot)])
    return faces


def cyclic_equal(a, b):
    return len(a) == len(b) and (not a or any(b[i:] + b[:i] == a for i in range(len(b))))


# --------------------------------------------------------- check_planarity


def test_triangle_rotation_is_planar():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    rs = RotationSystem({0: [0, 1], 1: [0, 2], 2: [1, 2]})
    assert check_planarity(g, rs) is True
    assert trace_faces(g, rs) == 2


def test_k5_rotation_is_not_planar():
    edges = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    g = Graph.from_edges(5, edges)
    rotations = {
        v: sorted(g.edge_id(v, w) for w in g.neighbors(v)) for v in range(5)
    }
    assert check_planarity(g, RotationSystem(rotations)) is False


def test_isolated_vertices_are_planar():
    g = Graph.from_edges(3, [(0, 1)])
    rs = RotationSystem({0: [0], 1: [0], 2: []})
    assert check_planarity(g, rs) is True


@pytest.mark.parametrize(
    "rotations",
    [
        {0: [0, 1], 1: [0, 2]},                      # vertex 2 missing
        {0: [0, 1], 1: [0, 2], 2: [1, 2], 3: []},    # extra vertex
        {0: [0, 1], 1: [0, 2], 2: [1]},              # edge 2 missing at vertex 2
        {0: [0, 1], 1: [0, 2], 2: [1, 2, 1]},        # duplicated edge
        {0: [0, 1], 1: [0, 2], 2: [1, 0]},           # non-incident edge
    ],
)
def test_malformed_rotations_rejected(rotations):
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(MalformedRotation):
        check_planarity(g, RotationSystem(rotations))


# --------------------------------------------------------------- planarize


def test_k4_square_planarizes_to_four_faces():
    d = k4_square()
    rs = planarize(d)
    assert check_planarity(d.graph, rs) is True
    assert trace_faces(d.graph, rs) == 4
    # the lifted diagonal (0,3) sits between the boundary edges on the outside
    assert cyclic_equal(rs.rotations[0], [0, 1, 2])
    assert cyclic_equal(rs.rotations[1], [4, 3, 0])
    assert cyclic_equal(rs.rotations[3], [5, 4, 2])
    assert cyclic_equal(rs.rotations[2], [1, 3, 5])


def test_crossing_free_drawing_keeps_geometric_rotation():
    # a 3-star: rotations must equal the clockwise angular order
    d = draw(4, [(0, 1), (0, 2), (0, 3)], [(0, 0), (1, 0), (0, 1), (-1, 0)])
    rs = planarize(d)
    assert cyclic_equal(rs.rotations[0], [1, 0, 2])
    assert check_planarity(d.graph, rs) is True


def test_square_chain_two_planarizes():
    d = square_chain(2)
    assert d.graph.n == 6 and d.graph.m == 11
    rs = planarize(d)
    assert check_planarity(d.graph, rs) is True
    assert trace_faces(d.graph, rs) == 7  # 6 - 11 + f = 2


def test_pinched_squares_planarize():
    # two unit squares with all diagonals, glued at one shared corner
    d = draw(
        7,
        [
            (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3),
            (3, 4), (3, 5), (3, 6), (4, 5), (4, 6), (5, 6),
        ],
        [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2)],
    )
    rs = planarize(d)
    assert check_planarity(d.graph, rs) is True
    assert trace_faces(d.graph, rs) == 7  # 7 - 12 + f = 2


def test_planarize_preserves_edge_sets():
    d = square_chain(3)
    rs = planarize(d)
    for v in range(d.graph.n):
        assert sorted(rs.rotations[v]) == sorted(
            d.graph.edge_id(v, w) for w in d.graph.neighbors(v)
        )


def test_planarize_rejects_hidden_vertex():
    hidden = draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (4, 0), (0, 4), (1, 1)],
    )
    with pytest.raises(InvariantViolation):
        planarize(hidden)


def test_planarize_rejects_oblique_crossing():
    from fractions import Fraction

    skewed = draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (0, 1), (1, 0), (1, Fraction(11, 10))],
    )
    with pytest.raises(InvariantViolation):
        planarize(skewed)


def test_planarize_propagates_malformed_drawing():
    d = draw(4, [(0, 1), (2, 3)], [(0, 0), (2, 0), (1, 0), (3, 0)])
    with pytest.raises(OverlappingEdges):
        planarize(d)


# -------------------------------------------------------------------- JSON


def test_embedding_json_roundtrip():
    rs = planarize(k4_square())
    back = load_embedding(save_embedding(rs))
    assert back.rotations == rs.rotations
    doc = rs.to_json()
    assert doc["format"] == "outrac-embedding" and doc["version"] == 1


@pytest.mark.parametrize(
    "mutate",
    [
        lambda doc: doc.pop("format"),
        lambda doc: doc.update(version=7),
        lambda doc: doc.update(rotations=[1, 2]),
        lambda doc: doc["rotations"].update({"x": [0]}),
        lambda doc: doc["rotations"].update({"0": ["e1"]}),
    ],
)
def test_embedding_json_rejects_malformed(mutate):
    doc = planarize(k4_square()).to_json()
    mutate(doc)
    with pytest.raises(ParseError):
        RotationSystem.from_json(doc)


def test_load_embedding_rejects_junk():
    with pytest.raises(ParseError):
        load_embedding(b"///")
