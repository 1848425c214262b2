"""Drawings, crossing graphs, blocks, outlines, and the validator suite."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from outrac.drawing import (
    Drawing,
    blocks,
    crossing_graph,
    load_drawing,
    outline,
    save_drawing,
)
from outrac.errors import (
    ImproperIncidence,
    InvariantViolation,
    NotRac,
    OverlappingEdges,
    ParseError,
)
from outrac.geometry import (
    IntersectionKind,
    Point,
    SlopeClass,
    dot,
    pt,
    seg_intersection,
)
from outrac.graphs import Graph
from outrac.validate import (
    BAD_SLOPE,
    DENSITY_EXCEEDED,
    IMPROPER_INCIDENCE,
    NON_RIGHT_CROSSING,
    OUTER_HIDDEN_VERTEX,
    OVERLAPPING_EDGES,
    check_all,
    check_aprac,
    check_density,
    check_outer,
    check_rac,
)

F = Fraction


def draw(n, edges, coords):
    return Drawing.of(Graph.from_edges(n, edges), [pt(x, y) for x, y in coords])


def k4_square():
    """K4 on the unit square; the diagonals cross at right angles."""
    return draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (0, 1), (1, 0), (1, 1)],
    )


def bowtie():
    """Just two crossing segments, endpoints in convex position."""
    return draw(4, [(0, 2), (1, 3)], [(0, 0), (0, 2), (2, 2), (2, 0)])


def kinds_of(report):
    return [v.kind for v in report.violations]


def rotations(cycle):
    return [cycle[i:] + cycle[:i] for i in range(len(cycle))]


# ---------------------------------------------------------------- drawings


def test_drawing_requires_full_coverage():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(InvariantViolation):
        Drawing.of(g, {0: pt(0, 0), 1: pt(1, 0)})
    with pytest.raises(InvariantViolation):
        Drawing.of(g, [pt(0, 0), pt(1, 0)])


def test_drawing_rejects_coincident_vertices():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(InvariantViolation):
        Drawing.of(g, [pt(0, 0), pt(1, 0), pt(0, 0)])


def test_vertex_lookup():
    d = k4_square()
    assert d.point_of(3) == pt(1, 1)
    assert d.vertex_at(pt(0, 1)) == 1
    with pytest.raises(KeyError):
        d.vertex_at(pt(5, 5))


def test_segment_matches_edge_order():
    d = k4_square()
    assert d.graph.edges[2] == (0, 3)
    s = d.segment(2)
    assert {s.a, s.b} == {pt(0, 0), pt(1, 1)}


# ----------------------------------------------------------- crossing graph


def test_k4_square_single_crossing():
    d = k4_square()
    cg = crossing_graph(d)
    # edge 2 = (0,3) is the +1 diagonal, edge 3 = (1,2) the -1 diagonal
    assert cg.pairs == [(2, 3, pt(F(1, 2), F(1, 2)))]
    assert cg.adj == {2: {3}, 3: {2}}
    assert cg.crossing_involved() == {2, 3}
    assert cg.components() == [{2, 3}]


def test_crossing_free_drawing_edgeless():
    d = draw(3, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4)])
    cg = crossing_graph(d)
    assert cg.pairs == [] and cg.adj == {}
    assert cg.components() == []


def test_crossing_graph_propagates_malformed():
    overlapping = draw(4, [(0, 1), (2, 3)], [(0, 0), (2, 0), (1, 0), (3, 0)])
    with pytest.raises(OverlappingEdges):
        crossing_graph(overlapping)
    touching = draw(4, [(0, 1), (2, 3)], [(0, 0), (2, 0), (1, 0), (1, 5)])
    with pytest.raises(ImproperIncidence):
        crossing_graph(touching)


# ------------------------------------------------------------------ blocks


def test_k4_square_block_bipartition():
    bs = blocks(k4_square())
    assert len(bs) == 1
    b = bs[0]
    assert b.edge_ids == frozenset({2, 3})
    # slope -1 sorts before slope +1, so it lands in the first set
    assert b.b1 == frozenset({3}) and b.slope1 == SlopeClass(False, F(-1))
    assert b.b2 == frozenset({2}) and b.slope2 == SlopeClass(False, F(1))


def test_crossing_free_drawing_has_no_blocks():
    d = draw(3, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4)])
    assert blocks(d) == []


def test_blocks_refuses_oblique_crossing():
    skewed = draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (0, 1), (1, 0), (1, F(11, 10))],
    )
    with pytest.raises(NotRac) as exc:
        blocks(skewed)
    assert exc.value.details["edges"] == [2, 3]


def test_two_disjoint_blocks():
    # two far-apart right-angle crossing pairs
    d = draw(
        8,
        [(0, 2), (1, 3), (4, 6), (5, 7)],
        [(0, 0), (0, 2), (2, 2), (2, 0), (10, 0), (10, 2), (12, 2), (12, 0)],
    )
    bs = blocks(d)
    assert [sorted(b.edge_ids) for b in bs] == [[0, 1], [2, 3]]


# ----------------------------------------------------------------- outline


def test_k4_square_outline():
    d = k4_square()
    (b,) = blocks(d)
    o = outline(d, b)
    # clockwise corner order, any starting point
    assert o.endpoint_cycle in rotations([0, 1, 3, 2])
    assert len(o.walk) == 8
    center = pt(F(1, 2), F(1, 2))
    halves = {frozenset(arc) for arc in o.walk}
    assert halves == {
        frozenset((pt(0, 0), center)),
        frozenset((pt(0, 1), center)),
        frozenset((pt(1, 0), center)),
        frozenset((pt(1, 1), center)),
    }
    # every half-diagonal is walked once per direction
    assert len(o.walk) == 2 * len(halves)


def test_bowtie_outline_cycle():
    d = bowtie()
    (b,) = blocks(d)
    o = outline(d, b)
    assert o.endpoint_cycle in rotations([0, 1, 2, 3])


def test_two_block_outlines_disjoint():
    d = draw(
        8,
        [(0, 2), (1, 3), (4, 6), (5, 7)],
        [(0, 0), (0, 2), (2, 2), (2, 0), (10, 0), (10, 2), (12, 2), (12, 0)],
    )
    b1, b2 = blocks(d)
    o1, o2 = outline(d, b1), outline(d, b2)
    pts1 = {p for arc in o1.walk for p in arc}
    pts2 = {p for arc in o2.walk for p in arc}
    assert not (pts1 & pts2)
    assert o1.endpoint_cycle in rotations([0, 1, 2, 3])
    assert o2.endpoint_cycle in rotations([4, 5, 6, 7])


# ------------------------------------------------------------- check_outer


def test_check_outer_k4_square_passes():
    assert check_outer(k4_square()).ok


def test_check_outer_flags_hidden_vertex():
    # planar K4: one vertex at the centroid of the outer triangle
    d = draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (4, 0), (0, 4), (F(4, 3), F(4, 3))],
    )
    report = check_outer(d)
    assert not report.ok
    assert kinds_of(report) == [OUTER_HIDDEN_VERTEX]
    assert report.violations[0].witness == {"vertex": 3}


def test_check_outer_empty_graph_passes():
    assert check_outer(draw(0, [], [])).ok


def test_check_outer_isolated_vertices():
    enclosed = draw(4, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4), (1, 1)])
    report = check_outer(enclosed)
    assert kinds_of(report) == [OUTER_HIDDEN_VERTEX]
    assert report.violations[0].witness == {"vertex": 3}

    outside = draw(4, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4), (9, 9)])
    assert check_outer(outside).ok

    on_edge = draw(4, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4), (2, 0)])
    report = check_outer(on_edge)
    assert kinds_of(report) == [IMPROPER_INCIDENCE]


# --------------------------------------------------------------- check_rac


def test_check_rac_k4_square_passes():
    assert check_rac(k4_square()).ok


def test_check_rac_flags_oblique_crossing():
    d = draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (0, 1), (1, 0), (1, F(11, 10))],
    )
    report = check_rac(d)
    assert kinds_of(report) == [NON_RIGHT_CROSSING]
    assert report.violations[0].witness["edges"] == [2, 3]


def test_check_rac_crossing_free_passes():
    assert check_rac(draw(3, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4)])).ok


# ------------------------------------------------------------- check_aprac


def test_check_aprac_k4_square_passes():
    assert check_aprac(k4_square()).ok


def test_check_aprac_rotated_square_fails_on_slopes():
    # same configuration rotated so the crossing pair is axis-parallel:
    # still a right angle, but the slopes are no longer +1/-1
    d = draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (-1, 1), (1, 1), (0, 2)],
    )
    assert check_rac(d).ok
    report = check_aprac(d)
    assert kinds_of(report) == [BAD_SLOPE, BAD_SLOPE]
    assert sorted(v.witness["edge"] for v in report.violations) == [2, 3]


def test_check_aprac_crossing_free_passes():
    # slopes of crossing-free edges are unconstrained
    assert check_aprac(draw(3, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4)])).ok


# ------------------------------------------------------------ check_density


@pytest.mark.parametrize(
    "n,edges,ok",
    [
        (4, [(a, b) for a in range(4) for b in range(a + 1, 4)], True),  # 2m = 5n-8
        (5, [(i, (i + 1) % 5) for i in range(5)], True),
        (7, [(s, 2 + i) for s in (0, 1) for i in range(5)], True),
        (0, [], True),
        (1, [], True),
    ],
)
def test_check_density_table(n, edges, ok):
    assert check_density(Graph.from_edges(n, edges)).ok is ok


def test_check_density_octahedron_fails():
    edges = [(s, 2 + i) for s in (0, 1) for i in range(4)]
    edges += [(2, 3), (3, 4), (4, 5), (5, 2)]
    report = check_density(Graph.from_edges(6, edges))
    assert kinds_of(report) == [DENSITY_EXCEEDED]
    assert report.violations[0].witness == {"n": 6, "m": 12, "bound": "11"}


# ------------------------------------------------- malformed drawing reports


def test_checks_report_overlap_instead_of_raising():
    d = draw(4, [(0, 1), (2, 3)], [(0, 0), (2, 0), (1, 0), (3, 0)])
    for check in (check_outer, check_rac, check_aprac, check_all):
        report = check(d)
        assert kinds_of(report) == [OVERLAPPING_EDGES]


def test_checks_report_improper_incidence_instead_of_raising():
    d = draw(4, [(0, 1), (2, 3)], [(0, 0), (2, 0), (1, 0), (1, 5)])
    for check in (check_outer, check_rac, check_aprac, check_all):
        report = check(d)
        assert kinds_of(report) == [IMPROPER_INCIDENCE]


def test_check_all_bundles_outer_rac_density():
    assert check_all(k4_square()).ok
    # right-angle crossing with off-diagonal slopes: aprac fails, "all" passes
    rotated = draw(
        4,
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        [(0, 0), (-1, 1), (1, 1), (0, 2)],
    )
    assert check_all(rotated).ok
    assert not check_aprac(rotated).ok


def test_report_json_shape():
    report = check_outer(
        draw(4, [(0, 1), (1, 2), (0, 2)], [(0, 0), (4, 0), (0, 4), (1, 1)])
    )
    doc = report.to_json()
    assert doc["verdict"] == "fail"
    assert doc["violations"] == [
        {"kind": OUTER_HIDDEN_VERTEX, "witness": {"vertex": 3}}
    ]
    assert check_rac(k4_square()).to_json() == {"verdict": "pass", "violations": []}


# -------------------------------------------------------------------- JSON


def test_drawing_json_roundtrip():
    d = k4_square()
    blob = save_drawing(d)
    back = load_drawing(blob)
    assert back.graph == d.graph and back.coords == d.coords

    doc = d.to_json()
    assert doc["format"] == "outrac-drawing" and doc["version"] == 1
    assert doc["coords"]["3"] == ["1", "1"]


def test_drawing_json_keeps_rationals_exact():
    d = draw(2, [(0, 1)], [(F(1, 3), F(-7, 12)), (2, 5)])
    back = load_drawing(save_drawing(d))
    assert back.point_of(0) == pt(F(1, 3), F(-7, 12))


@pytest.mark.parametrize(
    "mutate",
    [
        lambda doc: doc.pop("format"),
        lambda doc: doc.update(format="outrac-graph"),
        lambda doc: doc.update(version=2),
        lambda doc: doc.update(coords="nope"),
        lambda doc: doc["coords"].pop("0"),
        lambda doc: doc["coords"].update({"9": ["0", "0"]}),
        lambda doc: doc["coords"].update({"x": ["0", "0"]}),
        lambda doc: doc["coords"].update({"1": ["0"]}),
        lambda doc: doc["coords"].update({"1": ["0", "1/0"]}),
    ],
)
def test_drawing_json_rejects_malformed(mutate):
    doc = k4_square().to_json()
    mutate(doc)
    with pytest.raises(ParseError):
        Drawing.from_json(doc)


def test_load_drawing_rejects_junk_bytes():
    with pytest.raises(ParseError):
        load_drawing(b"{not json")


# -------------------------------------------------- brute-force cross-check


def brute_rac_violations(d):
    segs = d.segments()
    bad = set()
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            hit = seg_intersection(segs[i], segs[j])
            if hit.kind is IntersectionKind.PROPER_CROSSING:
                if dot(segs[i].direction, segs[j].direction) != 0:
                    bad.add((i, j))
            elif hit.kind in (IntersectionKind.TOUCH, IntersectionKind.OVERLAP):
                return None  # malformed; validators report it as such
    return bad


points = st.tuples(
    st.integers(min_value=-6, max_value=6), st.integers(min_value=-6, max_value=6)
)


@st.composite
def small_drawings(draw_):
    n = draw_(st.integers(min_value=2, max_value=7))
    coords = draw_(
        st.lists(points, min_size=n, max_size=n, unique=True).map(
            lambda ps: [pt(x, y) for x, y in ps]
        )
    )
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = draw_(st.lists(st.sampled_from(all_pairs), unique=True, max_size=9))
    return Drawing.of(Graph.from_edges(n, edges), coords)


@settings(max_examples=250, deadline=None)
@given(small_drawings())
def test_check_rac_matches_brute_force(d):
    expected = brute_rac_violations(d)
    report = check_rac(d)
    if expected is None:
        assert kinds_of(report) in ([OVERLAPPING_EDGES], [IMPROPER_INCIDENCE])
    else:
        got = {tuple(v.witness["edges"]) for v in report.violations}
        assert got == expected


@settings(max_examples=250, deadline=None)
@given(small_drawings())
def test_aprac_pass_implies_rac_pass(d):
    if check_aprac(d).ok:
        assert check_rac(d).ok
