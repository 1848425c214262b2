"""Graph model: canonicalization, degrees, biconnectivity, JSON round-trip."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from outrac.errors import InvariantViolation, ParseError
from outrac.graphs import Graph, load_graph, save_graph


def g(n, edges):
    return Graph.from_edges(n, edges)


def cycle(n):
    return g(n, [(i, (i + 1) % n) for i in range(n)])


def k23():
    return g(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)])


def k2m(m):
    return g(2 + m, [(s, 2 + i) for s in (0, 1) for i in range(m)])


def octahedron():
    # K_{2,4} plus a cycle on the degree-2 side
    edges = [(s, 2 + i) for s in (0, 1) for i in range(4)]
    edges += [(2, 3), (3, 4), (4, 5), (5, 2)]
    return g(6, edges)


# ---------------------------------------------------------------- structure


def test_edges_canonicalized():
    got = g(4, [(3, 1), (2, 0), (1, 0)])
    assert got.edges == ((0, 1), (0, 2), (1, 3))
    assert got.edge_id(3, 1) == 2
    assert got.has_edge(0, 2) and not got.has_edge(2, 3)


def test_self_loop_rejected():
    with pytest.raises(InvariantViolation):
        g(2, [(0, 0)])


def test_duplicate_edge_rejected():
    with pytest.raises(InvariantViolation):
        g(3, [(0, 1), (1, 0)])


def test_out_of_range_rejected():
    with pytest.raises(InvariantViolation):
        g(2, [(0, 2)])


def test_degrees():
    assert k23().max_degree() == 3
    assert k2m(5).max_degree() == 5
    assert octahedron().max_degree() == 4
    assert g(3, []).max_degree() == 0
    assert sorted(k23().degree(v) for v in range(5)) == [2, 2, 2, 3, 3]


@given(st.integers(3, 9), st.data())
def test_degree_sum_is_twice_edges(n, data):
    all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = data.draw(st.lists(st.sampled_from(all_pairs), unique=True, max_size=len(all_pairs)))
    gr = g(n, chosen)
    assert sum(gr.degree(v) for v in range(n)) == 2 * gr.m


# ------------------------------------------------------------ connectivity


def test_biconnected_cycle():
    assert cycle(5).is_biconnected()


def test_path_not_biconnected():
    assert not g(3, [(0, 1), (1, 2)]).is_biconnected()


def test_two_triangles_sharing_vertex_not_biconnected():
    gr = g(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)])
    assert not gr.is_biconnected()


def test_single_edge_is_biconnected():
    assert g(2, [(0, 1)]).is_biconnected()


def test_disconnected_not_biconnected():
    assert not g(4, [(0, 1), (2, 3)]).is_biconnected()
    assert not g(3, [(0, 1)]).is_biconnected()  # isolated vertex


def test_k23_biconnected():
    assert k23().is_biconnected()


def naive_is_biconnected(gr: Graph) -> bool:
    """Independent oracle: remove each vertex, check connectivity directly."""

    def connected_on(vertices, edges):
        vertices = set(vertices)
        if not vertices:
            return True
        adj = {v: [] for v in vertices}
        for u, v in edges:
            if u in vertices and v in vertices:
                adj[u].append(v)
                adj[v].append(u)
        start = next(iter(vertices))
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for w in adj[x]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == vertices

    if gr.n < 2 or not connected_on(range(gr.n), gr.edges):
        return False
    if gr.n == 2:
        return gr.m == 1
    return all(
        connected_on([u for u in range(gr.n) if u != v], gr.edges) for v in range(gr.n)
    )


@settings(max_examples=300)
@given(st.integers(2, 8), st.data())
def test_biconnectivity_matches_vertex_removal_oracle(n, data):
    all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = data.draw(st.lists(st.sampled_from(all_pairs), unique=True, max_size=len(all_pairs)))
    gr = g(n, chosen)
    assert gr.is_biconnected() == naive_is_biconnected(gr)


# -------------------------------------------------------------------- JSON


def test_round_trip_is_canonical_identity():
    doc = json.dumps(
        {"format": "outrac-graph", "version": 1, "n": 3, "edges": [[2, 1], [1, 0], [0, 2]]}
    ).encode()
    gr = load_graph(doc)
    assert gr.edges == ((0, 1), (0, 2), (1, 2))
    assert load_graph(save_graph(gr)) == gr


def test_load_rejects_self_loop_document():
    doc = json.dumps({"format": "outrac-graph", "version": 1, "n": 2, "edges": [[0, 0]]})
    with pytest.raises(InvariantViolation):
        load_graph(doc.encode())


@pytest.mark.parametrize(
    "doc",
    [
        "[]",
        "{}",
        '{"format":"outrac-graph","version":2,"n":1,"edges":[]}',
        '{"format":"wrong","version":1,"n":1,"edges":[]}',
        '{"format":"outrac-graph","version":1,"n":"3","edges":[]}',
        '{"format":"outrac-graph","version":1,"n":3,"edges":[[0,1,2]]}',
        '{"format":"outrac-graph","version":1,"n":3}',
        "not json",
    ],
)
def test_load_rejects_malformed(doc):
    with pytest.raises(ParseError):
        load_graph(doc.encode())


@given(st.integers(0, 7), st.data())
def test_save_load_round_trip(n, data):
    all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = data.draw(st.lists(st.sampled_from(all_pairs), unique=True, max_size=len(all_pairs)) if all_pairs else st.just([]))
    gr = g(n, chosen)
    assert load_graph(save_graph(gr)) == gr
