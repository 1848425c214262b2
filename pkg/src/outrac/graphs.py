"""Simple undirected graphs with dense integer ids, plus JSON round-trip.

Edges are canonicalized at construction: endpoints sorted within each pair,
pairs sorted lexicographically.  The position of an edge in that canonical
list is its edge id, which the embedding format and the SPQR machinery both
rely on staying stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InvariantViolation, ParseError

Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...]
    _adj: dict[int, tuple[int, ...]] = field(compare=False, repr=False)
    _edge_ids: dict[Edge, int] = field(compare=False, repr=False)

    @staticmethod
    def from_edges(n: int, edges) -> "Graph":
        if n < 0:
            raise InvariantViolation(f"negative vertex count {n}")
        canon: list[Edge] = []
        for e in edges:
            u, v = e
            if not (isinstance(u, int) and isinstance(v, int)):
                raise InvariantViolation(f"non-integer endpoint in edge {e!r}")
            if u == v:
                raise InvariantViolation(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvariantViolation(f"edge ({u}, {v}) out of range for n={n}")
            canon.append((u, v) if u < v else (v, u))
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise InvariantViolation(f"duplicate edge {a}")
        adj: dict[int, list[int]] = {v: [] for v in range(n)}
        for u, v in canon:
            adj[u].append(v)
            adj[v].append(u)
        return Graph(
            n,
            tuple(canon),
            {v: tuple(sorted(ws)) for v, ws in adj.items()},
            {e: i for i, e in enumerate(canon)},
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def max_degree(self) -> int:
        return max((len(ws) for ws in self._adj.values()), default=0)

    def edge_id(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        got = self._edge_ids.get(key)
        if got is None:
            raise KeyError(f"no edge ({u}, {v})")
        return got

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edge_ids

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    def is_biconnected(self) -> bool:
        """Connected with no cut vertex; a single edge also counts.

        The single edge on two vertices is accepted because decompositions of
        two-terminal graphs bottom out there.
        """
        if self.n < 2 or not self.is_connected():
            return False
        if self.n == 2:
            return self.m == 1
        # iterative DFS articulation-point detection
        disc = [-1] * self.n
        low = [0] * self.n
        parent = [-1] * self.n
        timer = 0
        root_children = 0
        stack: list[tuple[int, int]] = [(0, 0)]  # (vertex, next-neighbour index)
        disc[0] = low[0] = timer
        timer += 1
        while stack:
            v, i = stack.pop()
            if i < len(self._adj[v]):
                stack.append((v, i + 1))
                w = self._adj[v][i]
                if disc[w] == -1:
                    parent[w] = v
                    if v == 0:
                        root_children += 1
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, 0))
                elif w != parent[v]:
                    low[v] = min(low[v], disc[w])
            else:
                p = parent[v]
                if p != -1:
                    low[p] = min(low[p], low[v])
                    if p != 0 and low[v] >= disc[p]:
                        return False  # p is a cut vertex
        return root_children <= 1

    # ------------------------------------------------------------------ JSON

    def to_json(self) -> dict:
        return {
            "format": "outrac-graph",
            "version": 1,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
        }

    @staticmethod
    def from_json(doc: dict) -> "Graph":
        if not isinstance(doc, dict):
            raise ParseError("graph document must be a JSON object")
        if doc.get("format") != "outrac-graph":
            raise ParseError(f"bad format tag {doc.get('format')!r}, expected 'outrac-graph'")
        if doc.get("version") != 1:
            raise ParseError(f"unsupported graph format version {doc.get('version')!r}")
        n = doc.get("n")
        if not isinstance(n, int) or isinstance(n, bool):
            raise ParseError("field 'n' must be an integer")
        edges = doc.get("edges")
        if not isinstance(edges, list):
            raise ParseError("field 'edges' must be a list")
        pairs = []
        for k, e in enumerate(edges):
            if not (isinstance(e, list) and len(e) == 2):
                raise ParseError(f"edges[{k}] must be a two-element list")
            pairs.append((e[0], e[1]))
        return Graph.from_edges(n, pairs)


def save_graph(g: Graph) -> bytes:
    return (json.dumps(g.to_json(), indent=1) + "\n").encode("utf-8")


def load_graph(data: bytes) -> Graph:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"not valid UTF-8 JSON: {exc}") from exc
    return Graph.from_json(doc)
