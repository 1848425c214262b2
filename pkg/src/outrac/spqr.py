"""Decomposition trees for biconnected series-parallel graphs.

A tree over three node kinds — S (series/path), P (parallel bundle), Q (one
real edge) — rooted at a Q-node, such that merging all skeletons along shared
virtual edges reconstructs the input graph.  Built by the classical reduction:
repeatedly merge parallel edges and suppress degree-2 vertices while one
reference edge is kept protected; getting stuck before the graph collapses
onto the reference edge certifies a triconnected core, which is exactly the
non-series-parallel case.

The same unrooted component arena supports rerooting at any real edge, which
the drawing algorithms use to move the root next to a path node whose
children are all single edges.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import InvariantViolation, NotBiconnected, NotSeriesParallel
from .graphs import Graph

# handle into the unrooted arena: a real edge or a composite component
Handle = tuple[str, int]  # ("Q", edge id) | ("C", component index)


@dataclass(slots=True)
class _Comp:
    kind: str            # "S" | "P"
    verts: deque         # S: path vertices, either direction; P: the two poles
    slots: deque         # S: slot i spans (verts[i], verts[i+1]); P: members
    alive: bool = True


@dataclass(eq=False)
class VirtualEdge:
    endpoints: tuple[int, int]
    kind: str                       # "real" | "child" | "parent"
    edge_id: Optional[int] = None   # real only
    child: Optional["SpqrNode"] = None  # child only


@dataclass(eq=False)
class SpqrNode:
    kind: str                       # "S" | "P" | "Q"
    poles: tuple[int, int]
    children: list["SpqrNode"] = field(default_factory=list)
    parent: Optional["SpqrNode"] = None
    edge_id: Optional[int] = None   # Q only
    path_vertices: Optional[list[int]] = None  # S only, from poles[0] to poles[1]
    min_edge: int = 0               # smallest real edge id in this subtree
    handle: Optional[Handle] = None

    @property
    def skeleton(self) -> list[VirtualEdge]:
        out: list[VirtualEdge] = []
        if self.parent is not None:
            out.append(VirtualEdge(self.poles, "parent"))
        if self.kind == "Q":
            out.append(VirtualEdge(self.poles, "real", edge_id=self.edge_id))
        for c in self.children:
            out.append(VirtualEdge(c.poles, "child", child=c))
        return out


class SpqrTree:
    def __init__(self, graph: Graph, root: SpqrNode, arena: "_Arena"):
        self.graph = graph
        self.root = root
        self._arena = arena

    def nodes(self) -> Iterator[SpqrNode]:
        """Preorder, children in their stored deterministic order."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def count(self, kind: str) -> int:
        return sum(1 for node in self.nodes() if node.kind == kind)

    def dump(self) -> str:
        lines: list[str] = []
        stack: list[tuple[SpqrNode, int]] = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            tag = f"{node.kind}{node.poles}"
            if node.kind == "Q":
                tag += f" edge={node.edge_id}"
            elif node.kind == "S":
                tag += f" path={node.path_vertices}"
            lines.append("  " * depth + tag)
            for c in reversed(node.children):
                stack.append((c, depth + 1))
        return "\n".join(lines) + "\n"


class _Arena:
    """Unrooted component store shared by a tree and all its rerootings."""

    def __init__(self, graph: Graph):
        self.graph = graph
        self.comps: list[_Comp] = []
        self.up: dict[Handle, Handle] = {}  # tree link toward the build-time root

    def neighbours(self, h: Handle) -> list[tuple[tuple[int, int], Handle]]:
        """Tree-adjacent handles of h with the vertex pair each one spans.

        For a series component the pairs walk its cycle (path plus the
        wrap-around pair, which leads to the build-time parent); the cycle
        may be stored in either rotation sense.
        """
        if h[0] == "Q":
            u, v = self.graph.edges[h[1]]
            return [((u, v), self.up[h])]
        comp = self.comps[h[1]]
        if comp.kind == "P":
            u, v = comp.verts[0], comp.verts[1]
            out = [((u, v), m) for m in comp.slots]
            out.append(((u, v), self.up[h]))
            return out
        verts = list(comp.verts)
        slots = list(comp.slots)
        out = [((verts[i], verts[i + 1]), slots[i]) for i in range(len(slots))]
        out.append(((verts[-1], verts[0]), self.up[h]))
        return out

    # ------------------------------------------------------- materialization

    def materialize(self, root_eid: int) -> SpqrTree:
        a, b = self.graph.edges[root_eid]
        poles = (a, b) if a < b else (b, a)
        root = SpqrNode("Q", poles, edge_id=root_eid, min_edge=root_eid, handle=("Q", root_eid))
        jobs: list[tuple[Handle, Handle, tuple[int, int], SpqrNode]] = []
        child_h = self.up.get(("Q", root_eid))
        if child_h is not None:
            jobs.append((child_h, ("Q", root_eid), poles, root))
        built: list[SpqrNode] = [root]
        while jobs:
            h, up_h, poles_h, parent_node = jobs.pop()
            node = self._make_node(h, up_h, poles_h, jobs)
            node.parent = parent_node
            parent_node.children.append(node)
            built.append(node)
        # children precede parents in reversed build order
        for node in reversed(built):
            if node.kind == "Q":
                node.min_edge = node.edge_id
            else:
                node.min_edge = min(c.min_edge for c in node.children)
            if node.kind == "P":
                node.children.sort(key=lambda c: c.min_edge)
        return SpqrTree(self.graph, root, self)

    def _make_node(self, h: Handle, up_h: Handle, poles: tuple[int, int], jobs) -> SpqrNode:
        if h[0] == "Q":
            u, v = self.graph.edges[h[1]]
            if {u, v} != set(poles):
                raise InvariantViolation(f"edge {h[1]} endpoints do not match poles {poles}")
            return SpqrNode("Q", poles, edge_id=h[1], handle=h)
        comp = self.comps[h[1]]
        nbrs = self.neighbours(h)
        up_idx = next(i for i, (_, m) in enumerate(nbrs) if m == up_h)
        if comp.kind == "P":
            node = SpqrNode("P", poles, handle=h)
            for i, (_, m) in enumerate(nbrs):
                if i != up_idx:
                    jobs.append((m, h, poles, node))
            return node
        # series: cut the cycle at the slot facing the parent
        cyc = [pair[0] for pair, _ in nbrs]  # k vertices, slot i spans (cyc[i], cyc[i+1 mod k])
        k = len(cyc)
        j = up_idx
        if set(poles) != set(nbrs[j][0]):
            raise InvariantViolation(f"series slot {j} does not match poles {poles}")
        s, t = poles
        if s == cyc[(j + 1) % k]:
            order = [(j + 1 + i) % k for i in range(k - 1)]   # forward walk from s
            path = [cyc[(j + 1 + i) % k] for i in range(k)]
        else:
            order = [(j - 1 - i) % k for i in range(k - 1)]   # backward walk from s
            path = [cyc[(j - i) % k] for i in range(k)]
        node = SpqrNode("S", poles, path_vertices=path, handle=h)
        staged = [
            (nbrs[slot][1], h, (path[step], path[step + 1]), node)
            for step, slot in enumerate(order)
        ]
        jobs.extend(reversed(staged))  # so pops come out in path order
        return node


def _tree_for_single_edge(g: Graph) -> SpqrTree:
    a, b = g.edges[0]
    root = SpqrNode("Q", (min(a, b), max(a, b)), edge_id=0, handle=("Q", 0))
    return SpqrTree(g, root, _Arena(g))


@dataclass(slots=True)
class _WEdge:
    u: int
    v: int
    payload: Handle
    alive: bool = True


def build_sp_tree(g: Graph) -> SpqrTree:
    """Decompose a biconnected series-parallel graph, rooted at edge 0.

    The reference edge is protected while everything else is collapsed by
    parallel merges and degree-2 suppressions.  Completion certifies the
    input series-parallel; a stuck reduction certifies a triconnected core.
    """
    if g.m < 1:
        raise NotBiconnected("graph has no edges")
    if not g.is_biconnected():
        raise NotBiconnected(f"graph with n={g.n}, m={g.m} is not biconnected")
    if g.n == 2:
        return _tree_for_single_edge(g)

    arena = _Arena(g)
    comps = arena.comps
    up = arena.up

    wedges = [_WEdge(u, v, ("Q", eid)) for eid, (u, v) in enumerate(g.edges)]
    incidence: list[set[int]] = [set() for _ in range(g.n)]
    for wid, we in enumerate(wedges):
        incidence[we.u].add(wid)
        incidence[we.v].add(wid)

    ref = 0
    ra, rb = wedges[ref].u, wedges[ref].v
    protected = {ra, rb}

    alive_edges = g.m
    alive_vertices = g.n

    buckets: dict[tuple[int, int], list[int]] = {}
    dirty: list[tuple[int, int]] = []
    suppress_queue: list[int] = [v for v in range(g.n) if v not in protected]

    def bucket_key(we: _WEdge) -> tuple[int, int]:
        return (we.u, we.v) if we.u < we.v else (we.v, we.u)

    def bucket_add(wid: int):
        key = bucket_key(wedges[wid])
        lst = buckets.setdefault(key, [])
        lst.append(wid)
        if len(lst) > 1:
            dirty.append(key)

    for wid in range(len(wedges)):
        bucket_add(wid)

    def drop_edge(wid: int):
        nonlocal alive_edges
        we = wedges[wid]
        we.alive = False
        incidence[we.u].discard(wid)
        incidence[we.v].discard(wid)
        alive_edges -= 1

    def is_p(h: Handle) -> bool:
        return h[0] == "C" and comps[h[1]].kind == "P"

    def is_s(h: Handle) -> bool:
        return h[0] == "C" and comps[h[1]].kind == "S"

    def new_comp(kind: str, verts, slots) -> Handle:
        comps.append(_Comp(kind, deque(verts), deque(slots)))
        return ("C", len(comps) - 1)

    def merge_parallel(w1: int, w2: int):
        e1, e2 = wedges[w1], wedges[w2]
        h1, h2 = e1.payload, e2.payload
        if is_p(h1) and is_p(h2):
            keep, lose = (h1, h2) if len(comps[h1[1]].slots) >= len(comps[h2[1]].slots) else (h2, h1)
            for m in comps[lose[1]].slots:
                up[m] = keep
            comps[keep[1]].slots.extend(comps[lose[1]].slots)
            comps[lose[1]].alive = False
            e1.payload = keep
        elif is_p(h1):
            comps[h1[1]].slots.append(h2)
            up[h2] = h1
        elif is_p(h2):
            comps[h2[1]].slots.append(h1)
            up[h1] = h2
            e1.payload = h2
        else:
            nh = new_comp("P", [e1.u, e1.v], [h1, h2])
            up[h1] = nh
            up[h2] = nh
            e1.payload = nh
        drop_edge(w2)
        suppress_queue.append(e1.u)
        suppress_queue.append(e1.v)

    def flush_parallels() -> bool:
        progress = False
        while dirty:
            key = dirty.pop()
            listed = buckets.get(key)
            if not listed:
                continue
            live = [w for w in listed if wedges[w].alive and bucket_key(wedges[w]) == key]
            while True:
                mergeable = [w for w in live if w != ref]
                if len(mergeable) < 2:
                    break
                merge_parallel(mergeable[0], mergeable[1])
                live = [w for w in live if wedges[w].alive]
                progress = True
            buckets[key] = live
        return progress

    def s_walk_from(h: Handle, x: int):
        """Yield (vertex, slot) stepping away from endpoint x of series comp h."""
        comp = comps[h[1]]
        if comp.verts[0] == x:
            it = zip(list(comp.verts)[1:], list(comp.slots))
        else:
            it = zip(list(comp.verts)[-2::-1], list(comp.slots)[::-1])
        yield from it

    def suppress(x: int):
        nonlocal alive_vertices
        w1, w2 = sorted(incidence[x])
        e1, e2 = wedges[w1], wedges[w2]
        u = e1.u if e1.v == x else e1.v
        v = e2.u if e2.v == x else e2.v
        if u == v:
            raise InvariantViolation("suppression would create a loop; input not biconnected")
        h1, h2 = e1.payload, e2.payload
        if is_s(h1) and is_s(h2):
            c1, c2 = comps[h1[1]], comps[h2[1]]
            if len(c1.slots) >= len(c2.slots):
                keep, lose_h, far = h1, h2, v
            else:
                keep, lose_h, far = h2, h1, u
            kc = comps[keep[1]]
            # weave the smaller path onto the x-end of the larger one
            grow_right = kc.verts[-1] == x
            for vert, slot in s_walk_from(lose_h, x):
                up[slot] = keep
                if grow_right:
                    kc.verts.append(vert)
                    kc.slots.append(slot)
                else:
                    kc.verts.appendleft(vert)
                    kc.slots.appendleft(slot)
            comps[lose_h[1]].alive = False
            e1.payload = keep
        elif is_s(h1):
            c1 = comps[h1[1]]
            if c1.verts[-1] == x:
                c1.verts.append(v)
                c1.slots.append(h2)
            else:
                c1.verts.appendleft(v)
                c1.slots.appendleft(h2)
            up[h2] = h1
        elif is_s(h2):
            c2 = comps[h2[1]]
            if c2.verts[-1] == x:
                c2.verts.append(u)
                c2.slots.append(h1)
            else:
                c2.verts.appendleft(u)
                c2.slots.appendleft(h1)
            up[h1] = h2
            e1.payload = h2
        else:
            nh = new_comp("S", [u, x, v], [h1, h2])
            up[h1] = nh
            up[h2] = nh
            e1.payload = nh
        incidence[x].discard(w1)
        e1.u, e1.v = u, v
        incidence[v].add(w1)
        drop_edge(w2)
        bucket_add(w1)
        alive_vertices -= 1
        suppress_queue.append(u)
        suppress_queue.append(v)

    while alive_edges > 2 or alive_vertices > 2:
        if flush_parallels():
            continue
        moved = False
        while suppress_queue:
            x = suppress_queue.pop()
            if x not in protected and len(incidence[x]) == 2:
                suppress(x)
                moved = True
                break
        if not moved:
            raise NotSeriesParallel(
                "reduction is stuck: the graph contains a triconnected core"
            )

    other = next(we for wid, we in enumerate(wedges) if we.alive and wid != ref)
    if {other.u, other.v} != {ra, rb}:
        raise InvariantViolation("terminal edge does not join the reference endpoints")
    up[("Q", ref)] = other.payload
    up[other.payload] = ("Q", ref)
    return arena.materialize(ref)


# ------------------------------------------------------------------ queries


def find_all_q_children_s_node(tree: SpqrTree) -> SpqrNode:
    """An S-node all of whose children are Q-nodes.

    Found as a series child of a bottommost parallel node; with no parallel
    node anywhere the graph is a cycle and the root's child qualifies.
    Always exists for series-parallel input with n >= 3.
    """
    if tree.graph.n < 3:
        raise InvariantViolation("query requires at least 3 vertices")
    order = list(tree.nodes())
    has_p_below: dict[int, bool] = {}
    for node in reversed(order):
        has_p_below[id(node)] = any(
            c.kind == "P" or has_p_below[id(c)] for c in node.children
        )
    for node in order:
        if node.kind == "P" and not has_p_below[id(node)]:
            for c in node.children:
                if c.kind == "S":
                    if any(gc.kind != "Q" for gc in c.children):
                        raise InvariantViolation(
                            "series child below a bottom parallel node is impure"
                        )
                    return c
            raise InvariantViolation("parallel node without a series child in a simple graph")
    candidate = tree.root.children[0]
    if candidate.kind != "S" or any(c.kind != "Q" for c in candidate.children):
        raise InvariantViolation("tree without parallel nodes must come from a cycle")
    return candidate


def reroot_for_drawing(tree: SpqrTree) -> SpqrTree:
    """Reroot so the root's child is an S-node with at most one P child.

    The new root is the smallest real edge under an S-node whose children are
    all Q-nodes; if that S-node already hangs off the root, the tree is
    returned unchanged.
    """
    mu_s = find_all_q_children_s_node(tree)
    if mu_s.parent is tree.root:
        return tree
    new_root_eid = min(c.edge_id for c in mu_s.children)
    out = tree._arena.materialize(new_root_eid)
    top = out.root.children[0]
    if top.kind != "S":
        raise InvariantViolation("rerooted tree does not hang off a series node")
    if sum(1 for c in top.children if c.kind == "P") > 1:
        raise InvariantViolation("rerooted series node has more than one parallel child")
    return out


def pertinent_graph(tree: SpqrTree, node: SpqrNode) -> Graph:
    """Subgraph of real edges in the subtree, on the full vertex-id range."""
    eids = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if cur.kind == "Q" and cur.edge_id is not None:
            eids.append(cur.edge_id)
        stack.extend(cur.children)
    return Graph.from_edges(tree.graph.n, [tree.graph.edges[e] for e in eids])


def reconstruct_graph(tree: SpqrTree) -> Graph:
    """Merge all skeletons back together; equals the input for a sound tree."""
    edges = [node.poles for node in tree.nodes() if node.kind == "Q"]
    return Graph.from_edges(tree.graph.n, edges)


def check_tree_invariants(tree: SpqrTree) -> None:
    """Structural sanity for a rooted decomposition; raises on violation."""
    g = tree.graph
    root = tree.root
    if root.kind != "Q" or root.parent is not None:
        raise InvariantViolation("root must be a parentless Q-node")
    if len(root.children) > 1:
        raise InvariantViolation("root must have at most one child")
    q_edges = []
    for node in tree.nodes():
        s, t = node.poles
        if node.kind == "Q":
            q_edges.append(node.edge_id)
            if node.children and node is not root:
                raise InvariantViolation("only the root Q-node may have a child")
            if {s, t} != set(g.edges[node.edge_id]):
                raise InvariantViolation(f"Q poles {node.poles} mismatch edge {node.edge_id}")
        elif node.kind == "P":
            if len(node.children) < 2:
                raise InvariantViolation("parallel node needs at least two children")
            for c in node.children:
                if set(c.poles) != {s, t}:
                    raise InvariantViolation("parallel child poles differ from its own")
                if c.kind == "P":
                    raise InvariantViolation("parallel node adjacent to parallel node")
        elif node.kind == "S":
            path = node.path_vertices
            if path is None or len(path) < 3 or len(set(path)) != len(path):
                raise InvariantViolation("series path must visit >= 3 distinct vertices")
            if path[0] != s or path[-1] != t:
                raise InvariantViolation("series path must run pole to pole")
            if len(node.children) != len(path) - 1:
                raise InvariantViolation("series child count mismatch")
            for i, c in enumerate(node.children):
                if c.poles != (path[i], path[i + 1]):
                    raise InvariantViolation("series child poles out of path order")
                if c.kind == "S":
                    raise InvariantViolation("series node adjacent to series node")
        else:
            raise InvariantViolation(f"unknown node kind {node.kind!r}")
        if node is not root and not node.children and node.kind != "Q":
            raise InvariantViolation("only Q-nodes may be leaves")
    if sorted(q_edges) != list(range(g.m)):
        raise InvariantViolation("Q-nodes do not cover the edge set exactly once")
    if reconstruct_graph(tree) != g:
        raise InvariantViolation("skeleton merge does not reconstruct the input graph")
