"""Generators for the graph families used throughout the package.

Includes the density-tight chain of K4 blocks together with its explicit
drawing, complete bipartite K_{2,m}, the octahedron, plain cycles, and a
seeded random generator for bounded-degree series-parallel test graphs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .drawing import Drawing
from .errors import InfeasibleParameters
from .geometry import Point
from .graphs import Graph


def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise InfeasibleParameters(f"cycle needs at least 3 vertices, got {n}", n=n)
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def gen_k4_chain(k: int) -> Graph:
    """Chain of k complete graphs on four vertices glued along vertical edges.

    Column i holds vertices 2i (bottom) and 2i+1 (top); square i spans columns
    i and i+1.  The result has 2k+2 vertices and 5k+1 edges, meeting the
    outer right-angle density bound 2m = 5n - 8 with equality.
    """
    if k < 1:
        raise InfeasibleParameters(f"chain length must be at least 1, got {k}", k=k)
    edges = []
    for i in range(k + 1):
        edges.append((2 * i, 2 * i + 1))  # vertical column edge
    for i in range(k):
        a, b, c, d = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        edges.extend([(a, c), (b, d), (a, d), (b, c)])
    return Graph.from_edges(2 * k + 2, edges)


def draw_k4_chain(k: int) -> Drawing:
    """Unit squares side by side, each with both diagonals crossing at its center."""
    g = gen_k4_chain(k)
    coords = {}
    for i in range(k + 1):
        coords[2 * i] = Point(Fraction(i), Fraction(0))
        coords[2 * i + 1] = Point(Fraction(i), Fraction(1))
    return Drawing.of(g, coords)


def gen_k2m(m: int) -> Graph:
    """Complete bipartite graph with parts {0, 1} and {2, ..., m+1}."""
    if m < 1:
        raise InfeasibleParameters(f"need at least one middle vertex, got {m}", m=m)
    edges = []
    for j in range(2, m + 2):
        edges.append((0, j))
        edges.append((1, j))
    return Graph.from_edges(m + 2, edges)


def gen_octahedron() -> Graph:
    """The 4-regular triconnected graph on six vertices.

    Poles 0 and 1 each see all of 2..5, which form a 4-cycle among themselves.
    """
    edges = [(0, j) for j in range(2, 6)] + [(1, j) for j in range(2, 6)]
    edges += [(2, 3), (3, 4), (4, 5), (2, 5)]
    return Graph.from_edges(6, edges)


def gen_random_sp(n_target: int, d_max: int, seed: int) -> Graph:
    """Seeded biconnected series-parallel graph with bounded degree.

    Grown from a triangle one vertex at a time: a series step subdivides a
    uniformly random edge, a parallel step attaches a two-edge path alongside
    a uniformly random edge whose endpoints have spare degree.  When both
    step kinds are feasible each is picked with probability 1/2.
    """
    if n_target < 3:
        raise InfeasibleParameters(f"need at least 3 vertices, got {n_target}", n_target=n_target)
    if d_max not in (3, 4):
        raise InfeasibleParameters(f"degree bound must be 3 or 4, got {d_max}", d_max=d_max)
    rng = random.Random(seed)
    edges = {(0, 1), (1, 2), (0, 2)}
    deg = {0: 2, 1: 2, 2: 2}
    n = 3
    while n < n_target:
        pool = sorted(edges)
        parallel_ok = [e for e in pool if deg[e[0]] < d_max and deg[e[1]] < d_max]
        w = n
        if parallel_ok and rng.random() < 0.5:
            u, v = parallel_ok[rng.randrange(len(parallel_ok))]
            edges.add((min(u, w), max(u, w)))
            edges.add((min(w, v), max(w, v)))
            deg[u] += 1
            deg[v] += 1
            deg[w] = 2
        else:
            u, v = pool[rng.randrange(len(pool))]
            edges.remove((u, v))
            edges.add((min(u, w), max(u, w)))
            edges.add((min(w, v), max(w, v)))
            deg[w] = 2
        n += 1
    return Graph.from_edges(n, sorted(edges))


def gen_lk(k: int) -> Graph:
    """Ring of k copies of K_{2,3} joined pole-to-pole by k link edges.

    Copy i occupies vertices 5i..5i+4 as poles s=5i, t=5i+1 and middle
    vertices x=5i+2, y=5i+3, z=5i+4; link i runs from t of copy i to s of
    copy i+1 (indices mod k).  Total: 5k vertices, 7k edges.
    """
    if k < 2:
        raise InfeasibleParameters(f"ring needs at least 2 blocks, got {k}", k=k)
    edges = []
    for i in range(k):
        s, t, x, y, z = 5 * i, 5 * i + 1, 5 * i + 2, 5 * i + 3, 5 * i + 4
        edges += [(s, x), (x, t), (s, y), (y, t), (s, z), (z, t)]
    for i in range(k):
        edges.append((5 * i + 1, 5 * ((i + 1) % k)))
    return Graph.from_edges(5 * k, edges)


# --- explicit drawing of the ring ----------------------------------------
#
# The ring is laid out on an axis-parallel closed tour and sheared at the end
# by (x, y) -> (x - y, x + y), which turns every horizontal/vertical crossing
# pair into a +1/-1 slope pair at a right angle.  The tour grows exactly like
# the doubling construction for the outer cycle: a two-sided base (two
# hairpins joined by two horizontal edges), then per extra block either a
# hairpin splits into two corners joined by a vertical edge, or the
# south-eastmost corner is pushed out into a proper crossing of its two tour
# edges plus a fresh corner/hairpin pair (the staircase of "hooks").
#
# Each tour vertex is then replaced by a five-point block whose local shape
# depends only on how the tour passes through it:
#
#   corner block  (tour turns 90 degrees)   hairpin block (tour reverses)
#
# In block-local coordinates the incoming link arrives along y=0 heading +x
# and always crosses the block's (t, z) edge at the local origin; the pair
# (s, x) x (t, y) cross once inside the block; the remaining edges stay
# crossing-free.  All five vertices keep a face towards the unbounded region.

_E, _N, _W, _S = (1, 0), (0, 1), (-1, 0), (0, -1)

# local templates: entry along +x at y=0, exit north (corner) / west (hairpin)
_CORNER_PTS = {"s": (2, 0), "t": (0, 8), "x": (2, 16), "y": (12, 8), "z": (0, -4)}
_HAIRPIN_PTS = {"s": (8, 0), "t": (0, 96), "x": (8, 112), "y": (40, 96), "z": (0, -16)}

_LK_W = 1024  # horizontal tour pitch
_LK_H = 96  # vertical tour pitch


@dataclass(frozen=True)
class _Site:
    kind: str  # "C" corner, "U" hairpin
    ax: int  # anchor: where the incoming link crosses the (t, z) edge
    ay: int
    din: tuple  # incoming link direction
    dout: tuple  # outgoing link direction
    rise: int = 0  # hairpin only: exit lane minus entry lane


def _lk_sites(k: int) -> list:
    W, H = _LK_W, _LK_H
    if k == 2:
        return [
            _Site("U", 0, 0, _W, _E, H),
            _Site("U", W, H, _E, _W, -H),
        ]
    if k == 3:
        return [
            _Site("C", 0, 0, _W, _N),
            _Site("C", 0, H, _N, _E),
            _Site("U", W, H, _E, _W, -H),
        ]

    def se_v(qx: int, qy: int, rem: int) -> list:
        # chunk entered southbound along x=qx, exiting westbound at lane qy
        if rem == 0:
            return [_Site("C", qx, qy, _S, _W)]
        head = _Site("C", qx, qy - H, _S, _E)
        if rem == 1:
            return [head, _Site("U", qx + W, qy - H, _E, _W, H)]
        return [head] + se_h(qx + W, qy - H, rem - 2) + [_Site("C", qx + W, qy, _N, _W)]

    def se_h(qx: int, qy: int, rem: int) -> list:
        # chunk entered eastbound at lane qy, exiting northbound along x=qx
        if rem == 0:
            return [_Site("C", qx, qy, _E, _N)]
        tail = _Site("C", qx, qy - H, _W, _N)
        if rem == 1:
            return [_Site("U", qx + W, qy, _E, _W, -H), tail]
        return [_Site("C", qx + W, qy, _E, _S)] + se_v(qx + W, qy - H, rem - 2) + [tail]

    return [
        _Site("C", 0, 0, _W, _N),
        _Site("C", 0, H, _N, _E),
        _Site("C", W, H, _E, _S),
    ] + se_v(W, 0, k - 4)


def _lk_cell(site: _Site) -> dict:
    """Map a block template into tour coordinates (pre-shear)."""
    tpl = _CORNER_PTS if site.kind == "C" else _HAIRPIN_PTS
    dx, dy = site.din
    if site.kind == "C":
        flip = site.dout != (-dy, dx)  # mirror unless the tour turns counterclockwise
    else:
        flip = 96 * dx != site.rise
    out = {}
    for role, (lx, ly) in tpl.items():
        if flip:
            ly = -ly
        out[role] = (site.ax + lx * dx - ly * dy, site.ay + lx * dy + ly * dx)
    return out


def draw_lk(k: int) -> Drawing:
    """Outer drawing of gen_lk(k) with right-angle slope +-1 crossings.

    Every block's incoming link crosses that block's (t, z) edge, every block
    has its own (s, x) x (t, y) crossing, and for k >= 5 the staircase hooks
    add proper link-link crossings; all of them are axis-parallel pairs
    before the final shear.
    """
    g = gen_lk(k)
    coords = {}
    for i, site in enumerate(_lk_sites(k)):
        cell = _lk_cell(site)
        for off, role in enumerate("stxyz"):
            px, py = cell[role]
            coords[5 * i + off] = Point(Fraction(px - py), Fraction(px + py))
    return Drawing.of(g, coords)


# --- family dispatch -------------------------------------------------------

FAMILY_TAGS = ("cycle", "k4chain", "k2m", "octahedron", "linkedK23", "randomSP")


@dataclass(frozen=True)
class FamilySpec:
    """Which family to generate, with its integer parameters."""

    family: str
    k: Optional[int] = None
    m: Optional[int] = None
    n: Optional[int] = None
    d_max: Optional[int] = None
    seed: Optional[int] = None


def _require(spec: FamilySpec, field: str) -> int:
    value = getattr(spec, field)
    if value is None:
        raise InfeasibleParameters(
            f"family {spec.family!r} needs parameter {field!r}", family=spec.family
        )
    return value


def build_family(spec: FamilySpec) -> Graph:
    if spec.family == "cycle":
        return gen_cycle(_require(spec, "n"))
    if spec.family == "k4chain":
        return gen_k4_chain(_require(spec, "k"))
    if spec.family == "k2m":
        return gen_k2m(_require(spec, "m"))
    if spec.family == "octahedron":
        return gen_octahedron()
    if spec.family == "linkedK23":
        return gen_lk(_require(spec, "k"))
    if spec.family == "randomSP":
        return gen_random_sp(
            _require(spec, "n"), _require(spec, "d_max"), _require(spec, "seed")
        )
    raise InfeasibleParameters(f"unknown family {spec.family!r}", family=spec.family)


def draw_family(spec: FamilySpec) -> Optional[Drawing]:
    """Reference drawing for the families that ship one, else None."""
    if spec.family == "k4chain":
        return draw_k4_chain(_require(spec, "k"))
    if spec.family == "linkedK23":
        return draw_lk(_require(spec, "k"))
    return None
